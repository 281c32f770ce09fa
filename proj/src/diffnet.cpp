#include "gridlang/diffnet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace gridlang {

int LayerSpec::weight_count() const {
    switch (kind) {
        case LayerKind::Dense:     return in.numel() * out.numel();
        case LayerKind::Conv2x2:
        case LayerKind::Deconv2x2: return out.c * 2 * 2 * in.c;
        case LayerKind::Bias:      return 0;
    }
    return 0;
}

int LayerSpec::bias_count() const {
    switch (kind) {
        case LayerKind::Dense:     return out.numel();
        case LayerKind::Conv2x2:
        case LayerKind::Deconv2x2: return out.c;
        case LayerKind::Bias:      return in.numel();
    }
    return 0;
}

LayerSpec dense_layer(Shape in, Shape out, Activation act) {
    return {LayerKind::Dense, act, in, out};
}

LayerSpec conv2x2_layer(Shape in, int out_channels, Activation act) {
    return {LayerKind::Conv2x2, act, in, {in.h + 1, in.w + 1, out_channels}};
}

LayerSpec deconv2x2_layer(Shape in, int out_channels, Activation act) {
    if (in.h < 2 || in.w < 2) throw std::invalid_argument("deconv2x2: input spatial size must be >= 2");
    return {LayerKind::Deconv2x2, act, in, {in.h - 1, in.w - 1, out_channels}};
}

LayerSpec bias_layer(Shape shape, Activation act) {
    return {LayerKind::Bias, act, shape, shape};
}

Network make_network(std::vector<LayerSpec> layers, std::uint64_t seed) {
    Network net;
    net.layers = std::move(layers);
    net.seed = seed;
    int total = 0;
    for (const auto& l : net.layers) {
        net.layer_offsets.push_back(total);
        total += l.param_count();
    }
    net.params.assign(total, 0.0);
    net.adam.m.assign(total, 0.0);
    net.adam.v.assign(total, 0.0);

    Rng rng(seed);
    for (size_t li = 0; li < net.layers.size(); ++li) {
        const LayerSpec& l = net.layers[li];
        int fan_in = 0;
        switch (l.kind) {
            case LayerKind::Dense:     fan_in = l.in.numel(); break;
            case LayerKind::Conv2x2:
            case LayerKind::Deconv2x2: fan_in = 2 * 2 * l.in.c; break;
            case LayerKind::Bias:      fan_in = 0; break;
        }
        if (fan_in == 0) continue;  // free-standing bias layers start at zero
        double limit = std::sqrt(6.0 / fan_in);
        double* p = net.params.data() + net.layer_offsets[li];
        for (int i = 0; i < l.weight_count(); ++i) p[i] = rng.uniform(-limit, limit);
        // biases small but nonzero, so no unit starts pinned to a ReLU kink
        double blimit = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (int i = 0; i < l.bias_count(); ++i)
            p[l.weight_count() + i] = rng.uniform(-blimit, blimit);
    }
    return net;
}

Network make_policy_net(int message_len, std::uint64_t seed, Activation hidden_act) {
    std::vector<LayerSpec> layers{
        dense_layer({2 + message_len, 1, 1}, {10, 1, 1}, hidden_act),
        dense_layer({10, 1, 1}, {20, 1, 1}, hidden_act),
        dense_layer({20, 1, 1}, {20, 1, 1}, hidden_act),
        dense_layer({20, 1, 1}, {4, 1, 1}, Activation::Linear),
    };
    return make_network(std::move(layers), seed);
}

namespace {

void apply_activation(Activation act, const Tensor& pre, Tensor& post) {
    post = pre;
    if (act == Activation::Relu)
        for (double& x : post.v) x = x > 0 ? x : 0.0;
}

Tensor layer_forward(const LayerSpec& l, const double* p, const Tensor& in) {
    Tensor z(l.out.h, l.out.w, l.out.c);
    switch (l.kind) {
        case LayerKind::Dense: {
            const int ni = l.in.numel(), no = l.out.numel();
            const double* b = p + static_cast<size_t>(ni) * no;
            for (int o = 0; o < no; ++o) {
                double acc = b[o];
                const double* row = p + static_cast<size_t>(o) * ni;
                for (int i = 0; i < ni; ++i) acc += row[i] * in.v[i];
                z.v[o] = acc;
            }
            break;
        }
        case LayerKind::Conv2x2: {
            const double* b = p + l.weight_count();
            for (int oi = 0; oi < l.out.h; ++oi)
                for (int oj = 0; oj < l.out.w; ++oj)
                    for (int oc = 0; oc < l.out.c; ++oc) {
                        double acc = b[oc];
                        for (int di = 0; di < 2; ++di) {
                            int ii = oi - 1 + di;
                            if (ii < 0 || ii >= l.in.h) continue;
                            for (int dj = 0; dj < 2; ++dj) {
                                int jj = oj - 1 + dj;
                                if (jj < 0 || jj >= l.in.w) continue;
                                const double* w = p + ((static_cast<size_t>(oc) * 2 + di) * 2 + dj) * l.in.c;
                                const double* x = &in.at(ii, jj, 0);
                                for (int ic = 0; ic < l.in.c; ++ic) acc += x[ic] * w[ic];
                            }
                        }
                        z.at(oi, oj, oc) = acc;
                    }
            break;
        }
        case LayerKind::Deconv2x2: {
            // Adjoint index pattern of Conv2x2; every 2x2 window is interior.
            const double* b = p + l.weight_count();
            for (int oi = 0; oi < l.out.h; ++oi)
                for (int oj = 0; oj < l.out.w; ++oj)
                    for (int oc = 0; oc < l.out.c; ++oc) {
                        double acc = b[oc];
                        for (int di = 0; di < 2; ++di)
                            for (int dj = 0; dj < 2; ++dj) {
                                const double* w = p + ((static_cast<size_t>(oc) * 2 + di) * 2 + dj) * l.in.c;
                                const double* x = &in.at(oi + 1 - di, oj + 1 - dj, 0);
                                for (int ic = 0; ic < l.in.c; ++ic) acc += x[ic] * w[ic];
                            }
                        z.at(oi, oj, oc) = acc;
                    }
            break;
        }
        case LayerKind::Bias: {
            for (int i = 0; i < l.in.numel(); ++i) z.v[i] = in.v[i] + p[i];
            break;
        }
    }
    return z;
}

// dL/dz -> accumulate weight/bias grads, return dL/din.
Tensor layer_backward(const LayerSpec& l, const double* p, const Tensor& in, const Tensor& dz,
                      double* gp) {
    Tensor din(l.in.h, l.in.w, l.in.c);
    switch (l.kind) {
        case LayerKind::Dense: {
            const int ni = l.in.numel(), no = l.out.numel();
            double* gb = gp + static_cast<size_t>(ni) * no;
            for (int o = 0; o < no; ++o) {
                double d = dz.v[o];
                if (d == 0.0) continue;
                gb[o] += d;
                const double* row = p + static_cast<size_t>(o) * ni;
                double* grow = gp + static_cast<size_t>(o) * ni;
                for (int i = 0; i < ni; ++i) {
                    grow[i] += d * in.v[i];
                    din.v[i] += d * row[i];
                }
            }
            break;
        }
        case LayerKind::Conv2x2: {
            double* gb = gp + l.weight_count();
            for (int oi = 0; oi < l.out.h; ++oi)
                for (int oj = 0; oj < l.out.w; ++oj)
                    for (int oc = 0; oc < l.out.c; ++oc) {
                        double d = dz.at(oi, oj, oc);
                        if (d == 0.0) continue;
                        gb[oc] += d;
                        for (int di = 0; di < 2; ++di) {
                            int ii = oi - 1 + di;
                            if (ii < 0 || ii >= l.in.h) continue;
                            for (int dj = 0; dj < 2; ++dj) {
                                int jj = oj - 1 + dj;
                                if (jj < 0 || jj >= l.in.w) continue;
                                size_t wo = ((static_cast<size_t>(oc) * 2 + di) * 2 + dj) * l.in.c;
                                const double* w = p + wo;
                                double* gw = gp + wo;
                                const double* x = &in.at(ii, jj, 0);
                                double* dx = &din.at(ii, jj, 0);
                                for (int ic = 0; ic < l.in.c; ++ic) {
                                    gw[ic] += d * x[ic];
                                    dx[ic] += d * w[ic];
                                }
                            }
                        }
                    }
            break;
        }
        case LayerKind::Deconv2x2: {
            double* gb = gp + l.weight_count();
            for (int oi = 0; oi < l.out.h; ++oi)
                for (int oj = 0; oj < l.out.w; ++oj)
                    for (int oc = 0; oc < l.out.c; ++oc) {
                        double d = dz.at(oi, oj, oc);
                        if (d == 0.0) continue;
                        gb[oc] += d;
                        for (int di = 0; di < 2; ++di)
                            for (int dj = 0; dj < 2; ++dj) {
                                size_t wo = ((static_cast<size_t>(oc) * 2 + di) * 2 + dj) * l.in.c;
                                const double* w = p + wo;
                                double* gw = gp + wo;
                                const double* x = &in.at(oi + 1 - di, oj + 1 - dj, 0);
                                double* dx = &din.at(oi + 1 - di, oj + 1 - dj, 0);
                                for (int ic = 0; ic < l.in.c; ++ic) {
                                    gw[ic] += d * x[ic];
                                    dx[ic] += d * w[ic];
                                }
                            }
                    }
            break;
        }
        case LayerKind::Bias: {
            for (int i = 0; i < l.in.numel(); ++i) {
                gp[i] += dz.v[i];
                din.v[i] = dz.v[i];
            }
            break;
        }
    }
    return din;
}

}  // namespace

Tensor forward(const Network& net, const Tensor& input, ForwardCache* cache) {
    if (input.numel() != net.input_shape().numel())
        throw std::invalid_argument("forward: input element count does not match first layer");
    if (cache) {
        cache->inputs.clear();
        cache->preacts.clear();
    }
    Tensor cur = input.reshaped(net.layers.front().in.h, net.layers.front().in.w, net.layers.front().in.c);
    for (size_t li = 0; li < net.layers.size(); ++li) {
        const LayerSpec& l = net.layers[li];
        cur = cur.reshaped(l.in.h, l.in.w, l.in.c);
        if (cache) cache->inputs.push_back(cur);
        Tensor z = layer_forward(l, net.params.data() + net.layer_offsets[li], cur);
        if (cache) cache->preacts.push_back(z);
        Tensor post;
        apply_activation(l.act, z, post);
        cur = std::move(post);
    }
    if (cache) cache->output = cur;
    return cur;
}

Tensor backward(const Network& net, const ForwardCache& cache, const Tensor& dloss_dout,
                std::span<double> param_grad) {
    if (cache.inputs.size() != net.layers.size())
        throw std::logic_error("backward: forward cache missing or stale");
    if (static_cast<int>(param_grad.size()) != net.param_count())
        throw std::invalid_argument("backward: gradient buffer size mismatch");
    Tensor d = dloss_dout;
    for (int li = static_cast<int>(net.layers.size()) - 1; li >= 0; --li) {
        const LayerSpec& l = net.layers[li];
        d = d.reshaped(l.out.h, l.out.w, l.out.c);
        if (l.act == Activation::Relu) {
            const Tensor& z = cache.preacts[li];
            for (int i = 0; i < d.numel(); ++i)
                if (z.v[i] <= 0) d.v[i] = 0.0;
        }
        d = layer_backward(l, net.params.data() + net.layer_offsets[li], cache.inputs[li], d,
                           param_grad.data() + net.layer_offsets[li]);
    }
    return d;
}

void adam_step(Network& net, std::span<const double> grad, double lr, const AdamConfig& cfg) {
    if (static_cast<int>(grad.size()) != net.param_count())
        throw std::invalid_argument("adam_step: gradient length mismatch");
    for (double g : grad)
        if (!std::isfinite(g)) throw std::invalid_argument("adam_step: non-finite gradient entry");
    AdamState& a = net.adam;
    a.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(a.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(a.t));
    for (size_t i = 0; i < net.params.size(); ++i) {
        a.m[i] = cfg.beta1 * a.m[i] + (1.0 - cfg.beta1) * grad[i];
        a.v[i] = cfg.beta2 * a.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        double mhat = a.m[i] / bc1;
        double vhat = a.v[i] / bc2;
        net.params[i] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

std::vector<double> softmax(std::span<const double> values) {
    double mx = *std::max_element(values.begin(), values.end());
    std::vector<double> out(values.size());
    double sum = 0;
    for (size_t i = 0; i < values.size(); ++i) {
        out[i] = std::exp(values[i] - mx);
        sum += out[i];
    }
    for (double& x : out) x /= sum;
    return out;
}

namespace {

using nlohmann::json;

constexpr int kCheckpointVersion = 1;

const char* kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::Dense:     return "dense";
        case LayerKind::Conv2x2:   return "conv2x2";
        case LayerKind::Deconv2x2: return "deconv2x2";
        case LayerKind::Bias:      return "bias";
    }
    return "?";
}

LayerKind kind_from_name(const std::string& s) {
    if (s == "dense") return LayerKind::Dense;
    if (s == "conv2x2") return LayerKind::Conv2x2;
    if (s == "deconv2x2") return LayerKind::Deconv2x2;
    if (s == "bias") return LayerKind::Bias;
    throw std::invalid_argument("checkpoint: unknown layer kind " + s);
}

}  // namespace

std::string checkpoint_to_json(const Network& net) {
    json arch = json::array();
    for (const auto& l : net.layers) {
        arch.push_back({{"kind", kind_name(l.kind)},
                        {"act", l.act == Activation::Relu ? "relu" : "linear"},
                        {"in", {l.in.h, l.in.w, l.in.c}},
                        {"out", {l.out.h, l.out.w, l.out.c}}});
    }
    json doc{{"version", kCheckpointVersion},
             {"arch", arch},
             {"params", net.params},
             {"adam", {{"m", net.adam.m}, {"v", net.adam.v}, {"t", net.adam.t}}},
             {"seed", net.seed}};
    return doc.dump();
}

Network network_from_json(const std::string& text) {
    json doc = json::parse(text);
    if (doc.at("version").get<int>() != kCheckpointVersion)
        throw std::invalid_argument("checkpoint: unsupported version");
    std::vector<LayerSpec> layers;
    for (const auto& jl : doc.at("arch")) {
        LayerSpec l;
        l.kind = kind_from_name(jl.at("kind").get<std::string>());
        l.act = jl.at("act").get<std::string>() == "relu" ? Activation::Relu : Activation::Linear;
        auto in = jl.at("in");
        auto out = jl.at("out");
        l.in = {in[0].get<int>(), in[1].get<int>(), in[2].get<int>()};
        l.out = {out[0].get<int>(), out[1].get<int>(), out[2].get<int>()};
        layers.push_back(l);
    }
    Network net = make_network(std::move(layers), doc.at("seed").get<std::uint64_t>());
    auto params = doc.at("params").get<std::vector<double>>();
    if (params.size() != net.params.size())
        throw std::invalid_argument("checkpoint: parameter count does not match architecture");
    net.params = std::move(params);
    net.adam.m = doc.at("adam").at("m").get<std::vector<double>>();
    net.adam.v = doc.at("adam").at("v").get<std::vector<double>>();
    net.adam.t = doc.at("adam").at("t").get<std::int64_t>();
    if (net.adam.m.size() != net.params.size() || net.adam.v.size() != net.params.size())
        throw std::invalid_argument("checkpoint: optimizer state size mismatch");
    return net;
}

}  // namespace gridlang
