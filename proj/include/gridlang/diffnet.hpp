#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gridlang/tensor.hpp"

namespace gridlang {

enum class Activation { Relu, Linear };

// The three parametric layer kinds plus a free-standing additive bias used
// on the autoencoder's raw input/output tensors.
enum class LayerKind { Dense, Conv2x2, Deconv2x2, Bias };

struct Shape {
    int h = 1, w = 1, c = 1;
    int numel() const { return h * w * c; }
    bool operator==(const Shape&) const = default;
};

struct LayerSpec {
    LayerKind kind;
    Activation act;
    Shape in, out;

    int weight_count() const;
    int bias_count() const;
    int param_count() const { return weight_count() + bias_count(); }
};

// Dense layers flatten their input; `out` may carry a spatial shape so the
// next layer can reinterpret the vector (used decoder-side).
LayerSpec dense_layer(Shape in, Shape out, Activation act);
// 2x2 kernel, stride 1, zero padding 1: spatial size grows by one.
LayerSpec conv2x2_layer(Shape in, int out_channels, Activation act);
// Adjoint-shaped map of conv2x2: spatial size shrinks by one.
LayerSpec deconv2x2_layer(Shape in, int out_channels, Activation act);
LayerSpec bias_layer(Shape shape, Activation act = Activation::Linear);

struct AdamState {
    std::vector<double> m, v;
    std::int64_t t = 0;
};

// All trainable parameters of one network plus optimizer state and the
// seed that produced the initialization.
struct Network {
    std::vector<LayerSpec> layers;
    std::vector<double> params;        // flat, per layer: weights then biases
    std::vector<int> layer_offsets;    // offset of each layer's params
    AdamState adam;
    std::uint64_t seed = 0;

    int param_count() const { return static_cast<int>(params.size()); }
    Shape input_shape() const { return layers.front().in; }
    Shape output_shape() const { return layers.back().out; }
};

// He-style uniform fan-in initialization of the weights (biases start at
// zero), drawn deterministically from `seed`.
Network make_network(std::vector<LayerSpec> layers, std::uint64_t seed);

// Teacher/student multilayer perceptron: (2 + message_len) -> 10 -> 20 ->
// 20 -> 4, ReLU hidden layers, linear output.
Network make_policy_net(int message_len, std::uint64_t seed,
                        Activation hidden_act = Activation::Relu);

struct ForwardCache {
    std::vector<Tensor> inputs;    // input of each layer
    std::vector<Tensor> preacts;   // pre-activation of each layer
    Tensor output;
};

// Evaluates the network. When `cache` is given, stores everything backward
// needs. Throws on input shape mismatch.
Tensor forward(const Network& net, const Tensor& input, ForwardCache* cache = nullptr);

// Exact reverse-mode gradient. Accumulates dL/dparams into `param_grad`
// (which must have param_count entries) and returns dL/dinput.
Tensor backward(const Network& net, const ForwardCache& cache, const Tensor& dloss_dout,
                std::span<double> param_grad);

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Standard bias-corrected Adam update; increments the step counter.
// Throws if the gradient contains non-finite entries.
void adam_step(Network& net, std::span<const double> grad, double lr, const AdamConfig& cfg = {});

// Numerically stable softmax (max subtraction).
std::vector<double> softmax(std::span<const double> values);

// Versioned checkpoint document; the params array round-trips bit-exactly.
std::string checkpoint_to_json(const Network& net);
Network network_from_json(const std::string& text);

}  // namespace gridlang
