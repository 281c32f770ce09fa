#include "gridlang/language.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace gridlang {

namespace {
constexpr double kNormFloor = 1e-12;
}

Sae make_sae(int interior_size, int message_len, std::uint64_t seed, Activation hidden_act) {
    const int n = interior_size;
    Shape q_shape{n, n, kNumActions};
    Shape mid{n + 2, n + 2, 10};

    std::vector<LayerSpec> enc{
        bias_layer(q_shape),
        conv2x2_layer(q_shape, 10, hidden_act),
        conv2x2_layer({n + 1, n + 1, 10}, 10, hidden_act),
        // message layer: linear activation, bias kept
        dense_layer(mid, {message_len, 1, 1}, Activation::Linear),
    };
    std::vector<LayerSpec> dec{
        dense_layer({message_len, 1, 1}, mid, hidden_act),
        deconv2x2_layer(mid, 10, hidden_act),
        deconv2x2_layer({n + 1, n + 1, 10}, kNumActions, Activation::Linear),
        bias_layer(q_shape),
    };
    return {make_network(std::move(enc), mix_seed(seed, 0)),
            make_network(std::move(dec), mix_seed(seed, 1))};
}

Message encode(const Sae& sae, const QMatrix& q, int task_id) {
    Tensor out = forward(sae.encoder, q);
    return {std::move(out.v), task_id};
}

Tensor decode(const Sae& sae, const Message& m) {
    Tensor in = Tensor::vec(static_cast<int>(m.m.size()));
    in.v = m.m;
    return forward(sae.decoder, in);
}

LossBreakdown sae_loss(const QMatrix& q, const Tensor& q_prime, const Message& m, double kappa) {
    if (kappa < 0.0 || kappa > 1.0) throw std::invalid_argument("sae_loss: kappa must lie in [0, 1]");
    if (!q.same_shape(q_prime)) throw std::invalid_argument("sae_loss: shape mismatch");
    LossBreakdown l;
    l.reconstruction = (1.0 - kappa) * l2_norm(q_prime - q);
    l.sparsity = kappa * l2_norm(m.m);
    l.compound = l.reconstruction + l.sparsity;
    return l;
}

namespace {

void check_policy(const Tensor& policy, const Task& task) {
    const Maze& maze = task.maze;
    const int n = maze.interior_size;
    if (policy.h != n || policy.w != n || policy.c != kNumActions)
        throw std::invalid_argument("occupancy: policy shape mismatch");
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            if (maze.is_wall({x, y})) continue;
            double sum = 0;
            for (int a = 0; a < kNumActions; ++a) {
                double p = policy.at(x, y, a);
                if (p < -1e-12) throw std::invalid_argument("occupancy: negative action probability");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw std::invalid_argument("occupancy: action probabilities do not sum to 1");
        }
}

// Successor of (state, action): bounces resolve to the state itself.
Cell successor(const Maze& maze, Cell c, int a) {
    Cell off = action_offset(static_cast<Action>(a));
    Cell nb{c.x + off.x, c.y + off.y};
    return (maze.inside(nb) && !maze.is_wall(nb)) ? nb : c;
}

Tensor propagate_once(const Tensor& rho, const Tensor& policy, const Task& task) {
    const Maze& maze = task.maze;
    const int n = maze.interior_size;
    Tensor next(n, n, 1);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            Cell c{x, y};
            double mass = rho.at(x, y, 0);
            if (mass == 0.0 || maze.is_wall(c)) continue;
            if (c == task.goal) {
                next.at(x, y, 0) += mass;  // absorbing
                continue;
            }
            for (int a = 0; a < kNumActions; ++a) {
                Cell s = successor(maze, c, a);
                next.at(s.x, s.y, 0) += mass * policy.at(x, y, a);
            }
        }
    return next;
}

}  // namespace

Tensor occupancy_after_k(const Tensor& policy, const Task& task, int k) {
    check_policy(policy, task);
    const int n = task.maze.interior_size;
    Tensor rho(n, n, 1);
    rho.at(kStart.x, kStart.y, 0) = 1.0;
    for (int t = 0; t < k; ++t) rho = propagate_once(rho, policy, task);
    return rho;
}

OccupancyGrad occupancy_goal_grad(const Tensor& policy, const Task& task, int k) {
    const Maze& maze = task.maze;
    const int n = maze.interior_size;
    std::vector<Tensor> rho(k + 1);
    rho[0] = Tensor(n, n, 1);
    rho[0].at(kStart.x, kStart.y, 0) = 1.0;
    for (int t = 0; t < k; ++t) rho[t + 1] = propagate_once(rho[t], policy, task);

    OccupancyGrad out;
    out.goal_prob = rho[k].at(task.goal.x, task.goal.y, 0);
    out.d_policy = Tensor(n, n, kNumActions);

    // Adjoint sweep: bar[t][s] = d goal_prob / d rho_t[s].
    Tensor bar(n, n, 1);
    bar.at(task.goal.x, task.goal.y, 0) = 1.0;
    for (int t = k - 1; t >= 0; --t) {
        Tensor prev(n, n, 1);
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y) {
                Cell c{x, y};
                if (maze.is_wall(c)) continue;
                if (c == task.goal) {
                    prev.at(x, y, 0) = bar.at(x, y, 0);
                    continue;
                }
                double acc = 0;
                double mass = rho[t].at(x, y, 0);
                for (int a = 0; a < kNumActions; ++a) {
                    Cell s = successor(maze, c, a);
                    double b = bar.at(s.x, s.y, 0);
                    acc += policy.at(x, y, a) * b;
                    out.d_policy.at(x, y, a) += mass * b;
                }
                prev.at(x, y, 0) = acc;
            }
        bar = std::move(prev);
    }
    // Policy rows at the goal never act.
    for (int a = 0; a < kNumActions; ++a) out.d_policy.at(task.goal.x, task.goal.y, a) = 0.0;
    return out;
}

Tensor student_outputs(const Network& student, const Maze& maze, const Message& m,
                       std::vector<ForwardCache>* caches) {
    const int n = maze.interior_size;
    const int klen = static_cast<int>(m.m.size());
    Tensor out(n, n, kNumActions);
    if (caches) caches->assign(static_cast<size_t>(n) * n, {});
    Tensor in = Tensor::vec(2 + klen);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            in.v[0] = x;
            in.v[1] = y;
            for (int i = 0; i < klen; ++i) in.v[2 + i] = m.m[i];
            ForwardCache* cache = caches ? &(*caches)[static_cast<size_t>(x) * n + y] : nullptr;
            Tensor row = forward(student, in, cache);
            for (int a = 0; a < kNumActions; ++a) out.at(x, y, a) = row.v[a];
        }
    return out;
}

namespace {

Tensor policy_from_outputs(const Tensor& outputs, const Maze& maze) {
    const int n = maze.interior_size;
    Tensor policy(n, n, kNumActions);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            if (maze.is_wall({x, y})) continue;
            double row[kNumActions];
            for (int a = 0; a < kNumActions; ++a) row[a] = outputs.at(x, y, a);
            auto p = softmax(std::span<const double>(row, kNumActions));
            for (int a = 0; a < kNumActions; ++a) policy.at(x, y, a) = p[a];
        }
    return policy;
}

}  // namespace

GoalFindingGrad goal_finding_loss_grad(const Tensor& student_outputs_raw, const Task& task,
                                       double gamma, int k) {
    const Maze& maze = task.maze;
    const int n = maze.interior_size;
    Tensor policy = policy_from_outputs(student_outputs_raw, maze);
    OccupancyGrad occ = occupancy_goal_grad(policy, task, k);

    GoalFindingGrad out;
    out.goal_prob = occ.goal_prob;
    double miss = 1.0 - occ.goal_prob;
    double norm = std::max(l2_norm(student_outputs_raw), kNormFloor);
    double denom = std::sqrt(static_cast<double>(kNumActions) * n * n);
    out.loss = (1.0 - gamma) * miss * miss * miss * miss + gamma * norm / denom;

    out.d_outputs = Tensor(n, n, kNumActions);
    const double miss_coeff = -(1.0 - gamma) * 4.0 * miss * miss * miss;
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            if (!maze.is_wall({x, y})) {
                // chain d goal_prob / d policy through the per-state softmax
                double dot = 0;
                for (int b = 0; b < kNumActions; ++b)
                    dot += occ.d_policy.at(x, y, b) * policy.at(x, y, b);
                for (int a = 0; a < kNumActions; ++a) {
                    double pa = policy.at(x, y, a);
                    out.d_outputs.at(x, y, a) =
                        miss_coeff * pa * (occ.d_policy.at(x, y, a) - dot);
                }
            }
            for (int a = 0; a < kNumActions; ++a)
                out.d_outputs.at(x, y, a) +=
                    gamma * student_outputs_raw.at(x, y, a) / (norm * denom);
        }
    return out;
}

double goal_finding_loss(const Tensor& student_outputs_raw, const Task& task, double gamma) {
    return goal_finding_loss_grad(student_outputs_raw, task, gamma, shortest_path_length(task)).loss;
}

double LanguageConfig::resolved_gamma(int interior_size) const {
    if (gamma >= 0) return gamma;
    return 0.05 * std::sqrt(static_cast<double>(kNumActions) * interior_size * interior_size /
                            message_len);
}

LanguageRun train_language(const std::vector<Task>& tasks, const std::map<int, QMatrix>& teacher_qs,
                           bool feedback, const LanguageConfig& config) {
    if (tasks.empty()) throw std::invalid_argument("train_language: no tasks");
    const int n = tasks.front().maze.interior_size;
    for (const Task& t : tasks)
        if (!teacher_qs.count(t.task_id))
            throw std::invalid_argument("train_language: missing teacher Q-matrix for task " +
                                        std::to_string(t.task_id));

    LanguageRun run;
    run.sae = make_sae(n, config.message_len, mix_seed(config.seed, 10), config.hidden_act);
    run.student = make_policy_net(config.message_len, mix_seed(config.seed, 11), config.hidden_act);

    const double gamma = config.resolved_gamma(n);
    std::vector<int> k_opts;
    k_opts.reserve(tasks.size());
    for (const Task& t : tasks) k_opts.push_back(shortest_path_length(t));

    std::vector<double> g_enc(run.sae.encoder.param_count());
    std::vector<double> g_dec(run.sae.decoder.param_count());
    std::vector<double> g_stu(run.student.param_count());
    std::vector<ForwardCache> stu_caches;

    // epoch 0: evaluation only; epochs 1..N: one update per task
    for (int epoch = 0; epoch <= config.epochs; ++epoch) {
        const bool update = epoch > 0;
        LossBreakdown mean;
        for (size_t ti = 0; ti < tasks.size(); ++ti) {
            const Task& task = tasks[ti];
            const QMatrix& q = teacher_qs.at(task.task_id);

            ForwardCache ecache, dcache;
            Tensor msg = forward(run.sae.encoder, q, &ecache);
            Tensor qp = forward(run.sae.decoder, msg, &dcache);

            LossBreakdown l;
            double rec_norm = l2_norm(qp - q);
            double msg_norm = l2_norm(msg);
            l.reconstruction = (1.0 - config.kappa) * rec_norm;
            l.sparsity = config.kappa * msg_norm;
            l.compound = l.reconstruction + l.sparsity;

            GoalFindingGrad gl;
            Message m{msg.v, task.task_id};
            if (feedback) {
                Tensor outputs = student_outputs(run.student, task.maze, m,
                                                 update ? &stu_caches : nullptr);
                gl = goal_finding_loss_grad(outputs, task, gamma, k_opts[ti]);
                l.goal_finding = gl.loss;
                l.compound += config.zeta * gl.loss;
            }

            mean.reconstruction += l.reconstruction;
            mean.sparsity += l.sparsity;
            mean.goal_finding += l.goal_finding;
            mean.compound += l.compound;
            if (!update) continue;

            std::fill(g_enc.begin(), g_enc.end(), 0.0);
            std::fill(g_dec.begin(), g_dec.end(), 0.0);

            Tensor d_qp = qp - q;
            double rs = (1.0 - config.kappa) / std::max(rec_norm, kNormFloor);
            for (double& x : d_qp.v) x *= rs;
            Tensor d_msg = backward(run.sae.decoder, dcache, d_qp, g_dec);

            double ms = config.kappa / std::max(msg_norm, kNormFloor);
            for (int i = 0; i < d_msg.numel(); ++i) d_msg.v[i] += ms * msg.v[i];

            if (feedback) {
                std::fill(g_stu.begin(), g_stu.end(), 0.0);
                Tensor drow = Tensor::vec(kNumActions);
                for (int x = 0; x < n; ++x)
                    for (int y = 0; y < n; ++y) {
                        for (int a = 0; a < kNumActions; ++a)
                            drow.v[a] = config.zeta * gl.d_outputs.at(x, y, a);
                        Tensor din = backward(run.student,
                                              stu_caches[static_cast<size_t>(x) * n + y], drow,
                                              g_stu);
                        for (int i = 0; i < config.message_len; ++i) d_msg.v[i] += din.v[2 + i];
                    }
                adam_step(run.student, g_stu, config.lr, config.adam);
            }

            backward(run.sae.encoder, ecache, d_msg, g_enc);
            adam_step(run.sae.encoder, g_enc, config.lr, config.adam);
            adam_step(run.sae.decoder, g_dec, config.lr, config.adam);
        }
        const double inv = 1.0 / static_cast<double>(tasks.size());
        mean.reconstruction *= inv;
        mean.sparsity *= inv;
        mean.goal_finding *= inv;
        mean.compound *= inv;
        run.curve.push_back(mean);
    }

    run.messages.reserve(tasks.size());
    for (const Task& t : tasks)
        run.messages.push_back(encode(run.sae, teacher_qs.at(t.task_id), t.task_id));
    return run;
}

std::string sae_to_json(const Sae& sae) {
    nlohmann::json doc{{"version", 1},
                       {"encoder", nlohmann::json::parse(checkpoint_to_json(sae.encoder))},
                       {"decoder", nlohmann::json::parse(checkpoint_to_json(sae.decoder))}};
    return doc.dump();
}

Sae sae_from_json(const std::string& text) {
    auto doc = nlohmann::json::parse(text);
    if (doc.at("version").get<int>() != 1)
        throw std::invalid_argument("sae checkpoint: unsupported version");
    return {network_from_json(doc.at("encoder").dump()),
            network_from_json(doc.at("decoder").dump())};
}

}  // namespace gridlang
