#include "gridlang/teacher.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

#include "gridlang/parallel.hpp"

namespace gridlang {

void ReplayMemory::insert(const Transition& t) {
    auto key = std::make_tuple(t.state.x, t.state.y, static_cast<int>(t.action));
    if (seen_.insert(key).second) long_term_.push_back(t);
    if (capacity_ == 0) return;
    if (ring_.size() < capacity_) {
        ring_.push_back(t);
    } else {
        ring_[head_] = t;
        head_ = (head_ + 1) % capacity_;
    }
    short_count_ = ring_.size();
}

std::vector<Transition> ReplayMemory::short_term() const {
    std::vector<Transition> out;
    out.reserve(short_count_);
    for (size_t i = 0; i < short_count_; ++i) out.push_back(ring_[(head_ + i) % ring_.size()]);
    return out;
}

Tensor state_input(Cell c) {
    Tensor in = Tensor::vec(2);
    in.v[0] = static_cast<double>(c.x);
    in.v[1] = static_cast<double>(c.y);
    return in;
}

namespace {

// Q rows (with caches) for every state appearing in the memory, either as
// a source state or a bootstrap source.
struct TransitionBatch {
    std::map<Cell, ForwardCache> caches;
    std::map<Cell, Tensor> q_rows;

    TransitionBatch(const Network& net, const ReplayMemory& memory) {
        auto visit_state = [&](Cell s) {
            if (q_rows.count(s)) return;
            ForwardCache cache;
            Tensor row = forward(net, state_input(s), &cache);
            caches.emplace(s, std::move(cache));
            q_rows.emplace(s, std::move(row));
        };
        auto visit = [&](const Transition& t) {
            visit_state(t.state);
            if (!t.terminal) visit_state(t.next_state);
        };
        for (const auto& t : memory.long_term()) visit(t);
        for (const auto& t : memory.short_term()) visit(t);
    }

    double residual(const Transition& t, double gamma, int* argmax_out = nullptr) const {
        double q = q_rows.at(t.state).v[static_cast<int>(t.action)];
        if (t.terminal) return q - t.reward;
        const Tensor& next = q_rows.at(t.next_state);
        int best = 0;
        for (int a = 1; a < kNumActions; ++a)
            if (next.v[a] > next.v[best]) best = a;
        if (argmax_out) *argmax_out = best;
        return q - (t.reward + gamma * next.v[best]);
    }
};

}  // namespace

double dqn_loss(const Network& net, const ReplayMemory& memory, double gamma_bellman) {
    if (memory.empty()) throw std::invalid_argument("dqn_loss: empty replay memory");
    TransitionBatch batch(net, memory);
    double sum = 0;
    auto add = [&](const Transition& t) {
        double r = batch.residual(t, gamma_bellman);
        sum += r * r;
    };
    for (const auto& t : memory.long_term()) add(t);
    for (const auto& t : memory.short_term()) add(t);
    return sum / static_cast<double>(memory.total());
}

std::vector<double> dqn_loss_gradient(const Network& net, const ReplayMemory& memory,
                                      double gamma_bellman, double* loss_out) {
    if (memory.empty()) throw std::invalid_argument("dqn_loss_gradient: empty replay memory");
    TransitionBatch batch(net, memory);
    const double inv_n = 1.0 / static_cast<double>(memory.total());

    std::map<Cell, Tensor> drow;
    auto row_of = [&](Cell s) -> Tensor& {
        auto [it, inserted] = drow.try_emplace(s, Tensor::vec(kNumActions));
        (void)inserted;
        return it->second;
    };
    double sum = 0;
    auto add = [&](const Transition& t) {
        int argmax = 0;
        double r = batch.residual(t, gamma_bellman, &argmax);
        sum += r * r;
        row_of(t.state).v[static_cast<int>(t.action)] += 2.0 * r * inv_n;
        if (!t.terminal) row_of(t.next_state).v[argmax] -= 2.0 * gamma_bellman * r * inv_n;
    };
    for (const auto& t : memory.long_term()) add(t);
    for (const auto& t : memory.short_term()) add(t);
    if (loss_out) *loss_out = sum * inv_n;

    std::vector<double> grad(net.param_count(), 0.0);
    for (auto& [state, d] : drow) backward(net, batch.caches.at(state), d, grad);
    return grad;
}

QMatrix extract_q_matrix(const Network& net, const Maze& maze) {
    const int n = maze.interior_size;
    QMatrix q(n, n, kNumActions);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            if (maze.is_wall({x, y})) continue;  // wall rows stay zero
            Tensor row = forward(net, state_input({x, y}));
            for (int a = 0; a < kNumActions; ++a) q.at(x, y, a) = row.v[a];
        }
    return q;
}

namespace {

Action greedy_action(const Network& net, Cell state) {
    Tensor row = forward(net, state_input(state));
    int best = 0;
    for (int a = 1; a < kNumActions; ++a)
        if (row.v[a] > row.v[best]) best = a;
    return static_cast<Action>(best);
}

}  // namespace

std::optional<int> greedy_rollout_length(const Network& net, const Task& task, int cap) {
    Cell state = kStart;
    for (int steps = 0; steps < cap; ++steps) {
        Transition t = step(task, state, greedy_action(net, state));
        state = t.next_state;
        if (t.terminal) return steps + 1;
    }
    return std::nullopt;
}

bool policy_is_optimal(const Network& net, const Task& task) {
    const Maze& maze = task.maze;
    auto dist = distances_to(maze, task.goal);
    const int n = maze.interior_size;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            Cell c{x, y};
            if (maze.is_wall(c) || c == task.goal) continue;
            Cell off = action_offset(greedy_action(net, c));
            Cell nb{c.x + off.x, c.y + off.y};
            if (!maze.inside(nb) || maze.is_wall(nb)) return false;  // bounce: distance unchanged
            if (dist[maze.cell_index(nb)] != dist[maze.cell_index(c)] - 1) return false;
        }
    return true;
}

TeacherResult train_teacher(const Task& task, const TeacherConfig& config) {
    Network net = make_policy_net(0, config.seed);
    ReplayMemory memory(config.short_term_capacity);
    Rng rng(mix_seed(config.seed, 0x7e));

    std::int64_t env_steps = 0;
    for (int episode = 0; episode < config.max_episodes; ++episode) {
        double frac = config.eps_decay_episodes > 0
                          ? std::min(1.0, static_cast<double>(episode) / config.eps_decay_episodes)
                          : 1.0;
        double eps = config.eps_start + (config.eps_end - config.eps_start) * frac;

        Cell state = kStart;
        for (int s = 0; s < config.episode_cap; ++s) {
            Action a = rng.uniform() < eps ? static_cast<Action>(rng.uniform_int(kNumActions))
                                           : greedy_action(net, state);
            Transition t = step(task, state, a, config.rewards);
            memory.insert(t);
            auto grad = dqn_loss_gradient(net, memory, config.gamma_bellman);
            adam_step(net, grad, config.lr, config.adam);
            ++env_steps;
            state = t.next_state;
            if (t.terminal) break;
        }

        if ((episode + 1) % config.check_every == 0 && policy_is_optimal(net, task)) {
            auto len = greedy_rollout_length(net, task, config.episode_cap);
            if (len && *len == shortest_path_length(task)) {
                QMatrix q = extract_q_matrix(net, task.maze);
                return {std::move(net), std::move(q), episode + 1, env_steps};
            }
        }
    }
    throw std::runtime_error("train_teacher: task " + std::to_string(task.task_id) +
                             " did not reach an optimal policy within " +
                             std::to_string(config.max_episodes) + " episodes");
}

std::vector<TeacherResult> train_teachers(const std::vector<Task>& tasks,
                                          const TeacherConfig& config, int threads,
                                          std::uint64_t seed_base) {
    std::vector<TeacherResult> results(tasks.size());
    parallel_for(tasks.size(), threads, [&](size_t i) {
        TeacherConfig c = config;
        c.seed = mix_seed(seed_base, static_cast<std::uint64_t>(tasks[i].task_id));
        results[i] = train_teacher(tasks[i], c);
    });
    return results;
}

}  // namespace gridlang
