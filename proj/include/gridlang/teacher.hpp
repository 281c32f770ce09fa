#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <tuple>
#include <vector>

#include "gridlang/diffnet.hpp"
#include "gridlang/gridworld.hpp"

namespace gridlang {

// State-action value tensor, interior_size x interior_size x 4
// (state x, state y, action channel). Wall rows are zeroed on extraction.
using QMatrix = Tensor;

// Long-term memory holds every unique (state, action) transition seen;
// short-term memory is a ring of the last L transitions, so recent
// transitions are counted again in the loss.
class ReplayMemory {
public:
    explicit ReplayMemory(int short_term_capacity = 50) : capacity_(short_term_capacity) {}

    void insert(const Transition& t);

    const std::vector<Transition>& long_term() const { return long_term_; }
    // Ring contents in insertion order, oldest first.
    std::vector<Transition> short_term() const;
    size_t total() const { return long_term_.size() + short_count_; }
    bool empty() const { return total() == 0; }

private:
    std::vector<Transition> long_term_;
    std::set<std::tuple<int, int, int>> seen_;  // (x, y, action)
    std::vector<Transition> ring_;
    size_t head_ = 0, short_count_ = 0;
    size_t capacity_;
};

// Mean squared Bellman residual over long-term plus short-term transitions
// (short-term entries count again). The bootstrap term is dropped on
// terminal transitions.
double dqn_loss(const Network& net, const ReplayMemory& memory, double gamma_bellman);

// Exact gradient of dqn_loss, i.e. through both Q(s,a) and the bootstrap
// max. Minimizing the residual itself keeps the update stable without a
// target network.
std::vector<double> dqn_loss_gradient(const Network& net, const ReplayMemory& memory,
                                      double gamma_bellman, double* loss_out = nullptr);

struct TeacherConfig {
    double gamma_bellman = 0.99;
    RewardScheme rewards;
    int short_term_capacity = 50;
    double lr = 1e-3;
    double eps_start = 1.0;
    double eps_end = 0.05;
    int eps_decay_episodes = 200;
    int episode_cap = 50;
    int max_episodes = 1000;
    int check_every = 10;
    AdamConfig adam;
    std::uint64_t seed = 0;
};

struct TeacherResult {
    Network net;
    QMatrix q;
    int episodes = 0;
    std::int64_t env_steps = 0;
};

// Network input is the raw state coordinate pair.
Tensor state_input(Cell c);

// Evaluates the network at every interior coordinate and zeroes wall rows.
QMatrix extract_q_matrix(const Network& net, const Maze& maze);

// Greedy rollout from the start; returns the number of steps to reach the
// goal, or nullopt if the cap is hit first.
std::optional<int> greedy_rollout_length(const Network& net, const Task& task, int cap);

// True iff at every non-wall, non-goal state the argmax action strictly
// decreases the BFS distance to the goal.
bool policy_is_optimal(const Network& net, const Task& task);

// Deep-Q training until the greedy policy is optimal everywhere. One
// optimizer step per environment step. Throws (naming the task) if the
// episode budget runs out first.
TeacherResult train_teacher(const Task& task, const TeacherConfig& config);

// Trains all tasks, parallelized; results keep task order.
std::vector<TeacherResult> train_teachers(const std::vector<Task>& tasks,
                                          const TeacherConfig& config, int threads,
                                          std::uint64_t seed_base);

}  // namespace gridlang
