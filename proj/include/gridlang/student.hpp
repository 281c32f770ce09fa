#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gridlang/language.hpp"

namespace gridlang {

// Softmax action distribution of the student at every non-wall state;
// wall rows are zero.
Tensor student_policy(const Network& student, const Maze& maze, const Message& m);

enum class BaselineKind { Random, SmartRandom };

// random: uniform over the four actions. smart_random: uniform over the
// actions that do not lead into a wall.
Tensor baseline_policy(BaselineKind kind, const Maze& maze);

// A message sampled uniformly from the archive among tasks != task_id.
// Deterministic in (seed, task_id) regardless of evaluation order.
Message misinform(const std::vector<Message>& archive, int task_id, std::uint64_t seed);

// Exact solve probability: goal occupancy after `budget` steps.
double solve_probability(const Tensor& policy, const Task& task, int budget);

struct SolveRow {
    std::string agent;       // informed | misinformed | random | smart_random
    std::string family;      // train | test
    std::string goal_set;    // trained | unknown
    std::string pattern_id;
    int task_id = 0;
    double solve_prob = 0;
};

struct EvalContext {
    std::string family = "train";
    std::string goal_set = "trained";
    std::string pattern_id = "all";
    int budget_factor = 2;  // budget = factor * k_opt
};

using MessageSource = std::function<Message(const Task&)>;

// Per-task solve probabilities for a message-conditioned student.
// Throws if a message length differs from the student's input.
std::vector<SolveRow> evaluate_student(const std::string& agent, const Network& student,
                                       const std::vector<Task>& tasks,
                                       const MessageSource& message_source,
                                       const EvalContext& ctx);

std::vector<SolveRow> evaluate_baseline(BaselineKind kind, const std::vector<Task>& tasks,
                                        const EvalContext& ctx);

double mean_solve_rate(const std::vector<SolveRow>& rows);

// Goal cells a student is trained on; everything else is "unknown".
struct GoalPattern {
    std::string pattern_id;
    std::vector<Cell> trained_goals;
    bool contains(Cell goal) const;
};

std::vector<Task> filter_by_pattern(const std::vector<Task>& tasks, const GoalPattern& pattern,
                                    bool trained_goals);

struct FrozenStudentConfig {
    double gamma = -1;  // < 0: (1/20) sqrt(4 n^2 / K)
    double lr = 5e-4;
    int epochs = 1000;
    Activation hidden_act = Activation::Relu;
    AdamConfig adam;
    std::uint64_t seed = 1;
};

struct FrozenStudentRun {
    Network student;
    std::vector<LossBreakdown> curve;  // goal_finding only
};

// Trains a fresh student against the goal-finding loss on frozen messages,
// restricted to tasks whose goals lie in the pattern. The message archive
// (and therefore the autoencoder behind it) is never touched.
FrozenStudentRun train_student_frozen(const std::vector<Message>& messages,
                                      const std::vector<Task>& tasks, const GoalPattern& pattern,
                                      const FrozenStudentConfig& config);

}  // namespace gridlang
