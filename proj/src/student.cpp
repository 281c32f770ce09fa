#include "gridlang/student.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace gridlang {

Tensor student_policy(const Network& student, const Maze& maze, const Message& m) {
    if (2 + static_cast<int>(m.m.size()) != student.input_shape().numel())
        throw std::invalid_argument("student_policy: message length does not match student input");
    Tensor raw = student_outputs(student, maze, m);
    const int n = maze.interior_size;
    Tensor policy(n, n, kNumActions);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            if (maze.is_wall({x, y})) continue;
            double row[kNumActions];
            for (int a = 0; a < kNumActions; ++a) row[a] = raw.at(x, y, a);
            auto p = softmax(std::span<const double>(row, kNumActions));
            for (int a = 0; a < kNumActions; ++a) policy.at(x, y, a) = p[a];
        }
    return policy;
}

Tensor baseline_policy(BaselineKind kind, const Maze& maze) {
    const int n = maze.interior_size;
    Tensor policy(n, n, kNumActions);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            Cell c{x, y};
            if (maze.is_wall(c)) continue;
            if (kind == BaselineKind::Random) {
                for (int a = 0; a < kNumActions; ++a) policy.at(x, y, a) = 0.25;
                continue;
            }
            bool legal[kNumActions];
            int count = 0;
            for (int a = 0; a < kNumActions; ++a) {
                Cell off = action_offset(static_cast<Action>(a));
                Cell nb{c.x + off.x, c.y + off.y};
                legal[a] = maze.inside(nb) && !maze.is_wall(nb);
                count += legal[a];
            }
            if (count == 0) throw std::logic_error("baseline_policy: isolated cell");
            for (int a = 0; a < kNumActions; ++a)
                if (legal[a]) policy.at(x, y, a) = 1.0 / count;
        }
    return policy;
}

Message misinform(const std::vector<Message>& archive, int task_id, std::uint64_t seed) {
    if (archive.size() < 2) throw std::invalid_argument("misinform: archive needs at least 2 messages");
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(task_id) + 0x5151));
    for (;;) {
        const Message& pick = archive[rng.uniform_int(static_cast<int>(archive.size()))];
        if (pick.task_id != task_id) return pick;
    }
}

double solve_probability(const Tensor& policy, const Task& task, int budget) {
    Tensor rho = occupancy_after_k(policy, task, budget);
    return rho.at(task.goal.x, task.goal.y, 0);
}

std::vector<SolveRow> evaluate_student(const std::string& agent, const Network& student,
                                       const std::vector<Task>& tasks,
                                       const MessageSource& message_source,
                                       const EvalContext& ctx) {
    std::vector<SolveRow> rows;
    rows.reserve(tasks.size());
    for (const Task& task : tasks) {
        Message m = message_source(task);
        Tensor policy = student_policy(student, task.maze, m);
        int budget = ctx.budget_factor * shortest_path_length(task);
        rows.push_back({agent, ctx.family, ctx.goal_set, ctx.pattern_id, task.task_id,
                        solve_probability(policy, task, budget)});
    }
    return rows;
}

std::vector<SolveRow> evaluate_baseline(BaselineKind kind, const std::vector<Task>& tasks,
                                        const EvalContext& ctx) {
    std::vector<SolveRow> rows;
    rows.reserve(tasks.size());
    const char* agent = kind == BaselineKind::Random ? "random" : "smart_random";
    for (const Task& task : tasks) {
        Tensor policy = baseline_policy(kind, task.maze);
        int budget = ctx.budget_factor * shortest_path_length(task);
        rows.push_back({agent, ctx.family, ctx.goal_set, ctx.pattern_id, task.task_id,
                        solve_probability(policy, task, budget)});
    }
    return rows;
}

double mean_solve_rate(const std::vector<SolveRow>& rows) {
    if (rows.empty()) throw std::invalid_argument("mean_solve_rate: no rows");
    double s = 0;
    for (const auto& r : rows) s += r.solve_prob;
    return s / static_cast<double>(rows.size());
}

bool GoalPattern::contains(Cell goal) const {
    return std::find(trained_goals.begin(), trained_goals.end(), goal) != trained_goals.end();
}

std::vector<Task> filter_by_pattern(const std::vector<Task>& tasks, const GoalPattern& pattern,
                                    bool trained_goals) {
    std::vector<Task> out;
    for (const Task& t : tasks)
        if (pattern.contains(t.goal) == trained_goals) out.push_back(t);
    return out;
}

FrozenStudentRun train_student_frozen(const std::vector<Message>& messages,
                                      const std::vector<Task>& tasks, const GoalPattern& pattern,
                                      const FrozenStudentConfig& config) {
    std::vector<Task> train_tasks = filter_by_pattern(tasks, pattern, true);
    if (train_tasks.empty())
        throw std::invalid_argument("train_student_frozen: pattern matches no tasks");

    std::map<int, const Message*> by_id;
    for (const Message& m : messages) by_id[m.task_id] = &m;
    for (const Task& t : train_tasks)
        if (!by_id.count(t.task_id))
            throw std::invalid_argument("train_student_frozen: missing message for task " +
                                        std::to_string(t.task_id));

    const int n = train_tasks.front().maze.interior_size;
    const int klen = static_cast<int>(by_id.begin()->second->m.size());
    const double gamma = config.gamma >= 0
                             ? config.gamma
                             : 0.05 * std::sqrt(static_cast<double>(kNumActions) * n * n / klen);

    FrozenStudentRun run;
    run.student = make_policy_net(klen, mix_seed(config.seed, 21), config.hidden_act);

    std::vector<int> k_opts;
    for (const Task& t : train_tasks) k_opts.push_back(shortest_path_length(t));

    std::vector<double> grad(run.student.param_count());
    std::vector<ForwardCache> caches;
    for (int epoch = 0; epoch <= config.epochs; ++epoch) {
        const bool update = epoch > 0;
        double mean_loss = 0;
        for (size_t ti = 0; ti < train_tasks.size(); ++ti) {
            const Task& task = train_tasks[ti];
            const Message& m = *by_id.at(task.task_id);
            Tensor outputs = student_outputs(run.student, task.maze, m, update ? &caches : nullptr);
            GoalFindingGrad gl = goal_finding_loss_grad(outputs, task, gamma, k_opts[ti]);
            mean_loss += gl.loss;
            if (!update) continue;

            std::fill(grad.begin(), grad.end(), 0.0);
            Tensor drow = Tensor::vec(kNumActions);
            for (int x = 0; x < n; ++x)
                for (int y = 0; y < n; ++y) {
                    for (int a = 0; a < kNumActions; ++a) drow.v[a] = gl.d_outputs.at(x, y, a);
                    backward(run.student, caches[static_cast<size_t>(x) * n + y], drow, grad);
                }
            adam_step(run.student, grad, config.lr, config.adam);
        }
        LossBreakdown l;
        l.goal_finding = mean_loss / static_cast<double>(train_tasks.size());
        l.compound = l.goal_finding;
        run.curve.push_back(l);
    }
    return run;
}

}  // namespace gridlang
