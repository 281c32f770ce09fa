#include "gridlang/loopback.hpp"

#include <map>
#include <stdexcept>
#include <string>

namespace gridlang {

std::vector<std::pair<int, Tensor>> student_q_matrices(const Network& student,
                                                       const std::vector<Message>& messages,
                                                       const std::vector<Task>& tasks,
                                                       bool softmaxed) {
    std::map<int, const Message*> by_id;
    for (const Message& m : messages) by_id[m.task_id] = &m;

    std::vector<std::pair<int, Tensor>> out;
    out.reserve(tasks.size());
    for (const Task& task : tasks) {
        auto it = by_id.find(task.task_id);
        if (it == by_id.end())
            throw std::invalid_argument("student_q_matrices: missing message for task " +
                                        std::to_string(task.task_id));
        Tensor q = softmaxed ? student_policy(student, task.maze, *it->second)
                             : student_outputs(student, task.maze, *it->second);
        for (const Cell& wall : task.maze.walls)
            for (int a = 0; a < kNumActions; ++a) q.at(wall.x, wall.y, a) = 0.0;
        out.emplace_back(task.task_id, std::move(q));
    }
    return out;
}

std::vector<Message> degrade(const Sae& sae_frozen,
                             const std::vector<std::pair<int, Tensor>>& student_qs) {
    std::vector<Message> out;
    out.reserve(student_qs.size());
    for (const auto& [task_id, q] : student_qs) out.push_back(encode(sae_frozen, q, task_id));
    return out;
}

bool survives(double informed_rate, double misinformed_rate, double random_rate) {
    return informed_rate > misinformed_rate && informed_rate > random_rate;
}

}  // namespace gridlang
