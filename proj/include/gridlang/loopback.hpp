#pragma once

#include <vector>

#include "gridlang/student.hpp"

namespace gridlang {

// The student's own task information: its raw outputs at every state under
// the task's message, with wall rows zeroed like teacher Q-matrices. When
// `softmaxed` is set, rows carry action probabilities instead.
std::vector<std::pair<int, Tensor>> student_q_matrices(const Network& student,
                                                       const std::vector<Message>& messages,
                                                       const std::vector<Task>& tasks,
                                                       bool softmaxed = false);

// Re-encodes the student's task information through the frozen autoencoder,
// producing one degraded message per task.
std::vector<Message> degrade(const Sae& sae_frozen,
                             const std::vector<std::pair<int, Tensor>>& student_qs);

// Survival filter: the language survives iff the informed rate strictly
// beats both the misinformed rate and the plain random walker's.
bool survives(double informed_rate, double misinformed_rate, double random_rate);

struct SurvivalReport {
    std::uint64_t language_seed = 0;
    double informed = 0;
    double misinformed = 0;
    double random = 0;
    double smart_random = 0;
    bool survived = false;
};

}  // namespace gridlang
