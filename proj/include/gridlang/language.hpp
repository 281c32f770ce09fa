#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "gridlang/diffnet.hpp"
#include "gridlang/gridworld.hpp"
#include "gridlang/teacher.hpp"

namespace gridlang {

// The latent "word" for one task: a length-K real vector.
struct Message {
    std::vector<double> m;
    int task_id = -1;
};

struct LossBreakdown {
    double reconstruction = 0;  // (1-kappa) * ||Q' - Q||_2
    double sparsity = 0;        // kappa * ||m||_2
    double goal_finding = 0;    // Eq.-5-style term, 0 when feedback is off
    double compound = 0;        // reconstruction + sparsity (+ zeta * goal_finding)
};

// Encoder and decoder halves of the sparse autoencoder. Parameters and
// optimizer state live per half; updates always run in lockstep.
struct Sae {
    Network encoder;
    Network decoder;
    int param_count() const { return encoder.param_count() + decoder.param_count(); }
};

// Architecture for an interior of n x n states and messages of length K:
// input bias, two 2x2 convolutions (10 filters each), dense to K (the
// message layer: linear, with bias), then the mirrored decoder.
Sae make_sae(int interior_size, int message_len, std::uint64_t seed,
             Activation hidden_act = Activation::Relu);

Message encode(const Sae& sae, const QMatrix& q, int task_id = -1);
Tensor decode(const Sae& sae, const Message& m);

// Loss of the plain autoencoder. kappa must lie in [0, 1].
LossBreakdown sae_loss(const QMatrix& q, const Tensor& q_prime, const Message& m, double kappa);

// State-occupancy distribution after k steps of the policy, starting from
// a point mass on the start cell. Bounces keep the agent in place, the
// goal is absorbing, wall cells carry probability zero. Policy rows of
// non-wall states must sum to one.
Tensor occupancy_after_k(const Tensor& policy, const Task& task, int k);

// Goal-occupancy probability after k steps, plus its gradient w.r.t. every
// policy entry (zero on wall and goal rows).
struct OccupancyGrad {
    double goal_prob = 0;
    Tensor d_policy;
};
OccupancyGrad occupancy_goal_grad(const Tensor& policy, const Task& task, int k);

// (1-gamma)(1 - P[s_k = goal])^4 + gamma ||outputs||_2 / sqrt(4 n^2), with
// k = the task's shortest-path length and the policy obtained by softmaxing
// the raw outputs per state.
double goal_finding_loss(const Tensor& student_outputs, const Task& task, double gamma);

struct GoalFindingGrad {
    double loss = 0;
    double goal_prob = 0;
    Tensor d_outputs;  // gradient w.r.t. the raw (pre-softmax) outputs
};
GoalFindingGrad goal_finding_loss_grad(const Tensor& student_outputs, const Task& task,
                                       double gamma, int k);

// Raw student outputs at every state for one message (walls included).
Tensor student_outputs(const Network& student, const Maze& maze, const Message& m,
                       std::vector<ForwardCache>* caches = nullptr);

struct LanguageConfig {
    int message_len = 5;
    double kappa = 1.0 / 500;
    double zeta = 5.0;
    double gamma = -1;  // < 0: use (1/20) sqrt(4 n^2 / K)
    double lr = 5e-4;
    int epochs = 1000;
    Activation hidden_act = Activation::Relu;
    AdamConfig adam;
    std::uint64_t seed = 1;

    double resolved_gamma(int interior_size) const;
};

struct LanguageRun {
    Sae sae;
    Network student;
    // curve[0] is the evaluation before any update; curve[e] for e >= 1 is
    // the mean per-task loss during epoch e.
    std::vector<LossBreakdown> curve;
    std::vector<Message> messages;  // final-encoder message per task
};

// Trains the autoencoder over the given tasks (one gradient step per task
// per epoch, fixed order). With feedback, the compound loss of the SAE and
// the student's goal-finding term are optimized jointly; without it, only
// the SAE updates and the student stays at its initialization.
LanguageRun train_language(const std::vector<Task>& tasks, const std::map<int, QMatrix>& teacher_qs,
                           bool feedback, const LanguageConfig& config);

std::string sae_to_json(const Sae& sae);
Sae sae_from_json(const std::string& text);

}  // namespace gridlang
