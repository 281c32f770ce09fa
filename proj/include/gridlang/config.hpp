#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridlang/language.hpp"
#include "gridlang/teacher.hpp"

namespace gridlang {

// Flat run configuration. The first block mirrors the task/teacher
// hyperparameters, the second the language-training ones; the rest are
// implementation knobs the underlying methods leave unspecified.
struct Config {
    // task setup and teacher learning
    int n = 6;        // grid dimension including outer walls
    int n_tilde = 4;  // interior dimension
    double gamma_bellman = 0.99;
    double R_goal = 2.0;
    double R_wall = -0.5;
    double R_step = -0.1;
    int L = 50;  // short-term memory size

    // language training and student evaluation
    int K = 5;             // message length
    double alpha = 5e-4;   // Adam learning rate in language training
    int N_epochs = 1000;
    double gamma = -1;     // < 0: computed as (1/20) sqrt(4 n_tilde^2 / K)
    double zeta = 5.0;
    double kappa = 1.0 / 500;
    int k_budget_factor = 2;

    // teacher training (not fixed by the method; exposed here)
    double teacher_lr = 1e-3;
    double teacher_eps_start = 1.0;
    double teacher_eps_end = 0.05;
    int teacher_eps_decay_episodes = 200;
    int teacher_episode_cap = 50;
    int teacher_max_episodes = 1000;
    int teacher_check_every = 10;

    // Adam defaults (shared by all optimizers)
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    // seeds and run sizes
    std::uint64_t teacher_seed = 1000;
    std::uint64_t language_seed = 1;
    int language_seeds = 5;
    int loopback_seeds = 25;

    double resolved_gamma() const;
    RewardScheme rewards() const { return {R_step, R_wall, R_goal}; }
    TeacherConfig teacher_config() const;
    LanguageConfig language_config(bool linear_activation = false) const;

    std::string to_json() const;
    static Config from_json(const std::string& text);
    // key=value overrides, e.g. "zeta=2" or "N_epochs=100"
    void apply_override(const std::string& assignment);
};

}  // namespace gridlang
