#include "gridlang/config.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace gridlang {

using nlohmann::json;

double Config::resolved_gamma() const {
    if (gamma >= 0) return gamma;
    return 0.05 * std::sqrt(4.0 * n_tilde * n_tilde / K);
}

TeacherConfig Config::teacher_config() const {
    TeacherConfig c;
    c.gamma_bellman = gamma_bellman;
    c.rewards = rewards();
    c.short_term_capacity = L;
    c.lr = teacher_lr;
    c.eps_start = teacher_eps_start;
    c.eps_end = teacher_eps_end;
    c.eps_decay_episodes = teacher_eps_decay_episodes;
    c.episode_cap = teacher_episode_cap;
    c.max_episodes = teacher_max_episodes;
    c.check_every = teacher_check_every;
    c.adam = {adam_beta1, adam_beta2, adam_eps};
    return c;
}

LanguageConfig Config::language_config(bool linear_activation) const {
    LanguageConfig c;
    c.message_len = K;
    c.kappa = kappa;
    c.zeta = zeta;
    c.gamma = gamma;
    c.lr = alpha;
    c.epochs = N_epochs;
    c.hidden_act = linear_activation ? Activation::Linear : Activation::Relu;
    c.adam = {adam_beta1, adam_beta2, adam_eps};
    c.seed = language_seed;
    return c;
}

namespace {

template <typename T>
void read_field(const json& doc, const char* key, T& out) {
    if (doc.contains(key)) out = doc.at(key).get<T>();
}

}  // namespace

std::string Config::to_json() const {
    json doc{
        {"n", n},
        {"n_tilde", n_tilde},
        {"gamma_bellman", gamma_bellman},
        {"R_goal", R_goal},
        {"R_wall", R_wall},
        {"R_step", R_step},
        {"L", L},
        {"K", K},
        {"alpha", alpha},
        {"N_epochs", N_epochs},
        {"gamma", resolved_gamma()},
        {"zeta", zeta},
        {"kappa", kappa},
        {"k_budget_factor", k_budget_factor},
        {"teacher_lr", teacher_lr},
        {"teacher_eps_start", teacher_eps_start},
        {"teacher_eps_end", teacher_eps_end},
        {"teacher_eps_decay_episodes", teacher_eps_decay_episodes},
        {"teacher_episode_cap", teacher_episode_cap},
        {"teacher_max_episodes", teacher_max_episodes},
        {"teacher_check_every", teacher_check_every},
        {"adam_beta1", adam_beta1},
        {"adam_beta2", adam_beta2},
        {"adam_eps", adam_eps},
        {"teacher_seed", teacher_seed},
        {"language_seed", language_seed},
        {"language_seeds", language_seeds},
        {"loopback_seeds", loopback_seeds},
    };
    return doc.dump(2);
}

Config Config::from_json(const std::string& text) {
    json doc = json::parse(text);
    Config c;
    read_field(doc, "n", c.n);
    read_field(doc, "n_tilde", c.n_tilde);
    read_field(doc, "gamma_bellman", c.gamma_bellman);
    read_field(doc, "R_goal", c.R_goal);
    read_field(doc, "R_wall", c.R_wall);
    read_field(doc, "R_step", c.R_step);
    read_field(doc, "L", c.L);
    read_field(doc, "K", c.K);
    read_field(doc, "alpha", c.alpha);
    read_field(doc, "N_epochs", c.N_epochs);
    read_field(doc, "gamma", c.gamma);
    read_field(doc, "zeta", c.zeta);
    read_field(doc, "kappa", c.kappa);
    read_field(doc, "k_budget_factor", c.k_budget_factor);
    read_field(doc, "teacher_lr", c.teacher_lr);
    read_field(doc, "teacher_eps_start", c.teacher_eps_start);
    read_field(doc, "teacher_eps_end", c.teacher_eps_end);
    read_field(doc, "teacher_eps_decay_episodes", c.teacher_eps_decay_episodes);
    read_field(doc, "teacher_episode_cap", c.teacher_episode_cap);
    read_field(doc, "teacher_max_episodes", c.teacher_max_episodes);
    read_field(doc, "teacher_check_every", c.teacher_check_every);
    read_field(doc, "adam_beta1", c.adam_beta1);
    read_field(doc, "adam_beta2", c.adam_beta2);
    read_field(doc, "adam_eps", c.adam_eps);
    read_field(doc, "teacher_seed", c.teacher_seed);
    read_field(doc, "language_seed", c.language_seed);
    read_field(doc, "language_seeds", c.language_seeds);
    read_field(doc, "loopback_seeds", c.loopback_seeds);
    return c;
}

void Config::apply_override(const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("override must look like key=value: " + assignment);
    json doc = json::parse(to_json());
    std::string key = assignment.substr(0, eq);
    std::string value = assignment.substr(eq + 1);
    if (!doc.contains(key)) throw std::invalid_argument("unknown config key: " + key);
    doc[key] = json::parse(value);  // numbers only; all fields are numeric
    *this = from_json(doc.dump());
}

}  // namespace gridlang
