#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridlang/analysis.hpp"
#include "gridlang/loopback.hpp"
#include "gridlang/student.hpp"

namespace gridlang {

inline constexpr int kArtifactVersion = 1;

// Raised when a pipeline stage is missing its upstream artifact; carries
// the subcommand that produces it. CLI exit code 2.
class MissingArtifact : public std::runtime_error {
public:
    MissingArtifact(const std::string& path, const std::string& required_subcommand)
        : std::runtime_error("missing artifact " + path + " (run `" + required_subcommand +
                             "` first)"),
          required_subcommand_(required_subcommand) {}
    const std::string& required_subcommand() const { return required_subcommand_; }

private:
    std::string required_subcommand_;
};

std::string read_text_file(const std::filesystem::path& path,
                           const std::string& required_subcommand = "");
void write_text_file(const std::filesystem::path& path, const std::string& content);

// --- task families ---------------------------------------------------------
std::string task_family_to_json(const std::string& family, const std::vector<Task>& tasks);
std::vector<Task> task_family_from_json(const std::string& text, std::string* family_out = nullptr);

// --- teacher Q archives -----------------------------------------------------
std::string q_archive_to_json(const std::vector<std::pair<int, Tensor>>& qs);
std::map<int, Tensor> q_archive_from_json(const std::string& text);

// --- message archives -------------------------------------------------------
// CSV: task_id, wall_x, wall_y, goal_x, goal_y, m1..mK. Wall columns are
// empty for the zero-wall maze; multi-wall mazes join coordinates with ';'.
std::string messages_to_csv(const std::vector<Message>& messages, const std::vector<Task>& tasks);
std::vector<Message> messages_from_csv(const std::string& text);

// --- loss curves ------------------------------------------------------------
std::string loss_curve_to_csv(const std::vector<LossBreakdown>& curve);
std::vector<LossBreakdown> loss_curve_from_csv(const std::string& text);

// --- solve reports ----------------------------------------------------------
std::string solve_rows_to_csv(const std::vector<SolveRow>& rows);
std::vector<SolveRow> solve_rows_from_csv(const std::string& text);

// --- goal patterns ----------------------------------------------------------
std::string pattern_to_json(const GoalPattern& pattern);
GoalPattern pattern_from_json(const std::string& text);

// --- analysis outputs -------------------------------------------------------
struct PcaRow {
    int task_id = 0;
    std::vector<double> pcs;  // first five projections
    int wall_id = 0;
    Cell goal;
    int first_action = 0;
};
std::string pca_rows_to_csv(const std::vector<PcaRow>& rows);

struct AnovaRow {
    std::string grouping;
    AnovaResult result;
    bool significant_05 = false;
};
std::string anova_rows_to_csv(const std::vector<AnovaRow>& rows);

// --- survival reports -------------------------------------------------------
std::string survival_to_csv(const std::vector<SurvivalReport>& reports);

// --- manifests ---------------------------------------------------------------
std::uint64_t fnv1a64(const std::string& bytes);

// Writes manifest.json into the run directory: command, config snapshot,
// and a content hash per input/output artifact.
void write_manifest(const std::filesystem::path& run_dir, const std::string& command,
                    const std::string& config_json,
                    const std::vector<std::filesystem::path>& inputs,
                    const std::vector<std::filesystem::path>& outputs);

std::string format_double(double x);  // round-trip-exact decimal

}  // namespace gridlang
