#include "gridlang/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gridlang {

using nlohmann::json;

std::string read_text_file(const std::filesystem::path& path,
                           const std::string& required_subcommand) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        if (!required_subcommand.empty()) throw MissingArtifact(path.string(), required_subcommand);
        throw std::runtime_error("cannot open file " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file " + path.string());
    out << content;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace {

void check_version(const json& doc, const char* what) {
    if (!doc.contains("version") || doc.at("version").get<int>() != kArtifactVersion)
        throw std::invalid_argument(std::string(what) + ": missing or unsupported version");
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<std::string> csv_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

std::string join_coords(const std::vector<Cell>& walls, bool x_axis) {
    std::string out;
    for (size_t i = 0; i < walls.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(x_axis ? walls[i].x : walls[i].y);
    }
    return out;
}

}  // namespace

std::string task_family_to_json(const std::string& family, const std::vector<Task>& tasks) {
    json arr = json::array();
    for (const Task& t : tasks) {
        json walls = json::array();
        for (const Cell& w : t.maze.walls) walls.push_back({w.x, w.y});
        arr.push_back({{"task_id", t.task_id},
                       {"maze_id", t.maze.id},
                       {"walls", walls},
                       {"goal", {t.goal.x, t.goal.y}}});
    }
    json doc{{"version", kArtifactVersion},
             {"family", family},
             {"interior_size", tasks.empty() ? 4 : tasks.front().maze.interior_size},
             {"tasks", arr}};
    return doc.dump(2);
}

std::vector<Task> task_family_from_json(const std::string& text, std::string* family_out) {
    json doc = json::parse(text);
    check_version(doc, "task family");
    if (family_out) *family_out = doc.at("family").get<std::string>();
    int n = doc.at("interior_size").get<int>();
    std::vector<Task> tasks;
    for (const auto& jt : doc.at("tasks")) {
        Task t;
        t.maze.interior_size = n;
        t.maze.id = jt.value("maze_id", 0);
        for (const auto& jw : jt.at("walls"))
            t.maze.walls.push_back({jw[0].get<int>(), jw[1].get<int>()});
        t.goal = {jt.at("goal")[0].get<int>(), jt.at("goal")[1].get<int>()};
        t.task_id = jt.at("task_id").get<int>();
        tasks.push_back(std::move(t));
    }
    return tasks;
}

std::string q_archive_to_json(const std::vector<std::pair<int, Tensor>>& qs) {
    json arr = json::array();
    for (const auto& [task_id, q] : qs) {
        json cube = json::array();
        for (int x = 0; x < q.h; ++x) {
            json plane = json::array();
            for (int y = 0; y < q.w; ++y) {
                json row = json::array();
                for (int a = 0; a < q.c; ++a) row.push_back(q.at(x, y, a));
                plane.push_back(row);
            }
            cube.push_back(plane);
        }
        arr.push_back({{"task_id", task_id}, {"q", cube}});
    }
    json doc{{"version", kArtifactVersion}, {"q_matrices", arr}};
    return doc.dump();
}

std::map<int, Tensor> q_archive_from_json(const std::string& text) {
    json doc = json::parse(text);
    check_version(doc, "q archive");
    std::map<int, Tensor> out;
    for (const auto& entry : doc.at("q_matrices")) {
        const auto& cube = entry.at("q");
        int h = static_cast<int>(cube.size());
        int w = static_cast<int>(cube[0].size());
        int c = static_cast<int>(cube[0][0].size());
        Tensor q(h, w, c);
        for (int x = 0; x < h; ++x)
            for (int y = 0; y < w; ++y)
                for (int a = 0; a < c; ++a) q.at(x, y, a) = cube[x][y][a].get<double>();
        out.emplace(entry.at("task_id").get<int>(), std::move(q));
    }
    return out;
}

std::string messages_to_csv(const std::vector<Message>& messages, const std::vector<Task>& tasks) {
    std::map<int, const Task*> by_id;
    for (const Task& t : tasks) by_id[t.task_id] = &t;
    size_t klen = messages.empty() ? 5 : messages.front().m.size();

    std::string out = "task_id,wall_x,wall_y,goal_x,goal_y";
    for (size_t i = 1; i <= klen; ++i) out += ",m" + std::to_string(i);
    out += "\n";
    for (const Message& m : messages) {
        auto it = by_id.find(m.task_id);
        if (it == by_id.end())
            throw std::invalid_argument("messages_to_csv: unknown task " + std::to_string(m.task_id));
        const Task& t = *it->second;
        out += std::to_string(m.task_id) + "," + join_coords(t.maze.walls, true) + "," +
               join_coords(t.maze.walls, false) + "," + std::to_string(t.goal.x) + "," +
               std::to_string(t.goal.y);
        for (double x : m.m) out += "," + format_double(x);
        out += "\n";
    }
    return out;
}

std::vector<Message> messages_from_csv(const std::string& text) {
    auto lines = csv_lines(text);
    if (lines.empty()) throw std::invalid_argument("messages csv: empty");
    auto header = split(lines[0], ',');
    if (header.size() < 6 || header[0] != "task_id")
        throw std::invalid_argument("messages csv: unexpected header");
    size_t klen = header.size() - 5;
    std::vector<Message> out;
    for (size_t i = 1; i < lines.size(); ++i) {
        auto cells = split(lines[i], ',');
        if (cells.size() != header.size())
            throw std::invalid_argument("messages csv: ragged row " + std::to_string(i));
        Message m;
        m.task_id = std::stoi(cells[0]);
        for (size_t k = 0; k < klen; ++k) m.m.push_back(std::stod(cells[5 + k]));
        out.push_back(std::move(m));
    }
    return out;
}

std::string loss_curve_to_csv(const std::vector<LossBreakdown>& curve) {
    std::string out = "epoch,reconstruction,sparsity,goal_finding,compound\n";
    for (size_t e = 0; e < curve.size(); ++e)
        out += std::to_string(e) + "," + format_double(curve[e].reconstruction) + "," +
               format_double(curve[e].sparsity) + "," + format_double(curve[e].goal_finding) + "," +
               format_double(curve[e].compound) + "\n";
    return out;
}

std::vector<LossBreakdown> loss_curve_from_csv(const std::string& text) {
    auto lines = csv_lines(text);
    std::vector<LossBreakdown> out;
    for (size_t i = 1; i < lines.size(); ++i) {
        auto cells = split(lines[i], ',');
        if (cells.size() != 5) throw std::invalid_argument("loss csv: ragged row");
        out.push_back({std::stod(cells[1]), std::stod(cells[2]), std::stod(cells[3]),
                       std::stod(cells[4])});
    }
    return out;
}

std::string solve_rows_to_csv(const std::vector<SolveRow>& rows) {
    std::string out = "agent,family,goal_set,pattern_id,task_id,solve_prob\n";
    for (const auto& r : rows)
        out += r.agent + "," + r.family + "," + r.goal_set + "," + r.pattern_id + "," +
               std::to_string(r.task_id) + "," + format_double(r.solve_prob) + "\n";
    return out;
}

std::vector<SolveRow> solve_rows_from_csv(const std::string& text) {
    auto lines = csv_lines(text);
    std::vector<SolveRow> out;
    for (size_t i = 1; i < lines.size(); ++i) {
        auto cells = split(lines[i], ',');
        if (cells.size() != 6) throw std::invalid_argument("solve csv: ragged row");
        out.push_back({cells[0], cells[1], cells[2], cells[3], std::stoi(cells[4]),
                       std::stod(cells[5])});
    }
    return out;
}

std::string pattern_to_json(const GoalPattern& pattern) {
    json goals = json::array();
    for (const Cell& g : pattern.trained_goals) goals.push_back({g.x, g.y});
    json doc{{"version", kArtifactVersion},
             {"pattern_id", pattern.pattern_id},
             {"trained_goals", goals}};
    return doc.dump(2);
}

GoalPattern pattern_from_json(const std::string& text) {
    json doc = json::parse(text);
    check_version(doc, "goal pattern");
    GoalPattern p;
    p.pattern_id = doc.at("pattern_id").get<std::string>();
    for (const auto& jg : doc.at("trained_goals"))
        p.trained_goals.push_back({jg[0].get<int>(), jg[1].get<int>()});
    return p;
}

std::string pca_rows_to_csv(const std::vector<PcaRow>& rows) {
    std::string out = "task_id,pc1,pc2,pc3,pc4,pc5,wall_id,goal_x,goal_y,first_action\n";
    for (const auto& r : rows) {
        out += std::to_string(r.task_id);
        for (size_t i = 0; i < 5; ++i)
            out += "," + format_double(i < r.pcs.size() ? r.pcs[i] : 0.0);
        out += "," + std::to_string(r.wall_id) + "," + std::to_string(r.goal.x) + "," +
               std::to_string(r.goal.y) + "," + std::to_string(r.first_action) + "\n";
    }
    return out;
}

std::string anova_rows_to_csv(const std::vector<AnovaRow>& rows) {
    std::string out = "grouping,var_within,var_between,beta,f_value,significant_05\n";
    for (const auto& r : rows)
        out += r.grouping + "," + format_double(r.result.var_within) + "," +
               format_double(r.result.var_between) + "," + format_double(r.result.beta) + "," +
               format_double(r.result.f_value) + "," + (r.significant_05 ? "1" : "0") + "\n";
    return out;
}

std::string survival_to_csv(const std::vector<SurvivalReport>& reports) {
    std::string out = "language_seed,informed,misinformed,random,smart_random,survived\n";
    for (const auto& r : reports)
        out += std::to_string(r.language_seed) + "," + format_double(r.informed) + "," +
               format_double(r.misinformed) + "," + format_double(r.random) + "," +
               format_double(r.smart_random) + "," + (r.survived ? "1" : "0") + "\n";
    return out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

void write_manifest(const std::filesystem::path& run_dir, const std::string& command,
                    const std::string& config_json,
                    const std::vector<std::filesystem::path>& inputs,
                    const std::vector<std::filesystem::path>& outputs) {
    json doc{{"version", kArtifactVersion},
             {"command", command},
             {"config", json::parse(config_json)}};
    auto hash_list = [](const std::vector<std::filesystem::path>& paths) {
        json obj = json::object();
        for (const auto& p : paths) obj[p.string()] = std::to_string(fnv1a64(read_text_file(p)));
        return obj;
    };
    doc["inputs"] = hash_list(inputs);
    doc["outputs"] = hash_list(outputs);
    write_text_file(run_dir / "manifest.json", doc.dump(2));
}

}  // namespace gridlang
