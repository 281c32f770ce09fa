#include <doctest.h>

#include <cstring>
#include <filesystem>

#include "gridlang/config.hpp"
#include "gridlang/io.hpp"

using namespace gridlang;

TEST_CASE("task family json round trip") {
    auto tasks = enumerate_training_tasks();
    std::string text = task_family_to_json("train", tasks);
    std::string family;
    auto loaded = task_family_from_json(text, &family);
    CHECK(family == "train");
    REQUIRE(loaded.size() == tasks.size());
    for (size_t i = 0; i < tasks.size(); ++i) {
        CHECK(loaded[i].task_id == tasks[i].task_id);
        CHECK(loaded[i].goal == tasks[i].goal);
        CHECK(loaded[i].maze.walls == tasks[i].maze.walls);
        CHECK(loaded[i].maze.id == tasks[i].maze.id);
    }
}

TEST_CASE("artifact version is enforced") {
    auto tasks = enumerate_training_tasks();
    std::string text = task_family_to_json("train", tasks);
    auto pos = text.find("\"version\": 1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 12, "\"version\": 3");
    CHECK_THROWS_AS(task_family_from_json(text), std::invalid_argument);
}

TEST_CASE("q archive round trip is bit-exact") {
    Rng rng(5);
    std::vector<std::pair<int, Tensor>> qs;
    for (int id : {0, 7, 224}) {
        Tensor q(4, 4, 4);
        for (double& x : q.v) x = rng.uniform(-2, 2);
        qs.emplace_back(id, std::move(q));
    }
    auto loaded = q_archive_from_json(q_archive_to_json(qs));
    REQUIRE(loaded.size() == 3);
    for (const auto& [id, q] : qs) {
        REQUIRE(loaded.count(id));
        CHECK(std::memcmp(loaded.at(id).v.data(), q.v.data(), q.v.size() * sizeof(double)) == 0);
    }
}

TEST_CASE("message csv: format and round trip") {
    auto tasks = enumerate_training_tasks();
    std::vector<Message> messages;
    Rng rng(8);
    for (int id : {0, 20, 120}) {
        Message m;
        m.task_id = id;
        for (int k = 0; k < 5; ++k) m.m.push_back(rng.uniform(-1, 1));
        messages.push_back(std::move(m));
    }
    std::string csv = messages_to_csv(messages, tasks);
    CHECK(csv.rfind("task_id,wall_x,wall_y,goal_x,goal_y,m1,m2,m3,m4,m5\n", 0) == 0);
    // task 0 lives in the zero-wall maze: wall columns are empty
    CHECK(csv.find("\n0,,,1,0,") != std::string::npos);

    auto loaded = messages_from_csv(csv);
    REQUIRE(loaded.size() == messages.size());
    for (size_t i = 0; i < messages.size(); ++i) {
        CHECK(loaded[i].task_id == messages[i].task_id);
        REQUIRE(loaded[i].m.size() == 5);
        for (int k = 0; k < 5; ++k)
            CHECK(std::memcmp(&loaded[i].m[k], &messages[i].m[k], sizeof(double)) == 0);
    }
}

TEST_CASE("message csv: two-wall tasks join wall coordinates with ';'") {
    auto tasks = enumerate_test_tasks();
    Message m;
    m.task_id = tasks[0].task_id;
    m.m = {1, 2, 3, 4, 5};
    std::string csv = messages_to_csv({m}, tasks);
    const Maze& maze = tasks[0].maze;
    std::string expect = "\n" + std::to_string(m.task_id) + "," +
                         std::to_string(maze.walls[0].x) + ";" + std::to_string(maze.walls[1].x) +
                         "," + std::to_string(maze.walls[0].y) + ";" +
                         std::to_string(maze.walls[1].y) + ",";
    CHECK(csv.find(expect) != std::string::npos);
}

TEST_CASE("loss curve and solve report round trips") {
    std::vector<LossBreakdown> curve{{1.5, 0.2, 0.0, 1.7}, {0.9, 0.25, 0.1, 1.65}};
    auto loaded = loss_curve_from_csv(loss_curve_to_csv(curve));
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[1].reconstruction == 0.9);
    CHECK(loaded[1].compound == 1.65);

    std::vector<SolveRow> rows{{"informed", "train", "trained", "i", 3, 0.75},
                               {"random", "test", "unknown", "ii", 9, 0.125}};
    auto back = solve_rows_from_csv(solve_rows_to_csv(rows));
    REQUIRE(back.size() == 2);
    CHECK(back[0].agent == "informed");
    CHECK(back[0].solve_prob == 0.75);
    CHECK(back[1].pattern_id == "ii");
    CHECK(back[1].task_id == 9);
}

TEST_CASE("pattern json round trip") {
    GoalPattern p{"v", {{2, 2}, {3, 2}, {2, 3}, {3, 3}}};
    GoalPattern q = pattern_from_json(pattern_to_json(p));
    CHECK(q.pattern_id == "v");
    CHECK(q.trained_goals == p.trained_goals);
}

TEST_CASE("config: defaults, json round trip, overrides") {
    Config c;
    CHECK(c.resolved_gamma() == doctest::Approx(0.05 * std::sqrt(64.0 / 5.0)).epsilon(1e-15));
    CHECK(c.kappa == doctest::Approx(1.0 / 500).epsilon(1e-15));

    Config d = Config::from_json(c.to_json());
    CHECK(d.zeta == c.zeta);
    CHECK(d.N_epochs == c.N_epochs);
    // to_json resolves gamma to its numeric value
    CHECK(d.gamma == doctest::Approx(c.resolved_gamma()).epsilon(1e-15));

    d.apply_override("zeta=2.5");
    CHECK(d.zeta == 2.5);
    d.apply_override("N_epochs=10");
    CHECK(d.N_epochs == 10);
    CHECK_THROWS_AS(d.apply_override("nonsense=1"), std::invalid_argument);
    CHECK_THROWS_AS(d.apply_override("oops"), std::invalid_argument);
}

TEST_CASE("manifest: hashes inputs and outputs") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "gridlang_manifest_test";
    fs::create_directories(dir);
    write_text_file(dir / "input.csv", "a,b\n1,2\n");
    write_text_file(dir / "output.csv", "x\n9\n");
    Config c;
    write_manifest(dir, "unit-test", c.to_json(), {dir / "input.csv"}, {dir / "output.csv"});
    std::string manifest = read_text_file(dir / "manifest.json");
    CHECK(manifest.find("unit-test") != std::string::npos);
    CHECK(manifest.find(std::to_string(fnv1a64("a,b\n1,2\n"))) != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("missing artifacts name the producing subcommand") {
    try {
        read_text_file("/nonexistent/gridlang.json", "train-teachers");
        FAIL("expected MissingArtifact");
    } catch (const MissingArtifact& e) {
        CHECK(e.required_subcommand() == "train-teachers");
        CHECK(std::string(e.what()).find("train-teachers") != std::string::npos);
    }
}
