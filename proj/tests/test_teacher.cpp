#include <doctest.h>

#include <cstring>

#include "gridlang/teacher.hpp"

using namespace gridlang;

namespace {

Task make_task(std::vector<Cell> walls, Cell goal) {
    Maze maze;
    maze.walls = std::move(walls);
    return {maze, goal, 0};
}

// Teacher net whose output is a constant row b, independent of the state.
Network constant_q_net(std::array<double, 4> b) {
    Network net = make_policy_net(0, 1);
    std::fill(net.params.begin(), net.params.end(), 0.0);
    // biases of the output layer are the last four params
    for (int i = 0; i < 4; ++i) net.params[net.param_count() - 4 + i] = b[i];
    return net;
}

}  // namespace

TEST_CASE("replay memory: uniqueness and ring behaviour") {
    ReplayMemory mem(3);
    Transition t1{{0, 0}, Action::Right, -0.1, {1, 0}, false};
    mem.insert(t1);
    mem.insert(t1);  // duplicate leaves long_term unchanged
    CHECK(mem.long_term().size() == 1);
    CHECK(mem.short_term().size() == 2);

    Transition t2{{1, 0}, Action::Up, -0.1, {1, 1}, false};
    Transition t3{{1, 1}, Action::Left, -0.1, {0, 1}, false};
    mem.insert(t2);
    mem.insert(t3);
    CHECK(mem.long_term().size() == 3);
    CHECK(mem.short_term().size() == 3);  // capped at 3, oldest evicted
    CHECK(mem.short_term().front().state == t1.state);
}

TEST_CASE("dqn_loss: zero-residual cases") {
    Task task = make_task({}, {3, 3});

    SUBCASE("terminal transition with Q(s,a) = R") {
        Network net = constant_q_net({2.0, 0.0, 0.0, 0.0});
        ReplayMemory mem(0);  // long-term only, keeps the arithmetic obvious
        mem.insert({{2, 3}, Action::Right, 2.0, {3, 3}, true});
        CHECK(dqn_loss(net, mem, 0.99) == doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("non-terminal transition with Q = R + gamma max Q") {
        // constant rows: Q(s,a0) = -0.1 + 0.99 * max(b) for a0 = Right
        double mx = 0.5;
        Network net = constant_q_net({-0.1 + 0.99 * mx, mx, 0.0, 0.0});
        ReplayMemory mem(0);
        mem.insert({{0, 0}, Action::Right, -0.1, {1, 0}, false});
        double target = -0.1 + 0.99 * std::max({-0.1 + 0.99 * mx, mx, 0.0});
        // residual vanishes only if Q(s,Right) equals the target
        double q = -0.1 + 0.99 * mx;
        CHECK(dqn_loss(net, mem, 0.99) == doctest::Approx((q - target) * (q - target)).epsilon(1e-12));
        CHECK(q == doctest::Approx(target).epsilon(1e-12));
    }
}

TEST_CASE("dqn_loss: two hand-set transitions") {
    Task task = make_task({}, {3, 3});
    Network net = constant_q_net({0.5, 0.2, 0.0, -0.3});
    ReplayMemory mem(0);
    mem.insert({{0, 0}, Action::Right, -0.1, {1, 0}, false});
    mem.insert({{2, 3}, Action::Right, 2.0, {3, 3}, true});
    // residual 1: 0.5 - (-0.1 + 0.99 * 0.5) = 0.105 ; residual 2: 0.5 - 2
    double expected = (0.105 * 0.105 + 1.5 * 1.5) / 2.0;
    CHECK(dqn_loss(net, mem, 0.99) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("dqn gradient matches finite differences") {
    Task task = make_task({{1, 1}}, {2, 2});
    Network net = make_policy_net(0, 31);
    ReplayMemory mem(4);
    Cell s = kStart;
    Rng rng(5);
    for (int i = 0; i < 12; ++i) {
        Action a = static_cast<Action>(rng.uniform_int(4));
        Transition t = step(task, s, a);
        mem.insert(t);
        s = t.terminal ? kStart : t.next_state;
    }

    auto grad = dqn_loss_gradient(net, mem, 0.99);
    const double h = 1e-6;
    for (int trial = 0; trial < 40; ++trial) {
        int i = rng.uniform_int(net.param_count());
        double saved = net.params[i];
        net.params[i] = saved + h;
        double up = dqn_loss(net, mem, 0.99);
        net.params[i] = saved - h;
        double down = dqn_loss(net, mem, 0.99);
        net.params[i] = saved;
        double fd = (up - down) / (2 * h);
        CHECK(std::abs(grad[i] - fd) <= 1e-6 * std::max({1.0, std::abs(fd), std::abs(grad[i])}));
    }
}

TEST_CASE("extract_q_matrix: zero net and wall zeroing") {
    Maze maze;
    maze.walls = {{2, 1}};
    Network net = constant_q_net({0.0, 0.0, 0.0, 0.0});
    QMatrix q = extract_q_matrix(net, maze);
    for (double x : q.v) CHECK(x == 0.0);

    Network live = make_policy_net(0, 8);
    QMatrix q2 = extract_q_matrix(live, maze);
    for (int a = 0; a < 4; ++a) CHECK(q2.at(2, 1, a) == 0.0);
    // same coordinates, same rows
    Tensor r1 = forward(live, state_input({1, 2}));
    for (int a = 0; a < 4; ++a) CHECK(q2.at(1, 2, a) == r1.v[a]);
}

TEST_CASE("train_teacher: one-step task converges immediately") {
    Task task = make_task({}, {0, 1});
    TeacherConfig cfg;
    cfg.seed = 11;
    TeacherResult res = train_teacher(task, cfg);
    auto len = greedy_rollout_length(res.net, task, 50);
    REQUIRE(len.has_value());
    CHECK(*len == 1);
    CHECK(res.env_steps == res.net.adam.t);  // one optimizer step per env step
}

TEST_CASE("train_teacher: walled task reaches k_opt and zeroes wall rows") {
    Task task = make_task({{0, 1}, {1, 1}}, {0, 2});
    task.maze.id = 3;
    TeacherConfig cfg;
    cfg.seed = 12;
    TeacherResult res = train_teacher(task, cfg);
    auto len = greedy_rollout_length(res.net, task, 50);
    REQUIRE(len.has_value());
    CHECK(*len == shortest_path_length(task));
    for (const Cell& w : task.maze.walls)
        for (int a = 0; a < 4; ++a) CHECK(res.q.at(w.x, w.y, a) == 0.0);
    CHECK(policy_is_optimal(res.net, task));

    // checkpoint round trip reproduces the extracted matrix bit-for-bit
    Network reloaded = network_from_json(checkpoint_to_json(res.net));
    QMatrix q2 = extract_q_matrix(reloaded, task.maze);
    CHECK(std::memcmp(q2.v.data(), res.q.v.data(), q2.v.size() * sizeof(double)) == 0);
}

TEST_CASE("argmax actions lie on shortest paths after training") {
    Task task = make_task({{1, 0}}, {3, 1});
    TeacherConfig cfg;
    cfg.seed = 13;
    TeacherResult res = train_teacher(task, cfg);
    auto dist = distances_to(task.maze, task.goal);
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y) {
            Cell c{x, y};
            if (task.maze.is_wall(c) || c == task.goal) continue;
            Tensor row = forward(res.net, state_input(c));
            int best = 0;
            for (int a = 1; a < 4; ++a)
                if (row.v[a] > row.v[best]) best = a;
            Cell off = action_offset(static_cast<Action>(best));
            Cell nb{c.x + off.x, c.y + off.y};
            REQUIRE(task.maze.inside(nb));
            REQUIRE_FALSE(task.maze.is_wall(nb));
            CHECK(dist[task.maze.cell_index(nb)] == dist[task.maze.cell_index(c)] - 1);
        }
}
