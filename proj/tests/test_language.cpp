#include <doctest.h>

#include <cstring>

#include "gridlang/language.hpp"

using namespace gridlang;

namespace {

Task make_task(std::vector<Cell> walls, Cell goal, int task_id = 0) {
    Maze maze;
    maze.walls = std::move(walls);
    return {maze, goal, task_id};
}

// Dense transition-matrix power: an independent route to the k-step
// occupancy. States are flattened row-major; the goal is absorbing.
Tensor occupancy_oracle(const Tensor& policy, const Task& task, int k) {
    const int n = task.maze.interior_size;
    const int states = n * n;
    std::vector<double> T(static_cast<size_t>(states) * states, 0.0);  // T[to][from]
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            Cell c{x, y};
            int from = task.maze.cell_index(c);
            if (task.maze.is_wall(c)) continue;
            if (c == task.goal) {
                T[static_cast<size_t>(from) * states + from] = 1.0;
                continue;
            }
            for (int a = 0; a < 4; ++a) {
                Cell off = action_offset(static_cast<Action>(a));
                Cell nb{c.x + off.x, c.y + off.y};
                if (!task.maze.inside(nb) || task.maze.is_wall(nb)) nb = c;
                T[static_cast<size_t>(task.maze.cell_index(nb)) * states + from] +=
                    policy.at(x, y, a);
            }
        }
    // M = T^k by repeated square-matrix multiplication
    std::vector<double> M(static_cast<size_t>(states) * states, 0.0);
    for (int i = 0; i < states; ++i) M[static_cast<size_t>(i) * states + i] = 1.0;
    for (int p = 0; p < k; ++p) {
        std::vector<double> next(static_cast<size_t>(states) * states, 0.0);
        for (int i = 0; i < states; ++i)
            for (int j = 0; j < states; ++j) {
                double t = T[static_cast<size_t>(i) * states + j];
                if (t == 0.0) continue;
                for (int l = 0; l < states; ++l)
                    next[static_cast<size_t>(i) * states + l] +=
                        t * M[static_cast<size_t>(j) * states + l];
            }
        M = std::move(next);
    }
    Tensor rho(n, n, 1);
    int start = task.maze.cell_index(kStart);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            rho.at(x, y, 0) = M[static_cast<size_t>(task.maze.cell_index({x, y})) * states + start];
    return rho;
}

Tensor uniform_policy(const Maze& maze) {
    const int n = maze.interior_size;
    Tensor policy(n, n, 4);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            if (maze.is_wall({x, y})) continue;
            for (int a = 0; a < 4; ++a) policy.at(x, y, a) = 0.25;
        }
    return policy;
}

Tensor random_policy(const Maze& maze, Rng& rng) {
    const int n = maze.interior_size;
    Tensor policy(n, n, 4);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            if (maze.is_wall({x, y})) continue;
            double row[4], sum = 0;
            for (double& p : row) sum += (p = rng.uniform() + 1e-3);
            for (int a = 0; a < 4; ++a) policy.at(x, y, a) = row[a] / sum;
        }
    return policy;
}

std::map<int, QMatrix> fake_q_archive(const std::vector<Task>& tasks, std::uint64_t seed) {
    std::map<int, QMatrix> qs;
    Rng rng(seed);
    for (const Task& t : tasks) {
        QMatrix q(4, 4, 4);
        for (double& x : q.v) x = rng.uniform(-0.5, 2.0);
        for (const Cell& w : t.maze.walls)
            for (int a = 0; a < 4; ++a) q.at(w.x, w.y, a) = 0.0;
        qs.emplace(t.task_id, std::move(q));
    }
    return qs;
}

}  // namespace

TEST_CASE("encode/decode: zero-weight nets give zero message and zero tensor") {
    Sae sae = make_sae(4, 5, 3);
    std::fill(sae.encoder.params.begin(), sae.encoder.params.end(), 0.0);
    std::fill(sae.decoder.params.begin(), sae.decoder.params.end(), 0.0);
    QMatrix q(4, 4, 4);
    Rng rng(2);
    for (double& x : q.v) x = rng.uniform(-1, 1);
    Message m = encode(sae, q, 7);
    CHECK(m.m.size() == 5);
    for (double x : m.m) CHECK(x == 0.0);
    Tensor qp = decode(sae, m);
    CHECK(qp.h == 4);
    CHECK(qp.w == 4);
    CHECK(qp.c == 4);
    for (double x : qp.v) CHECK(x == 0.0);
}

TEST_CASE("encode is deterministic for identical inputs") {
    Sae sae = make_sae(4, 5, 4);
    QMatrix q(4, 4, 4);
    Rng rng(9);
    for (double& x : q.v) x = rng.uniform(-1, 1);
    Message a = encode(sae, q), b = encode(sae, q);
    CHECK(a.m == b.m);
}

TEST_CASE("sae_loss: limits and hand-computed norms") {
    QMatrix q(4, 4, 4);
    Tensor qp = q;
    Message zero{std::vector<double>(5, 0.0), -1};
    LossBreakdown l = sae_loss(q, qp, zero, 1.0 / 500);
    CHECK(l.compound == 0.0);

    Message m{{3.0, 0.0, 4.0, 0.0, 0.0}, -1};  // ||m|| = 5
    l = sae_loss(q, qp, m, 1.0);
    CHECK(l.reconstruction == 0.0);
    CHECK(l.sparsity == doctest::Approx(5.0).epsilon(1e-15));

    // Q' - Q = all-ones tensor over 64 entries: ||.|| = 8
    for (double& x : qp.v) x = 1.0;
    l = sae_loss(q, qp, m, 0.25);
    CHECK(l.reconstruction == doctest::Approx(0.75 * 8.0).epsilon(1e-15));
    CHECK(l.sparsity == doctest::Approx(0.25 * 5.0).epsilon(1e-15));
    CHECK(l.compound == doctest::Approx(0.75 * 8.0 + 0.25 * 5.0).epsilon(1e-15));

    CHECK_THROWS_AS(sae_loss(q, qp, m, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(sae_loss(q, qp, m, -0.1), std::invalid_argument);
}

TEST_CASE("occupancy: deterministic optimal policy reaches the goal at k_opt") {
    Task task = make_task({}, {2, 1});
    const int n = 4;
    Tensor policy(n, n, 4);
    // go right until x = 2, then up
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) policy.at(x, y, x < 2 ? 0 : 1) = 1.0;
    int k = shortest_path_length(task);
    Tensor rho = occupancy_after_k(policy, task, k);
    CHECK(rho.at(2, 1, 0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("occupancy: uniform policy basics and absorption") {
    Task task = make_task({}, {0, 1});
    Tensor policy = uniform_policy(task.maze);
    Tensor rho = occupancy_after_k(policy, task, 1);
    CHECK(rho.at(0, 1, 0) == doctest::Approx(0.25).epsilon(1e-15));

    // goal mass never decreases; mass stays normalized
    double prev = 0;
    for (int k = 0; k <= 12; ++k) {
        Tensor r = occupancy_after_k(policy, task, k);
        double total = 0;
        for (double x : r.v) {
            CHECK(x >= -1e-15);
            total += x;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        double goal_mass = r.at(0, 1, 0);
        CHECK(goal_mass >= prev - 1e-15);
        prev = goal_mass;
    }
}

TEST_CASE("occupancy equals the matrix-power oracle on random policies") {
    Rng rng(77);
    std::vector<Task> tasks{
        make_task({}, {3, 3}),
        make_task({{1, 1}}, {2, 2}),
        make_task({{0, 1}, {2, 2}}, {3, 0}),
    };
    for (const Task& task : tasks)
        for (int trial = 0; trial < 5; ++trial) {
            Tensor policy = random_policy(task.maze, rng);
            int k = 1 + rng.uniform_int(12);
            Tensor got = occupancy_after_k(policy, task, k);
            Tensor want = occupancy_oracle(policy, task, k);
            for (int i = 0; i < got.numel(); ++i)
                CHECK(got.v[i] == doctest::Approx(want.v[i]).epsilon(1e-13));
        }
}

TEST_CASE("occupancy rejects non-normalized rows") {
    Task task = make_task({}, {3, 3});
    Tensor policy = uniform_policy(task.maze);
    policy.at(1, 1, 0) = 0.5;  // row sums to 1.25
    CHECK_THROWS_AS(occupancy_after_k(policy, task, 3), std::invalid_argument);
}

TEST_CASE("goal_finding_loss: closed-form cases") {
    Task task = make_task({}, {0, 1});
    const double gamma = 0.17;
    // zero outputs: uniform policy; with k = 1 the goal probability is 0.25
    Tensor outputs(4, 4, 4);
    double loss = goal_finding_loss(outputs, task, gamma);
    double miss = 1.0 - 0.25;
    CHECK(loss == doctest::Approx((1 - gamma) * miss * miss * miss * miss).epsilon(1e-12));

    GoalFindingGrad gl = goal_finding_loss_grad(outputs, task, gamma, 1);
    CHECK(gl.goal_prob == doctest::Approx(0.25).epsilon(1e-15));

    // zero outputs that certainly miss: loss is exactly (1 - gamma)
    Task far = make_task({}, {3, 3});
    double missed = goal_finding_loss_grad(Tensor(4, 4, 4), far, gamma, 1).loss;
    CHECK(missed == doctest::Approx(1.0 - gamma).epsilon(1e-15));

    // near-deterministic "always up" outputs solve goal (0,1) at k=1: the
    // miss term vanishes, leaving only the norm regularizer
    Tensor peaked(4, 4, 4);
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y) peaked.at(x, y, 1) = 60.0;
    GoalFindingGrad sure = goal_finding_loss_grad(peaked, task, gamma, 1);
    CHECK(sure.goal_prob == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sure.loss - gamma * l2_norm(peaked) / 8.0 == doctest::Approx(0.0).epsilon(1e-12));

    // gamma value used in the default configuration
    LanguageConfig cfg;
    CHECK(cfg.resolved_gamma(4) == doctest::Approx(0.05 * std::sqrt(64.0 / 5.0)).epsilon(1e-15));
}

TEST_CASE("goal_finding_loss_grad matches finite differences") {
    Task task = make_task({{1, 1}}, {2, 2}, 0);
    Rng rng(15);
    Tensor outputs(4, 4, 4);
    for (double& x : outputs.v) x = rng.uniform(-1, 1);
    const double gamma = 0.1788854381999832;
    int k = shortest_path_length(task);
    GoalFindingGrad gl = goal_finding_loss_grad(outputs, task, gamma, k);

    const double h = 1e-6;
    for (int trial = 0; trial < 50; ++trial) {
        int i = rng.uniform_int(outputs.numel());
        double saved = outputs.v[i];
        outputs.v[i] = saved + h;
        double up = goal_finding_loss_grad(outputs, task, gamma, k).loss;
        outputs.v[i] = saved - h;
        double down = goal_finding_loss_grad(outputs, task, gamma, k).loss;
        outputs.v[i] = saved;
        double fd = (up - down) / (2 * h);
        CHECK(std::abs(gl.d_outputs.v[i] - fd) <=
              1e-6 * std::max({1.0, std::abs(fd), std::abs(gl.d_outputs.v[i])}));
    }
}

TEST_CASE("full feedback loss gradient matches finite differences") {
    // Composite check: encoder -> (decoder, student) -> occupancy chain.
    auto tasks = std::vector<Task>{make_task({{2, 1}}, {3, 2}, 0)};
    auto qs = fake_q_archive(tasks, 5);
    const Task& task = tasks[0];
    const QMatrix& q = qs.at(0);

    Sae sae = make_sae(4, 5, 51);
    Network student = make_policy_net(5, 52);
    const double kappa = 1.0 / 500, zeta = 5.0, gamma = 0.1788854381999832;
    const int k = shortest_path_length(task);

    auto eval_loss = [&]() {
        Message m = encode(sae, q, 0);
        Tensor qp = decode(sae, m);
        LossBreakdown l = sae_loss(q, qp, m, kappa);
        Tensor outputs = student_outputs(student, task.maze, m);
        return l.compound + zeta * goal_finding_loss_grad(outputs, task, gamma, k).loss;
    };

    // analytic gradient assembled exactly as the training loop does
    std::vector<double> g_enc(sae.encoder.param_count(), 0.0);
    std::vector<double> g_dec(sae.decoder.param_count(), 0.0);
    std::vector<double> g_stu(student.param_count(), 0.0);
    {
        ForwardCache ec, dc;
        Tensor msg = forward(sae.encoder, q, &ec);
        Tensor qp = forward(sae.decoder, msg, &dc);
        Tensor d_qp = qp - q;
        double rn = std::max(l2_norm(d_qp), 1e-12);
        for (double& x : d_qp.v) x *= (1.0 - kappa) / rn;
        Tensor d_msg = backward(sae.decoder, dc, d_qp, g_dec);
        double mn = std::max(l2_norm(msg), 1e-12);
        for (int i = 0; i < d_msg.numel(); ++i) d_msg.v[i] += kappa * msg.v[i] / mn;

        Message m{msg.v, 0};
        std::vector<ForwardCache> caches;
        Tensor outputs = student_outputs(student, task.maze, m, &caches);
        GoalFindingGrad gl = goal_finding_loss_grad(outputs, task, gamma, k);
        Tensor drow = Tensor::vec(4);
        for (int x = 0; x < 4; ++x)
            for (int y = 0; y < 4; ++y) {
                for (int a = 0; a < 4; ++a) drow.v[a] = zeta * gl.d_outputs.at(x, y, a);
                Tensor din = backward(student, caches[static_cast<size_t>(x) * 4 + y], drow, g_stu);
                for (int i = 0; i < 5; ++i) d_msg.v[i] += din.v[2 + i];
            }
        backward(sae.encoder, ec, d_msg, g_enc);
    }

    Rng rng(66);
    const double h = 1e-5;
    auto check_block = [&](Network& net, const std::vector<double>& grad, int samples) {
        for (int t = 0; t < samples; ++t) {
            int i = rng.uniform_int(net.param_count());
            double saved = net.params[i];
            net.params[i] = saved + h;
            double up = eval_loss();
            net.params[i] = saved - h;
            double down = eval_loss();
            net.params[i] = saved;
            double fd = (up - down) / (2 * h);
            CHECK(std::abs(grad[i] - fd) <=
                  1e-4 * std::max({1e-2, std::abs(fd), std::abs(grad[i])}));
        }
    };
    check_block(sae.encoder, g_enc, 25);
    check_block(sae.decoder, g_dec, 25);
    check_block(student, g_stu, 25);
}

TEST_CASE("train_language: loss decreases and messages are stable across re-encoding") {
    auto all = enumerate_training_tasks();
    std::vector<Task> tasks(all.begin(), all.begin() + 24);
    auto qs = fake_q_archive(tasks, 8);

    LanguageConfig cfg;
    cfg.epochs = 40;
    cfg.seed = 3;
    LanguageRun run = train_language(tasks, qs, false, cfg);
    REQUIRE(run.curve.size() == 41);
    CHECK(run.curve.back().compound < run.curve.front().compound);
    CHECK(run.curve.back().goal_finding == 0.0);

    // re-encoding the archive reproduces the stored messages
    for (size_t i = 0; i < tasks.size(); ++i) {
        Message again = encode(run.sae, qs.at(tasks[i].task_id), tasks[i].task_id);
        CHECK(again.m == run.messages[i].m);
    }
}

TEST_CASE("train_language with zeta = 0 reproduces the no-feedback trajectory bitwise") {
    auto all = enumerate_training_tasks();
    std::vector<Task> tasks(all.begin(), all.begin() + 10);
    auto qs = fake_q_archive(tasks, 13);

    LanguageConfig cfg;
    cfg.epochs = 3;
    cfg.seed = 21;
    LanguageRun plain = train_language(tasks, qs, false, cfg);
    cfg.zeta = 0.0;
    LanguageRun feedback = train_language(tasks, qs, true, cfg);

    REQUIRE(plain.sae.encoder.params.size() == feedback.sae.encoder.params.size());
    CHECK(std::memcmp(plain.sae.encoder.params.data(), feedback.sae.encoder.params.data(),
                      plain.sae.encoder.params.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(plain.sae.decoder.params.data(), feedback.sae.decoder.params.data(),
                      plain.sae.decoder.params.size() * sizeof(double)) == 0);
}

TEST_CASE("train_language requires a Q-matrix per task") {
    auto all = enumerate_training_tasks();
    std::vector<Task> tasks(all.begin(), all.begin() + 3);
    auto qs = fake_q_archive(tasks, 1);
    qs.erase(tasks[1].task_id);
    LanguageConfig cfg;
    cfg.epochs = 1;
    CHECK_THROWS_AS(train_language(tasks, qs, false, cfg), std::invalid_argument);
}
