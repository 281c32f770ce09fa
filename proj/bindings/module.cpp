#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gridlang/analysis.hpp"
#include "gridlang/config.hpp"
#include "gridlang/io.hpp"
#include "gridlang/loopback.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace gridlang;

namespace {

py::array_t<double> tensor_to_array(const Tensor& t) {
    py::array_t<double> arr({t.h, t.w, t.c});
    std::copy(t.v.begin(), t.v.end(), arr.mutable_data());
    return arr;
}

Tensor array_to_tensor(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 3) throw std::invalid_argument("expected a rank-3 array");
    Tensor t(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)),
             static_cast<int>(arr.shape(2)));
    std::copy(arr.data(), arr.data() + t.numel(), t.v.begin());
    return t;
}

std::vector<std::vector<double>> array_to_rows(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 2) throw std::invalid_argument("expected a rank-2 array");
    std::vector<std::vector<double>> rows(arr.shape(0), std::vector<double>(arr.shape(1)));
    for (py::ssize_t i = 0; i < arr.shape(0); ++i)
        for (py::ssize_t j = 0; j < arr.shape(1); ++j) rows[i][j] = arr.at(i, j);
    return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Grid-world emergent-language laboratory: deep-Q teachers, a sparse-autoencoder "
              "language, message-conditioned students, and message-space analysis.";

    py::class_<Cell>(m, "Cell")
        .def(py::init<int, int>(), py::arg("x"), py::arg("y"))
        .def_readwrite("x", &Cell::x)
        .def_readwrite("y", &Cell::y)
        .def("__repr__", [](const Cell& c) {
            return "Cell(" + std::to_string(c.x) + ", " + std::to_string(c.y) + ")";
        });

    py::enum_<Action>(m, "Action")
        .value("RIGHT", Action::Right)
        .value("UP", Action::Up)
        .value("LEFT", Action::Left)
        .value("DOWN", Action::Down);

    py::class_<Maze>(m, "Maze")
        .def(py::init([](int interior_size, const std::vector<std::pair<int, int>>& walls, int id) {
                 Maze mz;
                 mz.interior_size = interior_size;
                 for (auto [x, y] : walls) mz.walls.push_back({x, y});
                 mz.id = id;
                 return mz;
             }),
             py::arg("interior_size") = 4, py::arg("walls") = std::vector<std::pair<int, int>>{},
             py::arg("id") = 0)
        .def_readonly("interior_size", &Maze::interior_size)
        .def_readonly("id", &Maze::id)
        .def_property_readonly("walls",
                               [](const Maze& mz) {
                                   std::vector<std::pair<int, int>> out;
                                   for (const Cell& w : mz.walls) out.emplace_back(w.x, w.y);
                                   return out;
                               })
        .def("is_wall", [](const Maze& mz, int x, int y) { return mz.is_wall({x, y}); });

    py::class_<Task>(m, "Task")
        .def(py::init([](const Maze& maze, std::pair<int, int> goal, int task_id) {
                 return Task{maze, {goal.first, goal.second}, task_id};
             }),
             py::arg("maze"), py::arg("goal"), py::arg("task_id") = 0)
        .def_readonly("maze", &Task::maze)
        .def_readonly("task_id", &Task::task_id)
        .def_property_readonly("goal",
                               [](const Task& t) { return std::pair{t.goal.x, t.goal.y}; })
        .def("__repr__", [](const Task& t) {
            return "Task(id=" + std::to_string(t.task_id) + ", goal=(" + std::to_string(t.goal.x) +
                   "," + std::to_string(t.goal.y) + "), walls=" +
                   std::to_string(t.maze.walls.size()) + ")";
        });

    m.def("enumerate_training_tasks", &enumerate_training_tasks, py::arg("interior_size") = 4);
    m.def("enumerate_test_tasks", &enumerate_test_tasks, py::arg("interior_size") = 4);
    m.def(
        "step",
        [](const Task& task, std::pair<int, int> state, Action action) {
            Transition t = step(task, {state.first, state.second}, action);
            return py::make_tuple(std::pair{t.next_state.x, t.next_state.y}, t.reward, t.terminal);
        },
        py::arg("task"), py::arg("state"), py::arg("action"),
        "Returns (next_state, reward, terminal).");
    m.def("shortest_path_length", &shortest_path_length, py::arg("task"));

    py::class_<Network>(m, "Network")
        .def_property_readonly("param_count", &Network::param_count)
        .def_property_readonly("params", [](const Network& n) { return n.params; })
        .def("to_json", &checkpoint_to_json);
    m.def("network_from_json", &network_from_json, py::arg("text"));
    m.def("make_teacher_net", [](std::uint64_t seed) { return make_policy_net(0, seed); },
          py::arg("seed") = 0);
    m.def("make_student_net",
          [](int message_len, std::uint64_t seed) { return make_policy_net(message_len, seed); },
          py::arg("message_len") = 5, py::arg("seed") = 0);

    m.def(
        "train_teacher",
        [](const Task& task, std::uint64_t seed, int max_episodes) {
            TeacherConfig cfg;
            cfg.seed = seed;
            cfg.max_episodes = max_episodes;
            TeacherResult res = train_teacher(task, cfg);
            return py::make_tuple(std::move(res.net), tensor_to_array(res.q), res.episodes);
        },
        py::arg("task"), py::arg("seed") = 0, py::arg("max_episodes") = 1000,
        "Trains one deep-Q teacher to optimality; returns (net, q_matrix, episodes).");
    m.def("extract_q_matrix",
          [](const Network& net, const Maze& maze) { return tensor_to_array(extract_q_matrix(net, maze)); });

    py::class_<Message>(m, "Message")
        .def(py::init([](const std::vector<double>& values, int task_id) {
                 return Message{values, task_id};
             }),
             py::arg("values"), py::arg("task_id") = -1)
        .def_readonly("task_id", &Message::task_id)
        .def_readonly("values", &Message::m);

    py::class_<Sae>(m, "Sae")
        .def_property_readonly("param_count", &Sae::param_count)
        .def("to_json", &sae_to_json);
    m.def("sae_from_json", &sae_from_json, py::arg("text"));
    m.def(
        "make_sae",
        [](int interior_size, int message_len, std::uint64_t seed, bool linear) {
            return make_sae(interior_size, message_len, seed,
                            linear ? Activation::Linear : Activation::Relu);
        },
        py::arg("interior_size") = 4, py::arg("message_len") = 5, py::arg("seed") = 0,
        py::arg("linear") = false);
    m.def("encode",
          [](const Sae& sae, const py::array_t<double, py::array::c_style | py::array::forcecast>& q,
             int task_id) { return encode(sae, array_to_tensor(q), task_id); },
          py::arg("sae"), py::arg("q"), py::arg("task_id") = -1);
    m.def("decode",
          [](const Sae& sae, const Message& msg) { return tensor_to_array(decode(sae, msg)); });

    m.def(
        "occupancy_after_k",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& policy,
           const Task& task, int k) {
            Tensor rho = occupancy_after_k(array_to_tensor(policy), task, k);
            py::array_t<double> arr({rho.h, rho.w});
            std::copy(rho.v.begin(), rho.v.end(), arr.mutable_data());
            return arr;
        },
        py::arg("policy"), py::arg("task"), py::arg("k"));
    m.def("goal_finding_loss",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& outputs,
             const Task& task, double gamma) {
              return goal_finding_loss(array_to_tensor(outputs), task, gamma);
          },
          py::arg("student_outputs"), py::arg("task"), py::arg("gamma"));

    m.def(
        "train_language",
        [](const std::vector<Task>& tasks, const std::map<int, py::array_t<double>>& qs,
           bool feedback, int epochs, std::uint64_t seed, double zeta, bool linear) {
            std::map<int, Tensor> teacher_qs;
            for (const auto& [id, arr] : qs) teacher_qs.emplace(id, array_to_tensor(arr));
            LanguageConfig cfg;
            cfg.epochs = epochs;
            cfg.seed = seed;
            cfg.zeta = zeta;
            cfg.hidden_act = linear ? Activation::Linear : Activation::Relu;
            LanguageRun run = train_language(tasks, teacher_qs, feedback, cfg);
            py::list curve;
            for (const auto& l : run.curve)
                curve.append(py::dict("reconstruction"_a = l.reconstruction,
                                      "sparsity"_a = l.sparsity, "goal_finding"_a = l.goal_finding,
                                      "compound"_a = l.compound));
            return py::make_tuple(std::move(run.sae), std::move(run.student), curve,
                                  run.messages);
        },
        py::arg("tasks"), py::arg("teacher_qs"), py::arg("feedback") = true,
        py::arg("epochs") = 1000, py::arg("seed") = 1, py::arg("zeta") = 5.0,
        py::arg("linear") = false);

    m.def("student_policy",
          [](const Network& student, const Maze& maze, const Message& msg) {
              return tensor_to_array(student_policy(student, maze, msg));
          });
    m.def(
        "baseline_policy",
        [](const std::string& kind, const Maze& maze) {
            if (kind != "random" && kind != "smart_random")
                throw std::invalid_argument("baseline kind must be random or smart_random");
            return tensor_to_array(baseline_policy(
                kind == "random" ? BaselineKind::Random : BaselineKind::SmartRandom, maze));
        },
        py::arg("kind"), py::arg("maze"));
    m.def("misinform", &misinform, py::arg("archive"), py::arg("task_id"), py::arg("seed"));
    m.def("solve_probability",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& policy,
             const Task& task, int budget) {
              return solve_probability(array_to_tensor(policy), task, budget);
          },
          py::arg("policy"), py::arg("task"), py::arg("budget"));

    m.def(
        "pca",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& data) {
            PcaResult res = pca(array_to_rows(data));
            return py::dict("explained_variance_ratio"_a = res.explained_variance_ratio,
                            "eigenvalues"_a = res.eigenvalues, "components"_a = res.components,
                            "projections"_a = res.projections);
        },
        py::arg("data"));
    m.def(
        "anova",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& data,
           const std::vector<int>& labels) {
            AnovaResult r = anova({array_to_rows(data), labels});
            return py::dict("var_within"_a = r.var_within, "var_between"_a = r.var_between,
                            "beta"_a = r.beta, "f_value"_a = r.f_value,
                            "df"_a = std::pair{r.df_between, r.df_within});
        },
        py::arg("data"), py::arg("labels"));
    m.def("f_critical", &f_critical, py::arg("p"), py::arg("df_between") = 14,
          py::arg("df_within") = 195);
    m.def("t_test_one_sample",
          [](const std::vector<double>& sample, double reference) {
              TTestResult r = t_test_one_sample(sample, reference);
              return py::dict("t"_a = r.t, "df"_a = r.df, "p"_a = r.p_two_sided);
          },
          py::arg("sample"), py::arg("reference"));
    m.def("t_test_two_sample",
          [](const std::vector<double>& a, const std::vector<double>& b) {
              TTestResult r = t_test_two_sample(a, b);
              return py::dict("t"_a = r.t, "df"_a = r.df, "p"_a = r.p_two_sided);
          },
          py::arg("a"), py::arg("b"));

    m.attr("__version__") = "0.1.0";
}
