#pragma once

#include <compare>
#include <string>
#include <vector>

namespace gridlang {

// Coordinates: (0,0) is the bottom-left interior cell, x grows rightward,
// y grows upward. Cells are ordered row-major: index = y * n + x.
struct Cell {
    int x = 0, y = 0;
    auto operator<=>(const Cell&) const = default;
};

// Action channels in QMatrix order.
enum class Action { Right = 0, Up = 1, Left = 2, Down = 3 };

inline constexpr int kNumActions = 4;

Cell action_offset(Action a);
const char* action_name(Action a);

// One grid-world: an interior of n x n cells surrounded by an impassable
// boundary, plus zero or more interior wall cells.
struct Maze {
    int interior_size = 4;
    std::vector<Cell> walls;  // sorted row-major, never contains (0,0)
    int id = 0;               // index within its enumeration family

    bool inside(Cell c) const {
        return c.x >= 0 && c.x < interior_size && c.y >= 0 && c.y < interior_size;
    }
    bool is_wall(Cell c) const;
    int cell_index(Cell c) const { return c.y * interior_size + c.x; }
};

// A maze plus one goal cell; the unit tasks are enumerated and learned in.
struct Task {
    Maze maze;
    Cell goal;
    int task_id = 0;
};

inline constexpr Cell kStart{0, 0};

struct RewardScheme {
    double step = -0.1;
    double wall = -0.5;
    double goal = 2.0;
};

struct Transition {
    Cell state;
    Action action;
    double reward;
    Cell next_state;
    bool terminal;
};

// One environment step. Moves into the boundary or an interior wall bounce
// back to the current cell; reaching the goal terminates the episode.
// Querying from a wall or the goal cell is a contract violation.
Transition step(const Task& task, Cell state, Action action, const RewardScheme& rewards = {});

// BFS distances (in steps) from `target` to every cell; walls and
// unreachable cells get -1. Indexed by Maze::cell_index.
std::vector<int> distances_to(const Maze& maze, Cell target);

// Length of the shortest path from the start cell to the goal.
// Throws if the goal is unreachable.
int shortest_path_length(const Task& task);

// True iff all non-wall cells are mutually reachable via 4-connectivity.
bool fully_connected(const Maze& maze);

// All mazes with zero or one interior wall (16 for n=4), with every legal
// goal cell: 225 tasks. Deterministic ordering: row-major wall position,
// then row-major goal.
std::vector<Task> enumerate_training_tasks(int interior_size = 4);

// All connected two-wall mazes (101 for n=4) with every legal goal cell:
// 1313 tasks. Same ordering convention.
std::vector<Task> enumerate_test_tasks(int interior_size = 4);

}  // namespace gridlang
