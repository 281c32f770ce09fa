#include "gridlang/gridworld.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace gridlang {

Cell action_offset(Action a) {
    switch (a) {
        case Action::Right: return {1, 0};
        case Action::Up:    return {0, 1};
        case Action::Left:  return {-1, 0};
        case Action::Down:  return {0, -1};
    }
    throw std::invalid_argument("unknown action");
}

const char* action_name(Action a) {
    switch (a) {
        case Action::Right: return "right";
        case Action::Up:    return "up";
        case Action::Left:  return "left";
        case Action::Down:  return "down";
    }
    return "?";
}

bool Maze::is_wall(Cell c) const {
    return std::binary_search(walls.begin(), walls.end(), c, [this](Cell a, Cell b) {
        return cell_index(a) < cell_index(b);
    });
}

Transition step(const Task& task, Cell state, Action action, const RewardScheme& rewards) {
    const Maze& maze = task.maze;
    if (!maze.inside(state) || maze.is_wall(state))
        throw std::invalid_argument("step: state is outside the maze or a wall cell");
    if (state == task.goal)
        throw std::invalid_argument("step: episode already terminated at the goal");

    Cell off = action_offset(action);
    Cell target{state.x + off.x, state.y + off.y};
    if (!maze.inside(target) || maze.is_wall(target))
        return {state, action, rewards.wall, state, false};
    if (target == task.goal)
        return {state, action, rewards.goal, target, true};
    return {state, action, rewards.step, target, false};
}

std::vector<int> distances_to(const Maze& maze, Cell target) {
    const int n = maze.interior_size;
    std::vector<int> dist(static_cast<size_t>(n) * n, -1);
    if (!maze.inside(target) || maze.is_wall(target)) return dist;
    std::deque<Cell> queue{target};
    dist[maze.cell_index(target)] = 0;
    while (!queue.empty()) {
        Cell c = queue.front();
        queue.pop_front();
        int d = dist[maze.cell_index(c)];
        for (int a = 0; a < kNumActions; ++a) {
            Cell off = action_offset(static_cast<Action>(a));
            Cell nb{c.x + off.x, c.y + off.y};
            if (!maze.inside(nb) || maze.is_wall(nb)) continue;
            int idx = maze.cell_index(nb);
            if (dist[idx] == -1) {
                dist[idx] = d + 1;
                queue.push_back(nb);
            }
        }
    }
    return dist;
}

int shortest_path_length(const Task& task) {
    auto dist = distances_to(task.maze, task.goal);
    int d = dist[task.maze.cell_index(kStart)];
    if (d < 0) throw std::invalid_argument("shortest_path_length: goal unreachable from start");
    return d;
}

bool fully_connected(const Maze& maze) {
    auto dist = distances_to(maze, kStart);
    const int n = maze.interior_size;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            Cell c{x, y};
            if (!maze.is_wall(c) && dist[maze.cell_index(c)] == -1) return false;
        }
    return true;
}

namespace {

// Row-major cell sequence, excluding the start cell.
std::vector<Cell> non_start_cells(int n) {
    std::vector<Cell> cells;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            if (!(x == 0 && y == 0)) cells.push_back({x, y});
    return cells;
}

void append_tasks(std::vector<Task>& tasks, const Maze& maze) {
    const int n = maze.interior_size;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            Cell goal{x, y};
            if (goal == kStart || maze.is_wall(goal)) continue;
            tasks.push_back({maze, goal, static_cast<int>(tasks.size())});
        }
}

}  // namespace

std::vector<Task> enumerate_training_tasks(int interior_size) {
    std::vector<Task> tasks;
    Maze empty;
    empty.interior_size = interior_size;
    empty.id = 0;
    append_tasks(tasks, empty);

    int maze_id = 1;
    for (Cell wall : non_start_cells(interior_size)) {
        Maze maze;
        maze.interior_size = interior_size;
        maze.walls = {wall};
        maze.id = maze_id++;
        append_tasks(tasks, maze);
    }
    return tasks;
}

std::vector<Task> enumerate_test_tasks(int interior_size) {
    std::vector<Task> tasks;
    auto cells = non_start_cells(interior_size);
    int maze_id = 0;
    for (size_t i = 0; i < cells.size(); ++i)
        for (size_t j = i + 1; j < cells.size(); ++j) {
            Maze maze;
            maze.interior_size = interior_size;
            maze.walls = {cells[i], cells[j]};
            std::sort(maze.walls.begin(), maze.walls.end(), [&](Cell a, Cell b) {
                return maze.cell_index(a) < maze.cell_index(b);
            });
            if (!fully_connected(maze)) continue;
            maze.id = maze_id++;
            append_tasks(tasks, maze);
        }
    return tasks;
}

}  // namespace gridlang
