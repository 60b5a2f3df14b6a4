#include "pacrl/gridworld.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace pacrl {

using nlohmann::json;

Dir opposite(Dir d) {
    switch (d) {
        case Dir::Down: return Dir::Up;
        case Dir::Left: return Dir::Right;
        case Dir::Up: return Dir::Down;
        case Dir::Right: return Dir::Left;
    }
    throw std::logic_error("bad Dir");
}

char dir_letter(Dir d) {
    switch (d) {
        case Dir::Down: return 'd';
        case Dir::Left: return 'l';
        case Dir::Up: return 'u';
        case Dir::Right: return 'r';
    }
    throw std::logic_error("bad Dir");
}

Dir dir_from_letter(char c) {
    switch (c) {
        case 'd': return Dir::Down;
        case 'l': return Dir::Left;
        case 'u': return Dir::Up;
        case 'r': return Dir::Right;
    }
    throw std::runtime_error(std::string("unknown direction '") + c + "'");
}

int GridWorldSpec::neighbor(int cell, Dir d) const {
    const int row = (cell - 1) / width;
    const int col = (cell - 1) % width;
    int r2 = row, c2 = col;
    switch (d) {
        case Dir::Down: ++r2; break;
        case Dir::Left: --c2; break;
        case Dir::Up: --r2; break;
        case Dir::Right: ++c2; break;
    }
    if (r2 < 0 || r2 >= height || c2 < 0 || c2 >= width) return 0;
    return r2 * width + c2 + 1;
}

double GridWorldSpec::permeability(int cell, Dir d) const {
    if (neighbor(cell, d) == 0) return 0.0;  // outer border
    auto it = edge_permeability.find({cell, d});
    if (it != edge_permeability.end()) return it->second;
    return default_permeability;
}

void GridWorldSpec::set_wall(int cell, Dir d, double p) {
    edge_permeability[{cell, d}] = p;
    const int other = neighbor(cell, d);
    if (other != 0) edge_permeability[{other, opposite(d)}] = p;
}

void validate_spec(const GridWorldSpec& spec) {
    if (spec.width <= 0 || spec.height <= 0)
        throw std::runtime_error("grid: width and height must be positive");
    const int n = spec.num_cells();
    auto in_range = [n](int cell) { return cell >= 1 && cell <= n; };
    if (!in_range(spec.start_cell)) throw std::runtime_error("grid: start cell out of range");
    if (!in_range(spec.terminal_cell)) throw std::runtime_error("grid: terminal cell out of range");
    if (spec.start_cell == spec.terminal_cell)
        throw std::runtime_error("grid: start and terminal cells must differ");
    if (static_cast<int>(spec.cell_rewards.size()) != n)
        throw std::runtime_error("grid: rewards must list one value per cell");
    for (int c = 1; c <= n; ++c) {
        const double r = spec.cell_rewards[c - 1];
        if (!(r >= 0.0 && r <= 1.0))
            throw std::runtime_error("grid: reward of cell " + std::to_string(c) +
                                     " outside [0,1]");
    }
    if (!(spec.default_permeability >= 0.0 && spec.default_permeability <= 1.0))
        throw std::runtime_error("grid: default_permeability outside [0,1]");
    if (!(spec.gamma >= 0.0 && spec.gamma < 1.0)) throw std::runtime_error("grid: gamma outside [0,1)");
    for (const auto& [edge, p] : spec.edge_permeability) {
        const auto [cell, dir] = edge;
        const std::string name =
            "edge (" + std::to_string(cell) + "," + dir_letter(dir) + ")";
        if (!in_range(cell)) throw std::runtime_error("grid: " + name + " cell out of range");
        if (spec.neighbor(cell, dir) == 0)
            throw std::runtime_error("grid: " + name + " crosses the outer border");
        if (!(p >= 0.0 && p <= 1.0))
            throw std::runtime_error("grid: permeability " + std::to_string(p) + " of " + name +
                                     " outside [0,1]");
    }
}

GridWorldSpec default_benchmark_gridworld() {
    GridWorldSpec spec;
    spec.width = 3;
    spec.height = 3;
    spec.start_cell = 1;
    spec.terminal_cell = 9;
    spec.cell_rewards.assign(9, 0.0);
    spec.cell_rewards[8] = 1.0;
    spec.default_permeability = 0.9;
    spec.gamma = 0.8;
    // Low-permeability walls screening the exits of the start corner and
    // the middle of the grid, so most cells keep small optimal values and
    // the decisive distinctions concentrate near the goal.
    spec.set_wall(1, Dir::Right, 0.1);  // 1 | 2
    spec.set_wall(4, Dir::Down, 0.1);   // 4 | 7
    spec.set_wall(5, Dir::Down, 0.1);   // 5 | 8
    validate_spec(spec);
    return spec;
}

GridWorldSpec load_gridworld_spec(const std::string& text) {
    json j = json::parse(text);
    static const std::vector<std::string> allowed = {
        "width", "height", "start", "terminal", "gamma",
        "rewards", "default_permeability", "walls"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw std::runtime_error("grid: unknown field \"" + key + "\"");
    }
    GridWorldSpec spec;
    spec.width = j.at("width").get<int>();
    spec.height = j.at("height").get<int>();
    spec.start_cell = j.at("start").get<int>();
    spec.terminal_cell = j.at("terminal").get<int>();
    spec.gamma = j.at("gamma").get<double>();
    spec.cell_rewards = j.at("rewards").get<std::vector<double>>();
    if (j.contains("default_permeability"))
        spec.default_permeability = j.at("default_permeability").get<double>();
    if (j.contains("walls")) {
        for (const auto& w : j.at("walls")) {
            for (const auto& [key, value] : w.items()) {
                (void)value;
                if (key != "cell" && key != "dir" && key != "p")
                    throw std::runtime_error("grid: unknown wall field \"" + key + "\"");
            }
            const int cell = w.at("cell").get<int>();
            const std::string d = w.at("dir").get<std::string>();
            if (d.size() != 1) throw std::runtime_error("grid: bad wall dir \"" + d + "\"");
            spec.edge_permeability[{cell, dir_from_letter(d[0])}] = w.at("p").get<double>();
        }
        // a wall listed in only one direction is undirected: mirror it
        for (auto entries = spec.edge_permeability; const auto& [edge, p] : entries) {
            const auto [cell, dir] = edge;
            const int other = spec.neighbor(cell, dir);
            if (other != 0) spec.edge_permeability.try_emplace({other, opposite(dir)}, p);
        }
    }
    validate_spec(spec);
    return spec;
}

GridWorldSpec load_gridworld_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_gridworld_spec(buf.str());
}

std::string gridworld_to_json(const GridWorldSpec& spec) {
    json walls = json::array();
    for (const auto& [edge, p] : spec.edge_permeability) {
        const auto [cell, dir] = edge;
        walls.push_back(json{{"cell", cell}, {"dir", std::string(1, dir_letter(dir))}, {"p", p}});
    }
    json j{{"width", spec.width},
           {"height", spec.height},
           {"start", spec.start_cell},
           {"terminal", spec.terminal_cell},
           {"gamma", spec.gamma},
           {"rewards", spec.cell_rewards},
           {"default_permeability", spec.default_permeability},
           {"walls", std::move(walls)}};
    return j.dump();
}

Mdp compile_gridworld(const GridWorldSpec& spec) {
    validate_spec(spec);
    const int n = spec.num_cells();
    Mdp m = Mdp::zeros(n, kNumDirs, spec.gamma);
    for (int cell = 1; cell <= n; ++cell) {
        const State s = cell - 1;
        for (int ai = 0; ai < kNumDirs; ++ai) {
            const Dir d = static_cast<Dir>(ai);
            if (cell == spec.terminal_cell) {
                // episodic reset folded into the continuing MDP
                m.reward(s, ai) = spec.cell_rewards[s];
                m.trans(s, ai, spec.start_cell - 1) = 1.0;
                continue;
            }
            m.reward(s, ai) = spec.cell_rewards[s];
            const int other = spec.neighbor(cell, d);
            const double p = spec.permeability(cell, d);
            if (other != 0 && p > 0.0) {
                m.trans(s, ai, other - 1) += p;
                m.trans(s, ai, s) += 1.0 - p;
            } else {
                m.trans(s, ai, s) += 1.0;
            }
        }
    }
    auto issues = validate_mdp(m);
    if (!issues.empty()) throw std::runtime_error("compiled grid invalid: " + issues.front());
    return m;
}

std::pair<double, State> env_step(const Mdp& m, State s, Action a, Rng& rng) {
    const double u = rng.next();
    double acc = 0.0;
    State last = s;
    for (State s2 = 0; s2 < m.num_states; ++s2) {
        const double p = m.trans(s, a, s2);
        if (p == 0.0) continue;
        acc += p;
        last = s2;
        if (u < acc) return {m.reward(s, a), s2};
    }
    return {m.reward(s, a), last};  // guard against row sums a hair below 1
}

}  // namespace pacrl
