#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>

#include "pacrl/mdp.hpp"

namespace pacrl {

/// Movement directions; the action set of every compiled grid.
enum class Dir : int { Down = 0, Left = 1, Up = 2, Right = 3 };

constexpr int kNumDirs = 4;

Dir opposite(Dir d);
char dir_letter(Dir d);
Dir dir_from_letter(char c);

/// Declarative grid layout. Cells are numbered row-major from 1
/// (top-left) to width*height (bottom-right). Permeability is the
/// probability of passing through a cell boundary; unlisted interior
/// edges use default_permeability, outer-border edges are always 0.
struct GridWorldSpec {
    int width = 0;
    int height = 0;
    int start_cell = 0;     // 1-based
    int terminal_cell = 0;  // 1-based
    std::vector<double> cell_rewards;  // [cell-1]
    double default_permeability = 0.9;
    double gamma = 0.8;
    std::map<std::pair<int, Dir>, double> edge_permeability;  // directed edges

    int num_cells() const { return width * height; }
    /// 1-based neighbor label in direction d, or 0 when off the grid.
    int neighbor(int cell, Dir d) const;
    /// Effective permeability of the directed edge (cell, d).
    double permeability(int cell, Dir d) const;
    /// Sets both (cell, d) and the mirrored edge, matching an undirected wall.
    void set_wall(int cell, Dir d, double p);

    bool operator==(const GridWorldSpec&) const = default;
};

/// Throws std::runtime_error naming the failing cell/edge on violation.
void validate_spec(const GridWorldSpec& spec);

/// The 3x3 layout used by the benchmark: start at cell 1, terminal at
/// cell 9, reward 1 only at the terminal, gamma 0.8, interior edges at
/// 0.9 with a fixed set of 0.1 walls screening the direct path.
GridWorldSpec default_benchmark_gridworld();

/// JSON schema:
/// {"width","height","start","terminal","gamma","rewards":[...],
///  "default_permeability":0.9,"walls":[{"cell":int,"dir":"r","p":0.1},...]}
/// Unknown fields are rejected.
GridWorldSpec load_gridworld_spec(const std::string& text);
GridWorldSpec load_gridworld_file(const std::string& path);
std::string gridworld_to_json(const GridWorldSpec& spec);

/// Compiles to an exact MDP. Moves succeed with the edge permeability
/// and otherwise stay in place; any action at the terminal yields
/// reward 1 and resets to the start cell.
Mdp compile_gridworld(const GridWorldSpec& spec);

/// Seeded deterministic generator. std::mt19937_64 is fully specified
/// by the standard, so the draw sequence is identical across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    /// uniform double in [0,1), 53 bits of the raw draw
    double next() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 gen_;
};

/// Samples s' ~ T(s,a,.) by inverse CDF over ascending state index;
/// the reward R(s,a) is deterministic.
std::pair<double, State> env_step(const Mdp& m, State s, Action a, Rng& rng);

}  // namespace pacrl
