#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace pacrl {

using State = int;
using Action = int;

/// Finite discounted MDP with dense reward and transition tables.
/// Rewards live in [0,1]; every transition row is a probability
/// distribution over next states.
struct Mdp {
    int num_states = 0;
    int num_actions = 0;
    double gamma = 0.0;
    std::vector<double> rewards;      // [s * A + a]
    std::vector<double> transitions;  // [(s * A + a) * S + s2]

    double reward(State s, Action a) const { return rewards[s * num_actions + a]; }
    double& reward(State s, Action a) { return rewards[s * num_actions + a]; }
    double trans(State s, Action a, State s2) const {
        return transitions[(static_cast<std::size_t>(s) * num_actions + a) * num_states + s2];
    }
    double& trans(State s, Action a, State s2) {
        return transitions[(static_cast<std::size_t>(s) * num_actions + a) * num_states + s2];
    }
    double v_max() const { return 1.0 / (1.0 - gamma); }

    static Mdp zeros(int num_states, int num_actions, double gamma);
};

/// Deterministic policy, one action per state.
using Policy = std::vector<Action>;

/// Dense table of state-action values.
struct QTable {
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> q;  // [s * A + a]

    QTable() = default;
    QTable(int num_states, int num_actions, double fill)
        : num_states(num_states),
          num_actions(num_actions),
          q(static_cast<std::size_t>(num_states) * num_actions, fill) {}

    double at(State s, Action a) const { return q[s * num_actions + a]; }
    double& at(State s, Action a) { return q[s * num_actions + a]; }

    /// v(s) = max_a Q(s,a)
    double state_value(State s) const;
    /// arg max_a Q(s,a); ties broken by lowest action index.
    Action greedy_action(State s) const;
    Policy greedy_policy() const;

    bool operator==(const QTable&) const = default;
};

/// Collects every violated Mdp invariant; empty iff the model is well formed.
std::vector<std::string> validate_mdp(const Mdp& m);

/// Runs `iterations` synchronous Bellman sweeps starting from q0.
/// When `backup_mask` is non-null (size |S||A|), only flagged pairs are
/// backed up; the rest keep their q0 values as fixed boundary entries.
/// Throws std::invalid_argument on iterations == 0.
QTable value_iteration(const Mdp& m, QTable q0, int iterations,
                       const std::vector<std::uint8_t>* backup_mask = nullptr);

/// Number of sweeps needed to land within eps2 of Q* from any start in
/// [0, v_max]: ceil(ln(1/(eps2(1-gamma))) / (1-gamma)).
int value_iteration_sweeps(double eps2, double gamma);

/// Sweeps until the max-norm Bellman residual is <= tolerance * (1-gamma).
QTable optimal_action_values(const Mdp& m, double tolerance);

/// Exact fixed point of v = R_pi + gamma T_pi v (direct linear solve,
/// residual verified below 1e-10).
std::vector<double> policy_state_values(const Mdp& m, const Policy& p);

/// Known state-action MDP: the source model with every pair outside
/// `known` frozen at its current Q-value through an absorbing z-state.
struct KnownMdp {
    Mdp mdp;  // states [0, num_states) are the source states, the rest are z-states
    std::vector<std::pair<State, Action>> aug_origin;  // z-state index -> source pair

    int num_source_states() const { return mdp.num_states - static_cast<int>(aug_origin.size()); }
};

/// `known` is a |S||A| membership mask. Requires q entries in [0, v_max];
/// throws std::invalid_argument otherwise.
KnownMdp build_known_mdp(const Mdp& m, const std::vector<std::uint8_t>& known, const QTable& q);

}  // namespace pacrl
