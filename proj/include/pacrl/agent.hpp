#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <tuple>
#include <vector>

#include "pacrl/mdp.hpp"

namespace pacrl {

/// Tunables of the DDQ update machinery. m1 drives the batched
/// model-free updates, m2 the visit threshold for model-based planning
/// sweeps. Either may be set to kInfinite to disable its branch, which
/// degenerates the agent to R-max or Delayed Q-learning respectively.
struct AgentConfig {
    static constexpr long long kInfinite = std::numeric_limits<long long>::max();

    long long m1 = 1;
    long long m2 = kInfinite;
    double epsilon1 = 0.0;
    double epsilon2 = 0.0;
    double gamma = 0.0;
    int vi_sweeps = 0;  // 0 -> derived from epsilon2 and gamma on construction

    bool m1_finite() const { return m1 != kInfinite; }
    bool m2_finite() const { return m2 != kInfinite; }

    /// Empty iff the config is usable: m1 >= 1, epsilon1 > 0,
    /// epsilon2 in (0, epsilon1/2), gamma in [0,1).
    std::vector<std::string> validate() const;
};

enum class AlgorithmKind { Ddq, DelayedQ, Rmax };

AlgorithmKind algorithm_from_name(const std::string& name);
std::string algorithm_name(AlgorithmKind kind);

/// DDQ config unchanged; DelayedQ disables planning sweeps (m2 infinite);
/// Rmax disables batched sample collection (m1 infinite).
AgentConfig degenerate_config(AlgorithmKind kind, AgentConfig base);

/// Everything the agent mutates while learning, one slot per pair.
struct AgentState {
    QTable q;                            // value estimates, start at v_max
    std::vector<double> u;               // running target sums U(s,a)
    std::vector<long long> l;            // samples gathered toward the next batch
    std::vector<long long> b;            // timestep the current batch started
    std::vector<std::uint8_t> learn;     // sample-collection flags
    std::vector<long long> n_sa;         // visit counts n(s,a)
    std::vector<long long> n_sas;        // transition counts n(s,a,s')
    std::vector<double> r_sum;           // accumulated rewards r(s,a)
    long long t_star = 0;                // most recent successful timestep
    long long t = 0;

    bool operator==(const AgentState&) const = default;
};

struct LearnFlagTransition {
    State s;
    Action a;
    bool old_value;
    bool new_value;
};

struct Type2Update {
    State s;
    Action a;
    double q_after;
};

/// Everything that happened during one observe() call.
struct StepOutcome {
    Action chosen_action = -1;  // as passed in; the agent is driven open-loop
    double reward = 0.0;
    State next_state = -1;
    bool attempted_update = false;  // learn flag up and l hit m1 or n hit m2
    bool type1_attempted = false;
    bool type1_succeeded = false;
    bool type2_triggered = false;
    bool reached_m2 = false;  // the visited pair hit exactly m2 visits
    bool successful_timestep = false;
    double q_before = 0.0;  // visited pair, before and after the step
    double q_after = 0.0;
    std::vector<Type2Update> type2_updated_pairs;
    std::vector<LearnFlagTransition> learn_flag_transitions;
};

/// The DDQ learner. Holds one AgentState and advances it one observed
/// transition at a time; the environment loop lives in the harness.
/// A single instance is single-writer; distinct agents share nothing.
class DdqAgent {
public:
    DdqAgent(AgentConfig cfg, int num_states, int num_actions);

    /// arg max_a Q(s,a), ties to the lowest action index. Const.
    Action select_action(State s) const { return state_.q.greedy_action(s); }

    /// Feeds one (s,a,r,s') transition through the full update
    /// machinery: counter maintenance, learn-flag refresh, batched
    /// type-1 update, and the planning sweep over pairs visited at
    /// least m2 times. Rejects r outside [0,1].
    StepOutcome observe(State s, Action a, double r, State s_next);

    const AgentConfig& config() const { return cfg_; }
    const AgentState& state() const { return state_; }
    int num_states() const { return state_.q.num_states; }
    int num_actions() const { return state_.q.num_actions; }

    /// Snapshot for checkpoint/resume; field names mirror the agent's
    /// internal variables (Q, U, l, b, learn, n_sa, n_sas, r_sum, t_star, t).
    std::string snapshot_json() const;
    static DdqAgent from_snapshot_json(const AgentConfig& cfg, const std::string& text);

private:
    AgentConfig cfg_;
    AgentState state_;

    std::size_t pair_index(State s, Action a) const {
        return static_cast<std::size_t>(s) * state_.q.num_actions + a;
    }
    void planning_sweep(StepOutcome& out);
};

}  // namespace pacrl
