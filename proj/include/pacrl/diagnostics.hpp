#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pacrl/agent.hpp"
#include "pacrl/mdp.hpp"

namespace pacrl {

/// Partition of the state-action pairs into those whose current value
/// is nearly Bellman-consistent with the true model (k1) and those
/// visited at least m2 times (k2). k = k1 | k2.
struct KnownSet {
    int num_states = 0;
    int num_actions = 0;
    std::vector<std::uint8_t> k1, k2, k;

    bool in_k(State s, Action a) const { return k[s * num_actions + a] != 0; }
};

/// Exact evaluation of both membership conditions against the true
/// model m: residual Q(s,a) - (R(s,a) + gamma sum T(s,a,s') v(s'))
/// <= 3*epsilon1, or visit count >= m2 (when m2 is finite).
KnownSet compute_known_set(const Mdp& m, const QTable& q,
                           const std::vector<long long>& visit_counts,
                           const AgentConfig& cfg);

inline bool detect_escape(const KnownSet& known, State s, Action a) {
    return !known.in_k(s, a);
}

/// True iff the greedy policy of q is worse than 4*epsilon-optimal at s:
/// v^pi(s) < v*(s) - 4*epsilon, with both sides evaluated exactly on m.
/// v_star must be the precomputed optimal state values of m.
bool pac_monitor_step(const Mdp& m, const QTable& q, const std::vector<double>& v_star,
                      State s, double epsilon);

struct Theorem1Report {
    double optimism_margin = 0.0;  // min_s (v_t(s) - v*(s) + epsilon)
    bool optimism_ok = false;
    double accuracy_margin = 0.0;  // min_s (epsilon - (v_t(s) - v^pi_{M_K}(s)))
    bool accuracy_ok = false;
};

/// Evaluates the optimism and accuracy conditions at one checkpoint,
/// building the known state-action MDP for the accuracy side.
Theorem1Report check_theorem1_conditions(const Mdp& m, const QTable& q, const KnownSet& known,
                                         const AgentConfig& cfg, double epsilon,
                                         const std::vector<double>& v_star);

/// One line of a recorded run.
struct StepRecord {
    long long t = 0;
    State s = -1;
    Action a = -1;
    double r = 0.0;
    State s_next = -1;
    bool escape = false;
    bool successful = false;
    bool violation = false;
    bool attempted_update = false;
    bool type1_attempted = false;
    bool type1_succeeded = false;
    bool type2_triggered = false;
    bool reached_m2 = false;
    double q_before = 0.0;
    double q_after = 0.0;
    std::vector<Type2Update> type2_updates;

    std::string to_json() const;
    static StepRecord from_json(const std::string& line);
};

struct BoundCheck {
    double observed = 0.0;
    double bound = 0.0;
    bool pass = true;
    bool applicable = true;  // false when an infinite sentinel disables the bound
};

/// Counts from a recorded trace compared against their analytic limits.
/// The successful-timestep and attempted-update limits are deterministic
/// consequences of the update arithmetic; the escape limit is the
/// high-probability one.
struct AuditReport {
    std::vector<long long> per_pair_successful;
    BoundCheck per_pair_successful_bound;  // worst pair vs 1 + 1/((1-gamma)*eps1)
    BoundCheck total_successful;           // vs kappa
    BoundCheck attempted_updates;          // vs |S||A|(1+kappa)
    BoundCheck escape_events;              // vs min(2*m1*kappa, |S||A|*m2)
    bool monotonicity_ok = true;           // Q non-increasing, drops >= eps1 on type-1
    bool range_ok = true;                  // Q within [0, v_max]
    long long violations = 0;

    bool hard_bounds_ok() const {
        return per_pair_successful_bound.pass && total_successful.pass &&
               attempted_updates.pass && monotonicity_ok && range_ok;
    }
    std::string to_json() const;
};

double kappa_bound(int num_states, int num_actions, double gamma, double epsilon1);

/// Replays a complete trace (t = 1,2,...) and checks every bound.
/// Throws std::runtime_error on gaps in t.
AuditReport invariant_audit(const std::vector<StepRecord>& trace, const AgentConfig& cfg,
                            int num_states, int num_actions);

void write_trace_jsonl(std::ostream& out, const AgentConfig& cfg, int num_states,
                       int num_actions, const std::vector<StepRecord>& trace);
/// Reads a trace written by write_trace_jsonl; returns the header config too.
std::vector<StepRecord> read_trace_jsonl(std::istream& in, AgentConfig& cfg_out,
                                         int& num_states_out, int& num_actions_out);

}  // namespace pacrl
