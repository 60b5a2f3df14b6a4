#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pacrl/agent.hpp"
#include "pacrl/diagnostics.hpp"
#include "pacrl/mdp.hpp"

namespace pacrl {

/// Theoretical parameter settings derived from the target accuracy
/// epsilon and failure probability delta. The m1/m2 values are the
/// analytic ones and are typically far larger than practical settings;
/// callers override them freely.
struct RecommendedParams {
    double epsilon1 = 0.0;   // (1-gamma)*epsilon/3
    double epsilon2 = 0.0;   // epsilon1/3
    double kappa = 0.0;      // |S||A|(1 + 1/((1-gamma)*epsilon1))
    double m1_exact = 0.0;
    double m2_exact = 0.0;
    long long m1 = 0;        // ceil of the exact values
    long long m2 = 0;
    int vi_sweeps = 0;

    std::string to_json() const;
};

/// Rejects epsilon outside (0, 1/(1-gamma)) and delta outside (0,1).
/// c scales the m2 formula's unspecified constant.
RecommendedParams recommend_params(int num_states, int num_actions, double epsilon,
                                   double delta, double gamma, double c);

struct RunOptions {
    long long horizon = 50000;
    int monitor_stride = 1;   // steps between optimality checks
    bool keep_trace = false;  // retain per-step records in the result
};

struct RunResult {
    std::string algorithm;
    std::uint64_t seed = 0;
    AgentConfig config;
    double epsilon = 0.0;
    long long horizon = 0;
    long long convergence_step = 0;  // count of 4eps-suboptimal steps; 0 if none
    bool converged = false;          // false when violations persist to the horizon
    long long violation_count = 0;
    long long type1_updates = 0;
    long long type2_sweeps = 0;
    long long attempted_updates = 0;
    long long escape_events = 0;
    long long successful_timesteps = 0;
    bool optimism_ok = true;   // held at every successful-timestep checkpoint
    bool accuracy_ok = true;
    double wallclock_ms = 0.0;
    std::vector<StepRecord> trace;  // only when keep_trace

    std::string to_json(bool include_wallclock = true) const;
};

/// Drives select_action -> env_step -> observe for `horizon` steps with
/// per-step known-set/escape tracking and optimality monitoring.
/// Deterministic given (m, cfg, seed, horizon, stride).
RunResult run_single(const Mdp& m, State start_state, const AgentConfig& cfg,
                     const std::string& algorithm_label, double epsilon, std::uint64_t seed,
                     const RunOptions& opts);

struct BenchAlgoSummary {
    std::string algorithm;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    double stddev = 0.0;
    int converged_runs = 0;
    int total_runs = 0;
};

struct BenchSummary {
    std::string env_fingerprint;
    std::vector<std::uint64_t> seeds;
    std::vector<BenchAlgoSummary> per_algorithm;
    std::vector<RunResult> runs;  // ordered by (algorithm, seed)

    std::string to_json() const;
    /// Fixed columns: run_id, algorithm, seed, m1, m2, epsilon, gamma,
    /// horizon, convergence_step, violations, type1_updates, type2_sweeps,
    /// attempted_updates, escape_events, wallclock_ms.
    std::string to_csv() const;
};

/// Runs every (algorithm, seed) pair on the same environment, in
/// parallel up to `workers`, aggregating in deterministic order.
BenchSummary run_bench(const Mdp& m, State start_state, const AgentConfig& base_cfg,
                       double epsilon, const std::vector<AlgorithmKind>& algorithms,
                       const std::vector<std::uint64_t>& seeds, const RunOptions& opts,
                       int workers = 0);

}  // namespace pacrl
