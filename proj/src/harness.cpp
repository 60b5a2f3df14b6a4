#include "pacrl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "pacrl/gridworld.hpp"
#include "pacrl/mdp_io.hpp"

namespace pacrl {

using nlohmann::json;

std::string RecommendedParams::to_json() const {
    json j{{"epsilon1", epsilon1}, {"epsilon2", epsilon2}, {"kappa", kappa},
           {"m1_exact", m1_exact}, {"m2_exact", m2_exact}, {"m1", m1},
           {"m2", m2},             {"vi_sweeps", vi_sweeps}};
    return j.dump(2);
}

RecommendedParams recommend_params(int num_states, int num_actions, double epsilon,
                                   double delta, double gamma, double c) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma outside [0,1)");
    if (!(epsilon > 0.0 && epsilon < 1.0 / (1.0 - gamma)))
        throw std::invalid_argument("epsilon outside (0, 1/(1-gamma))");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta outside (0,1)");
    if (!(c > 0.0)) throw std::invalid_argument("c must be positive");

    RecommendedParams p;
    const double sa = static_cast<double>(num_states) * num_actions;
    p.epsilon1 = (1.0 - gamma) * epsilon / 3.0;
    p.epsilon2 = p.epsilon1 / 3.0;
    p.kappa = sa * (1.0 + 1.0 / ((1.0 - gamma) * p.epsilon1));
    p.m1_exact = std::log(8.0 * sa * (1.0 + p.kappa) / delta) /
                 (2.0 * (p.epsilon1 - 2.0 * p.epsilon2) * (p.epsilon1 - 2.0 * p.epsilon2) *
                  (1.0 - gamma) * (1.0 - gamma));
    p.m2_exact = c * (num_states + std::log(8.0 * sa / delta)) /
                 (p.epsilon2 * p.epsilon2 * std::pow(1.0 - gamma, 4));
    p.m1 = static_cast<long long>(std::ceil(p.m1_exact));
    p.m2 = static_cast<long long>(std::ceil(p.m2_exact));
    p.vi_sweeps = value_iteration_sweeps(p.epsilon2, gamma);
    return p;
}

std::string RunResult::to_json(bool include_wallclock) const {
    json j{{"algorithm", algorithm},
           {"seed", seed},
           {"horizon", horizon},
           {"epsilon", epsilon},
           {"m1", config.m1_finite() ? json(config.m1) : json("inf")},
           {"m2", config.m2_finite() ? json(config.m2) : json("inf")},
           {"gamma", config.gamma},
           {"convergence_step", convergence_step},
           {"converged", converged},
           {"violations", violation_count},
           {"type1_updates", type1_updates},
           {"type2_sweeps", type2_sweeps},
           {"attempted_updates", attempted_updates},
           {"escape_events", escape_events},
           {"successful_timesteps", successful_timesteps},
           {"optimism_ok", optimism_ok},
           {"accuracy_ok", accuracy_ok}};
    if (include_wallclock) j["wallclock_ms"] = wallclock_ms;
    return j.dump();
}

RunResult run_single(const Mdp& m, State start_state, const AgentConfig& cfg,
                     const std::string& algorithm_label, double epsilon, std::uint64_t seed,
                     const RunOptions& opts) {
    if (opts.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (opts.monitor_stride < 1) throw std::invalid_argument("monitor_stride must be >= 1");
    auto issues = validate_mdp(m);
    if (!issues.empty()) throw std::invalid_argument("invalid mdp: " + issues.front());

    const auto t0 = std::chrono::steady_clock::now();

    DdqAgent agent(cfg, m.num_states, m.num_actions);
    Rng rng(seed);
    const QTable q_star = optimal_action_values(m, 1e-9);
    std::vector<double> v_star(m.num_states);
    for (State s = 0; s < m.num_states; ++s) v_star[s] = q_star.state_value(s);

    RunResult res;
    res.algorithm = algorithm_label;
    res.seed = seed;
    res.config = agent.config();
    res.epsilon = epsilon;
    res.horizon = opts.horizon;

    long long last_violation = 0;
    State s = start_state;
    for (long long t = 1; t <= opts.horizon; ++t) {
        // K_t and the executed policy are evaluated at the top of the step
        const KnownSet known =
            compute_known_set(m, agent.state().q, agent.state().n_sa, agent.config());
        const Action a = agent.select_action(s);
        const bool escape = detect_escape(known, s, a);

        bool violation = false;
        if ((t - 1) % opts.monitor_stride == 0)
            violation = pac_monitor_step(m, agent.state().q, v_star, s, epsilon);

        const auto [r, s_next] = env_step(m, s, a, rng);
        const StepOutcome outcome = agent.observe(s, a, r, s_next);

        if (escape) ++res.escape_events;
        if (violation) {
            ++res.violation_count;
            last_violation = t;
        }
        if (outcome.type1_succeeded) ++res.type1_updates;
        if (outcome.type2_triggered) ++res.type2_sweeps;
        if (outcome.attempted_update) ++res.attempted_updates;
        if (outcome.successful_timestep) {
            ++res.successful_timesteps;
            // the known set may have changed; re-evaluate the PAC conditions
            const KnownSet known_after =
                compute_known_set(m, agent.state().q, agent.state().n_sa, agent.config());
            const Theorem1Report rep = check_theorem1_conditions(
                m, agent.state().q, known_after, agent.config(), epsilon, v_star);
            res.optimism_ok = res.optimism_ok && rep.optimism_ok;
            res.accuracy_ok = res.accuracy_ok && rep.accuracy_ok;
        }

        if (opts.keep_trace) {
            StepRecord rec;
            rec.t = t;
            rec.s = s;
            rec.a = a;
            rec.r = r;
            rec.s_next = s_next;
            rec.escape = escape;
            rec.successful = outcome.successful_timestep;
            rec.violation = violation;
            rec.attempted_update = outcome.attempted_update;
            rec.type1_attempted = outcome.type1_attempted;
            rec.type1_succeeded = outcome.type1_succeeded;
            rec.type2_triggered = outcome.type2_triggered;
            rec.reached_m2 = outcome.reached_m2;
            rec.q_before = outcome.q_before;
            rec.q_after = outcome.q_after;
            rec.type2_updates = outcome.type2_updated_pairs;
            res.trace.push_back(std::move(rec));
        }
        s = s_next;
    }

    // "Samples needed to reach 4-epsilon optimality": the count of
    // monitored steps whose greedy policy was not 4-epsilon-optimal.
    res.convergence_step = res.violation_count;
    res.converged = last_violation < opts.horizon;
    res.wallclock_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
    return res;
}

std::string BenchSummary::to_json() const {
    json algos = json::array();
    for (const auto& a : per_algorithm)
        algos.push_back(json{{"algorithm", a.algorithm},
                             {"mean_convergence_step", a.mean},
                             {"min", a.min},
                             {"max", a.max},
                             {"stddev", a.stddev},
                             {"converged_runs", a.converged_runs},
                             {"total_runs", a.total_runs}});
    json j{{"env_fingerprint", env_fingerprint}, {"seeds", seeds}, {"algorithms", algos}};
    return j.dump(2);
}

std::string BenchSummary::to_csv() const {
    std::ostringstream out;
    out << "run_id,algorithm,seed,m1,m2,epsilon,gamma,horizon,convergence_step,violations,"
           "type1_updates,type2_sweeps,attempted_updates,escape_events,wallclock_ms\n";
    for (const auto& r : runs) {
        out << r.algorithm << '-' << r.seed << ',' << r.algorithm << ',' << r.seed << ',';
        if (r.config.m1_finite())
            out << r.config.m1;
        else
            out << "inf";
        out << ',';
        if (r.config.m2_finite())
            out << r.config.m2;
        else
            out << "inf";
        out << ',' << r.epsilon << ',' << r.config.gamma << ',' << r.horizon << ','
            << r.convergence_step << ',' << r.violation_count << ',' << r.type1_updates << ','
            << r.type2_sweeps << ',' << r.attempted_updates << ',' << r.escape_events << ','
            << static_cast<long long>(r.wallclock_ms) << "\n";
    }
    return out.str();
}

BenchSummary run_bench(const Mdp& m, State start_state, const AgentConfig& base_cfg,
                       double epsilon, const std::vector<AlgorithmKind>& algorithms,
                       const std::vector<std::uint64_t>& seeds, const RunOptions& opts,
                       int workers) {
    if (seeds.empty()) throw std::invalid_argument("run_bench needs at least one seed");
    if (algorithms.empty()) throw std::invalid_argument("run_bench needs at least one algorithm");

    struct Job {
        AlgorithmKind kind;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (AlgorithmKind kind : algorithms)
        for (std::uint64_t seed : seeds) jobs.push_back({kind, seed});

    std::vector<RunResult> results(jobs.size());
    std::vector<std::string> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            try {
                const AgentConfig cfg = degenerate_config(jobs[i].kind, base_cfg);
                results[i] = run_single(m, start_state, cfg, algorithm_name(jobs[i].kind),
                                        epsilon, jobs[i].seed, opts);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    int n_workers = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
    n_workers = std::max(1, std::min<int>(n_workers, static_cast<int>(jobs.size())));
    {
        std::vector<std::jthread> pool;
        for (int i = 0; i < n_workers; ++i) pool.emplace_back(work);
    }
    for (std::size_t i = 0; i < jobs.size(); ++i)
        if (!errors[i].empty())
            throw std::runtime_error("run (" + algorithm_name(jobs[i].kind) + ", seed " +
                                     std::to_string(jobs[i].seed) + ") failed: " + errors[i]);

    BenchSummary summary;
    summary.env_fingerprint = mdp_fingerprint(m);
    summary.seeds = seeds;
    summary.runs = std::move(results);

    for (AlgorithmKind kind : algorithms) {
        BenchAlgoSummary a;
        a.algorithm = algorithm_name(kind);
        double sum = 0.0, sum_sq = 0.0;
        a.min = std::numeric_limits<double>::infinity();
        a.max = -std::numeric_limits<double>::infinity();
        for (const auto& r : summary.runs) {
            if (r.algorithm != a.algorithm) continue;
            ++a.total_runs;
            if (!r.converged) continue;  // excluded from the mean, reported in counts
            ++a.converged_runs;
            const double x = static_cast<double>(r.convergence_step);
            sum += x;
            sum_sq += x * x;
            a.min = std::min(a.min, x);
            a.max = std::max(a.max, x);
        }
        if (a.converged_runs > 0) {
            a.mean = sum / a.converged_runs;
            a.stddev = std::sqrt(std::max(0.0, sum_sq / a.converged_runs - a.mean * a.mean));
        }
        summary.per_algorithm.push_back(a);
    }
    return summary;
}

}  // namespace pacrl
