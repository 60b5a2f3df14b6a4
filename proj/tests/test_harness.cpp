#include <stdexcept>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "pacrl/gridworld.hpp"
#include "pacrl/harness.hpp"
#include "pacrl/mdp_io.hpp"

using namespace pacrl;

TEST_CASE("recommended parameters reproduce the hand-evaluated formulas") {
    const RecommendedParams p = recommend_params(9, 4, 0.06, 0.1, 0.8, 1.0);
    CHECK(p.epsilon1 == doctest::Approx(0.004).epsilon(1e-12));
    CHECK(p.epsilon2 == doctest::Approx(0.004 / 3.0).epsilon(1e-12));
    CHECK(p.kappa == doctest::Approx(45036.0).epsilon(1e-12));
    CHECK(p.vi_sweeps == 42);
    // frozen from an independent evaluation of the same expressions
    CHECK(p.m1 == 131349272);
    CHECK(p.m2 == 5964449616LL);

    // the emitted pair satisfies both relations at once
    CHECK(p.epsilon2 < p.epsilon1 / 2.0);
    CHECK(p.epsilon1 == doctest::Approx(3.0 * p.epsilon2));
}

TEST_CASE("recommender rejects out-of-range inputs") {
    CHECK_THROWS_AS(recommend_params(9, 4, 0.0, 0.1, 0.8, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(recommend_params(9, 4, 6.0, 0.1, 0.8, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(recommend_params(9, 4, 0.06, 0.0, 0.8, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(recommend_params(9, 4, 0.06, 1.0, 0.8, 1.0), std::invalid_argument);
}

namespace {

AgentConfig benchmark_config() {
    AgentConfig cfg;
    cfg.m1 = 65;
    cfg.m2 = 175;
    cfg.gamma = 0.8;
    cfg.epsilon1 = 0.004;
    cfg.epsilon2 = 0.004 / 3.0;
    return cfg;
}

}  // namespace

TEST_CASE("single runs are deterministic end to end") {
    const Mdp m = compile_gridworld(default_benchmark_gridworld());
    RunOptions opts;
    opts.horizon = 3000;
    opts.keep_trace = true;

    const RunResult a = run_single(m, 0, benchmark_config(), "ddq", 0.06, 7, opts);
    const RunResult b = run_single(m, 0, benchmark_config(), "ddq", 0.06, 7, opts);
    CHECK(a.to_json(false) == b.to_json(false));

    std::stringstream ta, tb;
    write_trace_jsonl(ta, a.config, 9, 4, a.trace);
    write_trace_jsonl(tb, b.config, 9, 4, b.trace);
    CHECK(ta.str() == tb.str());

    opts.horizon = 0;
    CHECK_THROWS_AS(run_single(m, 0, benchmark_config(), "ddq", 0.06, 7, opts),
                    std::invalid_argument);
}

TEST_CASE("run counters agree with the recorded trace") {
    const Mdp m = compile_gridworld(default_benchmark_gridworld());
    RunOptions opts;
    opts.horizon = 4000;
    opts.keep_trace = true;
    const RunResult res = run_single(m, 0, benchmark_config(), "ddq", 0.06, 3, opts);

    long long escapes = 0, violations = 0, attempted = 0, successes = 0;
    for (const auto& rec : res.trace) {
        escapes += rec.escape;
        violations += rec.violation;
        attempted += rec.attempted_update;
        successes += rec.successful;
    }
    CHECK(escapes == res.escape_events);
    CHECK(violations == res.violation_count);
    CHECK(attempted == res.attempted_updates);
    CHECK(successes == res.successful_timesteps);
    CHECK(res.convergence_step == res.violation_count);
    CHECK(res.convergence_step <= res.horizon);

    const AuditReport audit = invariant_audit(res.trace, res.config, 9, 4);
    CHECK(audit.hard_bounds_ok());
}

TEST_CASE("benchmarks aggregate per algorithm over a shared seed set") {
    const Mdp m = compile_gridworld(default_benchmark_gridworld());
    RunOptions opts;
    opts.horizon = 1500;

    SUBCASE("one algorithm, one seed: summary equals the run") {
        const BenchSummary s =
            run_bench(m, 0, benchmark_config(), 0.06, {AlgorithmKind::Ddq}, {5}, opts, 1);
        REQUIRE(s.runs.size() == 1);
        REQUIRE(s.per_algorithm.size() == 1);
        if (s.runs[0].converged) {
            CHECK(s.per_algorithm[0].mean ==
                  doctest::Approx(static_cast<double>(s.runs[0].convergence_step)));
        }
        CHECK(s.env_fingerprint == mdp_fingerprint(m));
    }

    SUBCASE("every (algorithm, seed) pair runs once, csv is deterministic") {
        const std::vector<AlgorithmKind> algos{AlgorithmKind::Ddq, AlgorithmKind::DelayedQ,
                                               AlgorithmKind::Rmax};
        const std::vector<std::uint64_t> seeds{1, 2, 3};
        const BenchSummary s = run_bench(m, 0, benchmark_config(), 0.06, algos, seeds, opts, 4);
        CHECK(s.runs.size() == 9);
        CHECK(s.per_algorithm.size() == 3);
        for (const auto& a : s.per_algorithm) CHECK(a.total_runs == 3);

        const BenchSummary again = run_bench(m, 0, benchmark_config(), 0.06, algos, seeds, opts, 2);
        // byte-identical up to the wallclock column, which is timing noise
        auto strip_wallclock = [](const std::string& csv) {
            std::string out;
            std::stringstream ss(csv);
            std::string line;
            while (std::getline(ss, line))
                out += line.substr(0, line.rfind(',')) + "\n";
            return out;
        };
        CHECK(strip_wallclock(s.to_csv()) == strip_wallclock(again.to_csv()));
    }
}
