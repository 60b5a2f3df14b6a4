// Command-line experiment runner for the tabular PAC-RL toolkit.
//
// Subcommands:
//   solve      print Q* and the greedy policy of an MDP file
//   run        single learning run with optional JSONL trace
//   bench      multi-seed comparison of ddq / delayed_q / rmax
//   recommend  theoretical parameter settings for given epsilon/delta
//   audit      replay a trace and check every analytic bound

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "pacrl/agent.hpp"
#include "pacrl/diagnostics.hpp"
#include "pacrl/gridworld.hpp"
#include "pacrl/harness.hpp"
#include "pacrl/mdp_io.hpp"

namespace {

using namespace pacrl;

// Accepts either a grid spec or a raw MDP interchange file.
struct LoadedEnv {
    Mdp mdp;
    State start = 0;
};

LoadedEnv load_env(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    if (text.find("\"width\"") != std::string::npos) {
        const GridWorldSpec spec = load_gridworld_spec(text);
        return {compile_gridworld(spec), spec.start_cell - 1};
    }
    return {load_mdp_json(text), 0};
}

AgentConfig make_config(double m1, double m2, double epsilon, double gamma, int vi_sweeps) {
    AgentConfig cfg;
    cfg.m1 = m1 <= 0 ? AgentConfig::kInfinite : static_cast<long long>(m1);
    cfg.m2 = m2 <= 0 ? AgentConfig::kInfinite : static_cast<long long>(m2);
    cfg.epsilon1 = (1.0 - gamma) * epsilon / 3.0;
    cfg.epsilon2 = cfg.epsilon1 / 3.0;
    cfg.gamma = gamma;
    cfg.vi_sweeps = vi_sweeps;
    return cfg;
}

std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        const auto dots = tok.find("..");
        if (dots != std::string::npos) {
            const std::uint64_t lo = std::stoull(tok.substr(0, dots));
            const std::uint64_t hi = std::stoull(tok.substr(dots + 2));
            for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
        } else if (!tok.empty()) {
            seeds.push_back(std::stoull(tok));
        }
    }
    return seeds;
}

int cmd_solve(const std::string& env_path) {
    const LoadedEnv env = load_env(env_path);
    const QTable q = optimal_action_values(env.mdp, 1e-9);
    std::cout << "state  v*        pi*   Q*(s,.)\n";
    for (State s = 0; s < env.mdp.num_states; ++s) {
        std::cout << s << "  " << q.state_value(s) << "  " << q.greedy_action(s) << "  [";
        for (Action a = 0; a < env.mdp.num_actions; ++a)
            std::cout << (a ? ", " : "") << q.at(s, a);
        std::cout << "]\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tabular PAC reinforcement-learning experiment runner"};
    app.require_subcommand(1);

    std::string env_path, algo = "ddq", algos_csv = "ddq,delayed_q,rmax";
    std::string trace_path, csv_path, seeds_spec = "1..10";
    double m1 = 65, m2 = 175, epsilon = 0.06, delta = 0.1, gamma = 0.8, c = 1.0;
    std::uint64_t seed = 1;
    long long horizon = 50000;
    int states = 9, actions = 4, stride = 1, workers = 0, vi_sweeps = 0;

    auto* solve = app.add_subcommand("solve", "print Q* and pi* of an MDP or grid file");
    solve->add_option("mdp", env_path, "environment file (grid spec or MDP json)")->required();

    auto* run = app.add_subcommand("run", "single learning run");
    run->add_option("--env", env_path)->required();
    run->add_option("--algo", algo, "ddq | delayed_q | rmax");
    run->add_option("--m1", m1, "type-1 batch size (<=0 for infinite)");
    run->add_option("--m2", m2, "type-2 visit threshold (<=0 for infinite)");
    run->add_option("--epsilon", epsilon);
    run->add_option("--seed", seed);
    run->add_option("--horizon", horizon);
    run->add_option("--stride", stride, "steps between optimality checks");
    run->add_option("--vi-sweeps", vi_sweeps, "override planning sweep count");
    run->add_option("--trace", trace_path, "write JSONL trace here");

    auto* bench = app.add_subcommand("bench", "multi-seed benchmark");
    bench->add_option("--env", env_path)->required();
    bench->add_option("--algos", algos_csv, "comma separated subset of ddq,delayed_q,rmax");
    bench->add_option("--seeds", seeds_spec, "e.g. 1..10 or 3,5,8");
    bench->add_option("--m1", m1);
    bench->add_option("--m2", m2);
    bench->add_option("--epsilon", epsilon);
    bench->add_option("--horizon", horizon);
    bench->add_option("--stride", stride);
    bench->add_option("--vi-sweeps", vi_sweeps);
    bench->add_option("--workers", workers, "0 = hardware concurrency");
    bench->add_option("--csv", csv_path, "write per-run CSV here");

    auto* recommend = app.add_subcommand("recommend", "theoretical parameter settings");
    recommend->add_option("--states", states)->required();
    recommend->add_option("--actions", actions)->required();
    recommend->add_option("--epsilon", epsilon)->required();
    recommend->add_option("--delta", delta);
    recommend->add_option("--gamma", gamma)->required();
    recommend->add_option("--c", c, "constant in the m2 formula");

    auto* audit = app.add_subcommand("audit", "check lemma bounds over a recorded trace");
    audit->add_option("--trace", trace_path)->required();
    audit->add_option("--env", env_path, "unused for the hard bounds, kept for symmetry");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve) return cmd_solve(env_path);

        if (*run) {
            const LoadedEnv env = load_env(env_path);
            AgentConfig cfg = degenerate_config(
                algorithm_from_name(algo),
                make_config(m1, m2, epsilon, env.mdp.gamma, vi_sweeps));
            RunOptions opts;
            opts.horizon = horizon;
            opts.monitor_stride = stride;
            opts.keep_trace = !trace_path.empty();
            const RunResult res =
                run_single(env.mdp, env.start, cfg, algo, epsilon, seed, opts);
            if (!trace_path.empty()) {
                std::ofstream out(trace_path);
                write_trace_jsonl(out, cfg, env.mdp.num_states, env.mdp.num_actions, res.trace);
            }
            std::cout << res.to_json() << "\n";
            return 0;
        }

        if (*bench) {
            const LoadedEnv env = load_env(env_path);
            const AgentConfig cfg = make_config(m1, m2, epsilon, env.mdp.gamma, vi_sweeps);
            std::vector<AlgorithmKind> kinds;
            std::stringstream ss(algos_csv);
            std::string tok;
            while (std::getline(ss, tok, ','))
                if (!tok.empty()) kinds.push_back(algorithm_from_name(tok));
            RunOptions opts;
            opts.horizon = horizon;
            opts.monitor_stride = stride;
            const BenchSummary summary = run_bench(env.mdp, env.start, cfg, epsilon, kinds,
                                                   parse_seeds(seeds_spec), opts, workers);
            if (!csv_path.empty()) {
                std::ofstream out(csv_path);
                out << summary.to_csv();
            }
            std::cout << summary.to_json() << "\n";
            return 0;
        }

        if (*recommend) {
            std::cout << recommend_params(states, actions, epsilon, delta, gamma, c).to_json()
                      << "\n";
            return 0;
        }

        if (*audit) {
            std::ifstream in(trace_path);
            if (!in) throw std::runtime_error("cannot open " + trace_path);
            AgentConfig cfg;
            int ns = 0, na = 0;
            const auto trace = read_trace_jsonl(in, cfg, ns, na);
            const AuditReport rep = invariant_audit(trace, cfg, ns, na);
            std::cout << rep.to_json() << "\n";
            return rep.hard_bounds_ok() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
