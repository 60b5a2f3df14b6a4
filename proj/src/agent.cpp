#include "pacrl/agent.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace pacrl {

using nlohmann::json;

std::vector<std::string> AgentConfig::validate() const {
    std::vector<std::string> issues;
    if (m1 < 1) issues.push_back("m1 must be >= 1");
    if (m2 < 1) issues.push_back("m2 must be >= 1");
    if (!(epsilon1 > 0.0)) issues.push_back("epsilon1 must be > 0");
    if (!(epsilon2 > 0.0)) issues.push_back("epsilon2 must be > 0");
    if (!(epsilon2 < epsilon1 / 2.0)) issues.push_back("epsilon2 must be < epsilon1/2");
    if (!(gamma >= 0.0 && gamma < 1.0)) issues.push_back("gamma must be in [0,1)");
    if (vi_sweeps < 0) issues.push_back("vi_sweeps must be >= 1");
    return issues;
}

AlgorithmKind algorithm_from_name(const std::string& name) {
    if (name == "ddq") return AlgorithmKind::Ddq;
    if (name == "delayed_q") return AlgorithmKind::DelayedQ;
    if (name == "rmax") return AlgorithmKind::Rmax;
    throw std::runtime_error("unknown algorithm \"" + name + "\"");
}

std::string algorithm_name(AlgorithmKind kind) {
    switch (kind) {
        case AlgorithmKind::Ddq: return "ddq";
        case AlgorithmKind::DelayedQ: return "delayed_q";
        case AlgorithmKind::Rmax: return "rmax";
    }
    throw std::logic_error("bad AlgorithmKind");
}

AgentConfig degenerate_config(AlgorithmKind kind, AgentConfig base) {
    switch (kind) {
        case AlgorithmKind::Ddq: break;
        case AlgorithmKind::DelayedQ: base.m2 = AgentConfig::kInfinite; break;
        case AlgorithmKind::Rmax: base.m1 = AgentConfig::kInfinite; break;
    }
    return base;
}

DdqAgent::DdqAgent(AgentConfig cfg, int num_states, int num_actions) : cfg_(cfg) {
    if (cfg_.vi_sweeps == 0)
        cfg_.vi_sweeps = value_iteration_sweeps(cfg_.epsilon2, cfg_.gamma);
    auto issues = cfg_.validate();
    if (!issues.empty()) throw std::invalid_argument("bad agent config: " + issues.front());
    if (num_states <= 0 || num_actions <= 0)
        throw std::invalid_argument("agent needs positive state/action counts");

    const std::size_t sa = static_cast<std::size_t>(num_states) * num_actions;
    state_.q = QTable(num_states, num_actions, 1.0 / (1.0 - cfg_.gamma));
    state_.u.assign(sa, 0.0);
    state_.l.assign(sa, 0);
    state_.b.assign(sa, 0);
    state_.learn.assign(sa, 1);
    state_.n_sa.assign(sa, 0);
    state_.n_sas.assign(sa * num_states, 0);
    state_.r_sum.assign(sa, 0.0);
    state_.t_star = 0;
    state_.t = 0;
}

StepOutcome DdqAgent::observe(State s, Action a, double r, State s_next) {
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("reward outside [0,1]");

    StepOutcome out;
    out.chosen_action = a;
    out.reward = r;
    out.next_state = s_next;

    const std::size_t sa = pair_index(s, a);
    out.q_before = state_.q.q[sa];

    state_.t += 1;
    state_.n_sa[sa] += 1;
    state_.n_sas[sa * state_.q.num_states + s_next] += 1;
    state_.r_sum[sa] += r;

    if (state_.b[sa] <= state_.t_star && !state_.learn[sa]) {
        state_.learn[sa] = 1;
        out.learn_flag_transitions.push_back({s, a, false, true});
    }

    if (cfg_.m1_finite() && state_.learn[sa]) {
        if (state_.l[sa] == 0) state_.b[sa] = state_.t;
        state_.l[sa] += 1;
        state_.u[sa] += r + cfg_.gamma * state_.q.state_value(s_next);
        if (state_.l[sa] == cfg_.m1) {
            out.type1_attempted = true;
            out.attempted_update = true;
            const double target = state_.u[sa] / static_cast<double>(cfg_.m1);
            if (state_.q.q[sa] - target >= 2.0 * cfg_.epsilon1) {
                state_.q.q[sa] = target + cfg_.epsilon1;
                state_.t_star = state_.t;
                out.type1_succeeded = true;
            } else if (state_.b[sa] > state_.t_star) {
                state_.learn[sa] = 0;
                out.learn_flag_transitions.push_back({s, a, true, false});
            }
            state_.u[sa] = 0.0;
            state_.l[sa] = 0;
        }
    }

    out.reached_m2 = cfg_.m2_finite() && state_.n_sa[sa] == cfg_.m2;
    if (out.reached_m2 && state_.learn[sa]) out.attempted_update = true;
    if (out.reached_m2 || state_.t == state_.t_star) {
        state_.t_star = state_.t;
        if (cfg_.m2_finite()) {
            // with m2 infinite no pair ever qualifies for a backup, so the
            // whole sweep is skipped and the step behaves as Delayed Q-learning
            out.type2_triggered = true;
            planning_sweep(out);
        }
    }

    out.successful_timestep = out.type1_succeeded || out.reached_m2;
    out.q_after = state_.q.q[sa];
    return out;
}

void DdqAgent::planning_sweep(StepOutcome& out) {
    const int S = state_.q.num_states;
    const int A = state_.q.num_actions;

    QTable q_vl = state_.q;
    QTable next = q_vl;
    for (int sweep = 0; sweep < cfg_.vi_sweeps; ++sweep) {
        for (State s = 0; s < S; ++s) {
            for (Action a = 0; a < A; ++a) {
                const std::size_t sa = pair_index(s, a);
                if (state_.n_sa[sa] < cfg_.m2) {
                    next.q[sa] = q_vl.q[sa];
                    continue;
                }
                // maximum-likelihood model from the raw counts
                const double n = static_cast<double>(state_.n_sa[sa]);
                double acc = 0.0;
                for (State s2 = 0; s2 < S; ++s2) {
                    const long long c = state_.n_sas[sa * S + s2];
                    if (c != 0) acc += (static_cast<double>(c) / n) * q_vl.state_value(s2);
                }
                next.q[sa] = state_.r_sum[sa] / n + cfg_.gamma * acc;
            }
        }
        std::swap(q_vl, next);
    }

    for (State s = 0; s < S; ++s) {
        for (Action a = 0; a < A; ++a) {
            const std::size_t sa = pair_index(s, a);
            if (q_vl.q[sa] <= state_.q.q[sa]) {
                if (q_vl.q[sa] < state_.q.q[sa])
                    out.type2_updated_pairs.push_back({s, a, q_vl.q[sa]});
                state_.q.q[sa] = q_vl.q[sa];
            }
        }
    }
}

std::string DdqAgent::snapshot_json() const {
    json j{{"Q", state_.q.q},       {"U", state_.u},       {"l", state_.l},
           {"b", state_.b},         {"n_sa", state_.n_sa}, {"n_sas", state_.n_sas},
           {"r_sum", state_.r_sum}, {"t_star", state_.t_star}, {"t", state_.t},
           {"num_states", state_.q.num_states}, {"num_actions", state_.q.num_actions}};
    j["learn"] = json::array();
    for (auto f : state_.learn) j["learn"].push_back(f != 0);
    return j.dump();
}

DdqAgent DdqAgent::from_snapshot_json(const AgentConfig& cfg, const std::string& text) {
    json j = json::parse(text);
    DdqAgent agent(cfg, j.at("num_states").get<int>(), j.at("num_actions").get<int>());
    agent.state_.q.q = j.at("Q").get<std::vector<double>>();
    agent.state_.u = j.at("U").get<std::vector<double>>();
    agent.state_.l = j.at("l").get<std::vector<long long>>();
    agent.state_.b = j.at("b").get<std::vector<long long>>();
    agent.state_.n_sa = j.at("n_sa").get<std::vector<long long>>();
    agent.state_.n_sas = j.at("n_sas").get<std::vector<long long>>();
    agent.state_.r_sum = j.at("r_sum").get<std::vector<double>>();
    agent.state_.t_star = j.at("t_star").get<long long>();
    agent.state_.t = j.at("t").get<long long>();
    agent.state_.learn.clear();
    for (bool f : j.at("learn").get<std::vector<bool>>())
        agent.state_.learn.push_back(f ? 1 : 0);
    return agent;
}

}  // namespace pacrl
