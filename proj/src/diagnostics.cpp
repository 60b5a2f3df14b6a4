#include "pacrl/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace pacrl {

using nlohmann::json;

KnownSet compute_known_set(const Mdp& m, const QTable& q,
                           const std::vector<long long>& visit_counts,
                           const AgentConfig& cfg) {
    KnownSet ks;
    ks.num_states = m.num_states;
    ks.num_actions = m.num_actions;
    const std::size_t sa_count = static_cast<std::size_t>(m.num_states) * m.num_actions;
    ks.k1.assign(sa_count, 0);
    ks.k2.assign(sa_count, 0);
    ks.k.assign(sa_count, 0);

    std::vector<double> v(m.num_states);
    for (State s = 0; s < m.num_states; ++s) v[s] = q.state_value(s);

    for (State s = 0; s < m.num_states; ++s) {
        for (Action a = 0; a < m.num_actions; ++a) {
            const std::size_t sa = static_cast<std::size_t>(s) * m.num_actions + a;
            double backup = m.reward(s, a);
            for (State s2 = 0; s2 < m.num_states; ++s2) {
                const double p = m.trans(s, a, s2);
                if (p != 0.0) backup += m.gamma * p * v[s2];
            }
            if (q.at(s, a) - backup <= 3.0 * cfg.epsilon1) ks.k1[sa] = 1;
            if (cfg.m2_finite() && visit_counts[sa] >= cfg.m2) ks.k2[sa] = 1;
            ks.k[sa] = ks.k1[sa] | ks.k2[sa];
        }
    }
    return ks;
}

bool pac_monitor_step(const Mdp& m, const QTable& q, const std::vector<double>& v_star,
                      State s, double epsilon) {
    const auto v_pi = policy_state_values(m, q.greedy_policy());
    return v_pi[s] < v_star[s] - 4.0 * epsilon;
}

Theorem1Report check_theorem1_conditions(const Mdp& m, const QTable& q, const KnownSet& known,
                                         const AgentConfig& cfg, double epsilon,
                                         const std::vector<double>& v_star) {
    (void)cfg;
    Theorem1Report rep;

    double worst_optimism = std::numeric_limits<double>::infinity();
    for (State s = 0; s < m.num_states; ++s)
        worst_optimism = std::min(worst_optimism, q.state_value(s) - v_star[s] + epsilon);
    rep.optimism_margin = worst_optimism;
    rep.optimism_ok = worst_optimism >= 0.0;

    // accuracy: evaluate the greedy policy inside the known state-action
    // MDP; z-states take action 0 (all self-loop identically)
    const KnownMdp mk = build_known_mdp(m, known.k, q);
    Policy pi = q.greedy_policy();
    pi.resize(mk.mdp.num_states, 0);
    const auto v_pi_k = policy_state_values(mk.mdp, pi);
    double worst_accuracy = std::numeric_limits<double>::infinity();
    for (State s = 0; s < m.num_states; ++s)
        worst_accuracy = std::min(worst_accuracy, epsilon - (q.state_value(s) - v_pi_k[s]));
    rep.accuracy_margin = worst_accuracy;
    rep.accuracy_ok = worst_accuracy >= 0.0;
    return rep;
}

std::string StepRecord::to_json() const {
    json j{{"t", t},
           {"s", s},
           {"a", a},
           {"r", r},
           {"s_next", s_next},
           {"escape", escape},
           {"successful", successful},
           {"violation", violation},
           {"attempted", attempted_update},
           {"type1_attempted", type1_attempted},
           {"type1_succeeded", type1_succeeded},
           {"type2_triggered", type2_triggered},
           {"reached_m2", reached_m2},
           {"q_before", q_before},
           {"q_after", q_after}};
    json ups = json::array();
    for (const auto& up : type2_updates)
        ups.push_back(json{{"s", up.s}, {"a", up.a}, {"q", up.q_after}});
    j["type2_updates"] = std::move(ups);
    return j.dump();
}

StepRecord StepRecord::from_json(const std::string& line) {
    json j = json::parse(line);
    StepRecord rec;
    rec.t = j.at("t").get<long long>();
    rec.s = j.at("s").get<int>();
    rec.a = j.at("a").get<int>();
    rec.r = j.at("r").get<double>();
    rec.s_next = j.at("s_next").get<int>();
    rec.escape = j.at("escape").get<bool>();
    rec.successful = j.at("successful").get<bool>();
    rec.violation = j.at("violation").get<bool>();
    rec.attempted_update = j.at("attempted").get<bool>();
    rec.type1_attempted = j.at("type1_attempted").get<bool>();
    rec.type1_succeeded = j.at("type1_succeeded").get<bool>();
    rec.type2_triggered = j.at("type2_triggered").get<bool>();
    rec.reached_m2 = j.at("reached_m2").get<bool>();
    rec.q_before = j.at("q_before").get<double>();
    rec.q_after = j.at("q_after").get<double>();
    for (const auto& up : j.at("type2_updates"))
        rec.type2_updates.push_back(
            {up.at("s").get<int>(), up.at("a").get<int>(), up.at("q").get<double>()});
    return rec;
}

double kappa_bound(int num_states, int num_actions, double gamma, double epsilon1) {
    return static_cast<double>(num_states) * num_actions *
           (1.0 + 1.0 / ((1.0 - gamma) * epsilon1));
}

namespace {

json bound_to_json(const BoundCheck& b) {
    return json{{"observed", b.observed},
                {"bound", b.bound},
                {"pass", b.pass},
                {"applicable", b.applicable}};
}

}  // namespace

std::string AuditReport::to_json() const {
    json j{{"per_pair_successful", per_pair_successful},
           {"per_pair_successful_bound", bound_to_json(per_pair_successful_bound)},
           {"total_successful", bound_to_json(total_successful)},
           {"attempted_updates", bound_to_json(attempted_updates)},
           {"escape_events", bound_to_json(escape_events)},
           {"monotonicity_ok", monotonicity_ok},
           {"range_ok", range_ok},
           {"violations", violations},
           {"hard_bounds_ok", hard_bounds_ok()}};
    return j.dump(2);
}

AuditReport invariant_audit(const std::vector<StepRecord>& trace, const AgentConfig& cfg,
                            int num_states, int num_actions) {
    AuditReport rep;
    const std::size_t sa_count = static_cast<std::size_t>(num_states) * num_actions;
    rep.per_pair_successful.assign(sa_count, 0);
    const double vmax = 1.0 / (1.0 - cfg.gamma);
    const double kappa = kappa_bound(num_states, num_actions, cfg.gamma, cfg.epsilon1);

    long long total_successful = 0, attempted = 0, escapes = 0;
    std::vector<double> last_q(sa_count, vmax);
    const double slack = 1e-9;

    long long expected_t = 1;
    for (const auto& rec : trace) {
        if (rec.t != expected_t)
            throw std::runtime_error("malformed trace: expected t=" + std::to_string(expected_t) +
                                     ", got t=" + std::to_string(rec.t));
        ++expected_t;

        const std::size_t sa = static_cast<std::size_t>(rec.s) * num_actions + rec.a;
        if (rec.successful) {
            ++total_successful;
            ++rep.per_pair_successful[sa];
        }
        if (rec.attempted_update) ++attempted;
        if (rec.escape) ++escapes;
        if (rec.violation) ++rep.violations;

        // monotonicity and range, replayed from the recorded values
        auto check_value = [&](std::size_t pair, double value) {
            if (value > last_q[pair] + slack) rep.monotonicity_ok = false;
            if (value < -slack || value > vmax + slack) rep.range_ok = false;
            last_q[pair] = value;
        };
        if (std::abs(rec.q_before - last_q[sa]) > slack) rep.monotonicity_ok = false;
        // a type-1 success drops the pair by at least epsilon1; a type-2
        // backup in the same step can only push it further down
        if (rec.type1_succeeded && !(rec.q_before - rec.q_after >= cfg.epsilon1 - slack))
            rep.monotonicity_ok = false;
        check_value(sa, rec.q_after);
        for (const auto& up : rec.type2_updates)
            check_value(static_cast<std::size_t>(up.s) * num_actions + up.a, up.q_after);
    }

    rep.per_pair_successful_bound.observed = static_cast<double>(
        rep.per_pair_successful.empty()
            ? 0
            : *std::max_element(rep.per_pair_successful.begin(), rep.per_pair_successful.end()));
    rep.per_pair_successful_bound.bound = 1.0 + 1.0 / ((1.0 - cfg.gamma) * cfg.epsilon1);
    rep.per_pair_successful_bound.pass =
        rep.per_pair_successful_bound.observed <= rep.per_pair_successful_bound.bound;

    rep.total_successful = {static_cast<double>(total_successful), kappa,
                            static_cast<double>(total_successful) <= kappa, true};
    const double attempted_bound = num_states * num_actions * (1.0 + kappa);
    rep.attempted_updates = {static_cast<double>(attempted), attempted_bound,
                             static_cast<double>(attempted) <= attempted_bound, true};

    // Lemma-style escape limit; each infinite sentinel suppresses its side
    double escape_bound = std::numeric_limits<double>::infinity();
    if (cfg.m1_finite())
        escape_bound = std::min(escape_bound, 2.0 * static_cast<double>(cfg.m1) * kappa);
    if (cfg.m2_finite())
        escape_bound = std::min(
            escape_bound, static_cast<double>(num_states) * num_actions * static_cast<double>(cfg.m2));
    rep.escape_events.observed = static_cast<double>(escapes);
    rep.escape_events.bound = escape_bound;
    rep.escape_events.applicable = std::isfinite(escape_bound);
    rep.escape_events.pass =
        !rep.escape_events.applicable || static_cast<double>(escapes) <= escape_bound;

    return rep;
}

void write_trace_jsonl(std::ostream& out, const AgentConfig& cfg, int num_states,
                       int num_actions, const std::vector<StepRecord>& trace) {
    json header{{"type", "header"},
                {"num_states", num_states},
                {"num_actions", num_actions},
                {"m1", cfg.m1},
                {"m2", cfg.m2},
                {"m1_infinite", !cfg.m1_finite()},
                {"m2_infinite", !cfg.m2_finite()},
                {"epsilon1", cfg.epsilon1},
                {"epsilon2", cfg.epsilon2},
                {"gamma", cfg.gamma},
                {"vi_sweeps", cfg.vi_sweeps}};
    out << header.dump() << "\n";
    for (const auto& rec : trace) out << rec.to_json() << "\n";
}

std::vector<StepRecord> read_trace_jsonl(std::istream& in, AgentConfig& cfg_out,
                                         int& num_states_out, int& num_actions_out) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty trace file");
    json header = json::parse(line);
    if (header.value("type", "") != "header")
        throw std::runtime_error("trace file missing header line");
    num_states_out = header.at("num_states").get<int>();
    num_actions_out = header.at("num_actions").get<int>();
    cfg_out.m1 = header.at("m1_infinite").get<bool>() ? AgentConfig::kInfinite
                                                      : header.at("m1").get<long long>();
    cfg_out.m2 = header.at("m2_infinite").get<bool>() ? AgentConfig::kInfinite
                                                      : header.at("m2").get<long long>();
    cfg_out.epsilon1 = header.at("epsilon1").get<double>();
    cfg_out.epsilon2 = header.at("epsilon2").get<double>();
    cfg_out.gamma = header.at("gamma").get<double>();
    cfg_out.vi_sweeps = header.at("vi_sweeps").get<int>();

    std::vector<StepRecord> trace;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        trace.push_back(StepRecord::from_json(line));
    }
    return trace;
}

}  // namespace pacrl
