#include <stdexcept>
#include <cmath>

#include "doctest.h"
#include "pacrl/mdp.hpp"
#include "pacrl/mdp_io.hpp"
#include "test_util.hpp"

using namespace pacrl;
using namespace pacrl::testutil;

TEST_CASE("validate_mdp flags each broken invariant") {
    Mdp m = self_loop(0.5, 0.8);
    CHECK(validate_mdp(m).empty());

    Mdp bad_row = m;
    bad_row.trans(0, 0, 0) = 0.9;
    auto issues = validate_mdp(bad_row);
    REQUIRE(!issues.empty());
    CHECK(issues.front().find("row sum") != std::string::npos);

    Mdp bad_gamma = m;
    bad_gamma.gamma = 1.0;
    CHECK(!validate_mdp(bad_gamma).empty());

    Mdp bad_reward = m;
    bad_reward.reward(0, 0) = 1.5;
    CHECK(!validate_mdp(bad_reward).empty());
}

TEST_CASE("value iteration reaches the geometric-series fixed point") {
    const Mdp m = self_loop(1.0, 0.8);
    QTable q0(1, 1, 0.0);
    const QTable q = value_iteration(m, q0, 200);
    CHECK(q.at(0, 0) == doctest::Approx(5.0).epsilon(1e-9));

    CHECK_THROWS_AS(value_iteration(m, q0, 0), std::invalid_argument);
}

TEST_CASE("sweep-count formula gives 42 for the benchmark accuracy") {
    CHECK(value_iteration_sweeps(0.004 / 3.0, 0.8) == 42);
}

TEST_CASE("two-state chain has the closed-form values") {
    const Mdp m = two_state_chain(0.8);
    const QTable q = optimal_action_values(m, 1e-10);
    CHECK(q.at(0, 0) == doctest::Approx(4.0).epsilon(1e-8));
    CHECK(q.at(1, 0) == doctest::Approx(5.0).epsilon(1e-8));

    const Policy only{0, 0};
    const auto v = policy_state_values(m, only);
    CHECK(v[0] == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(v[1] == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("restricted sweeps leave excluded pairs untouched") {
    const Mdp m = two_state_chain(0.8);
    QTable q0(2, 1, 3.0);
    std::vector<std::uint8_t> mask{0, 1};  // only s1 backed up
    const QTable q = value_iteration(m, q0, 100, &mask);
    CHECK(q.at(0, 0) == 3.0);
    CHECK(q.at(1, 0) == doctest::Approx(5.0).epsilon(1e-8));
}

TEST_CASE("optimal values on trivial self-loops") {
    CHECK(optimal_action_values(self_loop(1.0, 0.8), 1e-10).at(0, 0) ==
          doctest::Approx(5.0).epsilon(1e-9));
    CHECK(optimal_action_values(self_loop(0.0, 0.8), 1e-10).at(0, 0) ==
          doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("Bellman consistency and policy dominance on random models") {
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const int S = 2 + static_cast<int>(rng.next() * 4);
        const int A = 1 + static_cast<int>(rng.next() * 3);
        const double gamma = 0.5 + 0.45 * rng.next();
        const Mdp m = random_mdp(rng, S, A, gamma);
        const double tol = 1e-9;
        const QTable q = optimal_action_values(m, tol);

        for (State s = 0; s < S; ++s) {
            for (Action a = 0; a < A; ++a) {
                double backup = m.reward(s, a);
                for (State s2 = 0; s2 < S; ++s2)
                    backup += gamma * m.trans(s, a, s2) * q.state_value(s2);
                CHECK(std::abs(q.at(s, a) - backup) <= tol);
            }
        }

        // v^pi <= v* for arbitrary policies
        Policy p(S);
        for (State s = 0; s < S; ++s) p[s] = static_cast<Action>(rng.next() * A);
        const auto v_pi = policy_state_values(m, p);
        for (State s = 0; s < S; ++s) CHECK(v_pi[s] <= q.state_value(s) + 1e-8);

        // greedy policy of Q* evaluates back to max_a Q*
        const auto v_greedy = policy_state_values(m, q.greedy_policy());
        for (State s = 0; s < S; ++s)
            CHECK(std::abs(v_greedy[s] - q.state_value(s)) <= 10 * tol + 1e-9);
    }
}

TEST_CASE("finite-sweep runs land within eps2 of the fixed point") {
    Rng rng(11);
    const double eps2 = 1e-3;
    for (int trial = 0; trial < 3; ++trial) {
        const double gamma = 0.6 + 0.1 * trial;
        const Mdp m = random_mdp(rng, 4, 2, gamma);
        const QTable q_star = optimal_action_values(m, 1e-11);

        QTable q0(4, 2, 0.0);
        for (auto& v : q0.q) v = rng.next() * m.v_max();
        const QTable q = value_iteration(m, q0, value_iteration_sweeps(eps2, gamma));
        for (std::size_t i = 0; i < q.q.size(); ++i)
            CHECK(std::abs(q.q[i] - q_star.q[i]) <= eps2);
    }
}

TEST_CASE("known-MDP construction freezes unknown pairs at their Q-value") {
    const Mdp chain = two_state_chain(0.8);

    SUBCASE("all pairs known reproduces the source model") {
        const QTable q(2, 1, 5.0);
        const KnownMdp k = build_known_mdp(chain, {1, 1}, q);
        CHECK(k.aug_origin.empty());
        CHECK(k.mdp.num_states == 2);
        CHECK(k.mdp.rewards == chain.rewards);
        CHECK(k.mdp.transitions == chain.transitions);
    }

    SUBCASE("no pairs known with Q at v_max keeps value v_max") {
        const QTable q(2, 1, 5.0);
        const KnownMdp k = build_known_mdp(chain, {0, 0}, q);
        CHECK(k.aug_origin.size() == 2);
        for (State s = 0; s < 2; ++s) CHECK(k.mdp.reward(s, 0) == doctest::Approx(1.0));
        const QTable qk = optimal_action_values(k.mdp, 1e-10);
        CHECK(qk.at(0, 0) == doctest::Approx(5.0).epsilon(1e-9));
    }

    SUBCASE("single unknown pair freezes its value exactly") {
        QTable q(2, 1, 5.0);
        q.at(0, 0) = 2.0;
        const KnownMdp k = build_known_mdp(chain, {0, 1}, q);
        REQUIRE(k.aug_origin.size() == 1);
        CHECK(k.mdp.reward(0, 0) == doctest::Approx(0.4));
        const State z = 2;
        CHECK(k.mdp.trans(0, 0, z) == 1.0);
        CHECK(k.mdp.trans(z, 0, z) == 1.0);
        const QTable qk = optimal_action_values(k.mdp, 1e-10);
        CHECK(qk.at(0, 0) == doctest::Approx(2.0).epsilon(1e-9));
    }

    SUBCASE("out-of-range Q is rejected") {
        const QTable q(2, 1, 6.0);
        CHECK_THROWS_AS(build_known_mdp(chain, {1, 1}, q), std::invalid_argument);
    }
}

TEST_CASE("known-MDP optimal values stay under v_max for random inputs") {
    Rng rng(23);
    for (int trial = 0; trial < 8; ++trial) {
        const double gamma = 0.5 + 0.4 * rng.next();
        const Mdp m = random_mdp(rng, 4, 2, gamma);
        QTable q(4, 2, 0.0);
        std::vector<std::uint8_t> known(8);
        for (std::size_t i = 0; i < known.size(); ++i) {
            q.q[i] = rng.next() * m.v_max();
            known[i] = rng.next() < 0.5;
        }
        const KnownMdp k = build_known_mdp(m, known, q);
        const QTable qk = optimal_action_values(k.mdp, 1e-9);
        for (double v : qk.q) CHECK(v <= m.v_max() + 1e-8);
    }
}

TEST_CASE("MDP json round-trips and rejects non-stochastic rows") {
    Rng rng(3);
    const Mdp m = random_mdp(rng, 3, 2, 0.9);
    const Mdp back = load_mdp_json(mdp_to_json(m));
    CHECK(back.rewards == m.rewards);
    CHECK(back.transitions == m.transitions);
    CHECK(back.gamma == m.gamma);
    CHECK(mdp_fingerprint(back) == mdp_fingerprint(m));

    Mdp broken = m;
    broken.trans(0, 0, 0) += 0.25;
    CHECK_THROWS(load_mdp_json(mdp_to_json(broken)));
}
