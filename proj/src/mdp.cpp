#include "pacrl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pacrl {

Mdp Mdp::zeros(int num_states, int num_actions, double gamma) {
    Mdp m;
    m.num_states = num_states;
    m.num_actions = num_actions;
    m.gamma = gamma;
    m.rewards.assign(static_cast<std::size_t>(num_states) * num_actions, 0.0);
    m.transitions.assign(static_cast<std::size_t>(num_states) * num_actions * num_states, 0.0);
    return m;
}

double QTable::state_value(State s) const {
    double best = q[s * num_actions];
    for (Action a = 1; a < num_actions; ++a) best = std::max(best, at(s, a));
    return best;
}

Action QTable::greedy_action(State s) const {
    Action best = 0;
    for (Action a = 1; a < num_actions; ++a)
        if (at(s, a) > at(s, best)) best = a;
    return best;
}

Policy QTable::greedy_policy() const {
    Policy p(num_states);
    for (State s = 0; s < num_states; ++s) p[s] = greedy_action(s);
    return p;
}

std::vector<std::string> validate_mdp(const Mdp& m) {
    std::vector<std::string> issues;
    if (m.num_states <= 0) issues.push_back("num_states must be positive");
    if (m.num_actions <= 0) issues.push_back("num_actions must be positive");
    if (!(m.gamma >= 0.0 && m.gamma < 1.0))
        issues.push_back("gamma " + std::to_string(m.gamma) + " outside [0,1)");
    if (!issues.empty()) return issues;

    const std::size_t sa = static_cast<std::size_t>(m.num_states) * m.num_actions;
    if (m.rewards.size() != sa) {
        issues.push_back("rewards size mismatch");
        return issues;
    }
    if (m.transitions.size() != sa * m.num_states) {
        issues.push_back("transitions size mismatch");
        return issues;
    }
    for (State s = 0; s < m.num_states; ++s) {
        for (Action a = 0; a < m.num_actions; ++a) {
            const double r = m.reward(s, a);
            if (!(r >= 0.0 && r <= 1.0))
                issues.push_back("R(" + std::to_string(s) + "," + std::to_string(a) +
                                 ") = " + std::to_string(r) + " outside [0,1]");
            double row_sum = 0.0;
            for (State s2 = 0; s2 < m.num_states; ++s2) {
                const double p = m.trans(s, a, s2);
                if (!(p >= 0.0 && p <= 1.0))
                    issues.push_back("T(" + std::to_string(s) + "," + std::to_string(a) + "," +
                                     std::to_string(s2) + ") = " + std::to_string(p) +
                                     " outside [0,1]");
                row_sum += p;
            }
            if (std::abs(row_sum - 1.0) > 1e-9)
                issues.push_back("row sum T(" + std::to_string(s) + "," + std::to_string(a) +
                                 ",.) = " + std::to_string(row_sum) + " != 1");
        }
    }
    return issues;
}

namespace {

// One synchronous Bellman sweep of `src` into `dst`. Pairs excluded by
// `mask` keep their `src` value.
void bellman_sweep(const Mdp& m, const QTable& src, QTable& dst,
                   const std::vector<std::uint8_t>* mask) {
    for (State s = 0; s < m.num_states; ++s) {
        for (Action a = 0; a < m.num_actions; ++a) {
            if (mask && !(*mask)[s * m.num_actions + a]) {
                dst.at(s, a) = src.at(s, a);
                continue;
            }
            double acc = 0.0;
            for (State s2 = 0; s2 < m.num_states; ++s2) {
                const double p = m.trans(s, a, s2);
                if (p != 0.0) acc += p * src.state_value(s2);
            }
            dst.at(s, a) = m.reward(s, a) + m.gamma * acc;
        }
    }
}

}  // namespace

QTable value_iteration(const Mdp& m, QTable q0, int iterations,
                       const std::vector<std::uint8_t>* backup_mask) {
    if (iterations <= 0) throw std::invalid_argument("value_iteration: iterations must be >= 1");
    QTable next = q0;
    for (int i = 0; i < iterations; ++i) {
        bellman_sweep(m, q0, next, backup_mask);
        std::swap(q0, next);
    }
    return q0;
}

int value_iteration_sweeps(double eps2, double gamma) {
    return static_cast<int>(std::ceil(std::log(1.0 / (eps2 * (1.0 - gamma))) / (1.0 - gamma)));
}

QTable optimal_action_values(const Mdp& m, double tolerance) {
    QTable q(m.num_states, m.num_actions, 0.0);
    QTable next = q;
    const double stop = tolerance * (1.0 - m.gamma);
    for (;;) {
        bellman_sweep(m, q, next, nullptr);
        double delta = 0.0;
        for (std::size_t i = 0; i < q.q.size(); ++i)
            delta = std::max(delta, std::abs(next.q[i] - q.q[i]));
        std::swap(q, next);
        // residual of the new iterate is at most gamma * delta
        if (delta <= stop) return q;
    }
}

std::vector<double> policy_state_values(const Mdp& m, const Policy& p) {
    const int n = m.num_states;
    // Solve (I - gamma T_pi) v = R_pi by Gaussian elimination with
    // partial pivoting.
    std::vector<double> mat(static_cast<std::size_t>(n) * n, 0.0);
    std::vector<double> rhs(n, 0.0);
    for (State s = 0; s < n; ++s) {
        const Action a = p[s];
        rhs[s] = m.reward(s, a);
        for (State s2 = 0; s2 < n; ++s2)
            mat[static_cast<std::size_t>(s) * n + s2] = (s == s2 ? 1.0 : 0.0) - m.gamma * m.trans(s, a, s2);
    }
    auto idx = [n](int r, int c) { return static_cast<std::size_t>(r) * n + c; };
    std::vector<double> a = mat;
    std::vector<double> v = rhs;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int row = col + 1; row < n; ++row)
            if (std::abs(a[idx(row, col)]) > std::abs(a[idx(piv, col)])) piv = row;
        if (piv != col) {
            for (int k = col; k < n; ++k) std::swap(a[idx(col, k)], a[idx(piv, k)]);
            std::swap(v[col], v[piv]);
        }
        const double d = a[idx(col, col)];
        for (int row = col + 1; row < n; ++row) {
            const double f = a[idx(row, col)] / d;
            if (f == 0.0) continue;
            for (int k = col; k < n; ++k) a[idx(row, k)] -= f * a[idx(col, k)];
            v[row] -= f * v[col];
        }
    }
    for (int row = n - 1; row >= 0; --row) {
        double acc = v[row];
        for (int k = row + 1; k < n; ++k) acc -= a[idx(row, k)] * v[k];
        v[row] = acc / a[idx(row, row)];
    }
    // verify the solve; I - gamma T_pi is well conditioned for gamma < 1
    double residual = 0.0;
    for (int row = 0; row < n; ++row) {
        double acc = -rhs[row];
        for (int k = 0; k < n; ++k) acc += mat[idx(row, k)] * v[k];
        residual = std::max(residual, std::abs(acc));
    }
    if (residual > 1e-10) throw std::runtime_error("policy_state_values: solve residual too large");
    return v;
}

KnownMdp build_known_mdp(const Mdp& m, const std::vector<std::uint8_t>& known, const QTable& q) {
    const double vmax = m.v_max();
    for (double value : q.q)
        if (!(value >= 0.0 && value <= vmax + 1e-12))
            throw std::invalid_argument("build_known_mdp: Q entry outside [0, v_max]");

    KnownMdp out;
    out.aug_origin.clear();
    for (State s = 0; s < m.num_states; ++s)
        for (Action a = 0; a < m.num_actions; ++a)
            if (!known[s * m.num_actions + a]) out.aug_origin.emplace_back(s, a);

    const int n_aug = static_cast<int>(out.aug_origin.size());
    const int n = m.num_states + n_aug;
    out.mdp = Mdp::zeros(n, m.num_actions, m.gamma);

    // known pairs copy the source model
    for (State s = 0; s < m.num_states; ++s) {
        for (Action a = 0; a < m.num_actions; ++a) {
            if (known[s * m.num_actions + a]) {
                out.mdp.reward(s, a) = m.reward(s, a);
                for (State s2 = 0; s2 < m.num_states; ++s2)
                    out.mdp.trans(s, a, s2) = m.trans(s, a, s2);
            }
        }
    }
    // unknown pairs freeze Q(s,a) through an absorbing z-state
    for (int z = 0; z < n_aug; ++z) {
        const auto [s, a] = out.aug_origin[z];
        const State zs = m.num_states + z;
        const double frozen = q.at(s, a) * (1.0 - m.gamma);
        out.mdp.reward(s, a) = frozen;
        out.mdp.trans(s, a, zs) = 1.0;
        for (Action az = 0; az < m.num_actions; ++az) {
            out.mdp.reward(zs, az) = frozen;
            out.mdp.trans(zs, az, zs) = 1.0;
        }
    }
    return out;
}

}  // namespace pacrl
