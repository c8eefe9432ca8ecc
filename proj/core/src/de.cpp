#include "eemimo/de.hpp"

#include "eemimo/errors.hpp"
#include "eemimo/ops.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace eemimo {

namespace {

// Phi from PhiTilde, then the fresh PhiTilde from that Phi.
void fixed_point_map(const UserStats &user, std::span<const double> lambda,
                     std::span<const double> kbar, std::span<const double> phi_tilde, DiagVec &phi,
                     DiagVec &phi_tilde_next) {
    const auto N = user.num_rx;
    const auto M = user.num_beams();
    DiagVec y(N);
    for (std::size_t n = 0; n < N; ++n)
        y[n] = 1.0 / (phi_tilde[n] * kbar[n]);
    const auto t = xi_op(user, y);
    DiagVec z(M);
    for (std::size_t m = 0; m < M; ++m) {
        phi[m] = 1.0 + t[m] * lambda[m];
        z[m] = lambda[m] / phi[m];
    }
    const auto s = pi_op(user, z);
    for (std::size_t n = 0; n < N; ++n)
        phi_tilde_next[n] = 1.0 + s[n] / kbar[n];
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double r = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        r = std::max(r, std::abs(a[i] - b[i]));
    return r;
}

double max_log_ratio(std::span<const double> a, std::span<const double> b) {
    double r = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        r = std::max(r, std::abs(std::log(a[i] / b[i])));
    return r;
}

// Newton direction for log PhiTilde = log g(PhiTilde) in y = log PhiTilde:
// solves (I - Jy) d = log g - y, where Jy[n][q] = J[n][q] PhiTilde_q / g_n and
// J is the Jacobian of g. `phi` is Phi at the current PhiTilde.
DiagVec newton_direction(const UserStats &user, std::span<const double> lambda,
                         std::span<const double> kbar, std::span<const double> phi_tilde,
                         std::span<const double> phi, std::span<const double> next) {
    const auto N = static_cast<Eigen::Index>(user.num_rx);
    const auto M = user.num_beams();
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(N, N);
    for (Eigen::Index n = 0; n < N; ++n)
        for (Eigen::Index q = 0; q < N; ++q) {
            const double *rn = user.omega.data() + n * static_cast<Eigen::Index>(M);
            const double *rq = user.omega.data() + q * static_cast<Eigen::Index>(M);
            double acc = 0.0;
            for (std::size_t m = 0; m < M; ++m)
                acc += rn[m] * rq[m] * lambda[m] * lambda[m] / (phi[m] * phi[m]);
            a(n, q) -= acc / (kbar[n] * kbar[q] * phi_tilde[q] * next[n]);
        }
    Eigen::VectorXd r(N);
    for (Eigen::Index n = 0; n < N; ++n)
        r(n) = std::log(next[n] / phi_tilde[n]);
    const Eigen::VectorXd d = a.partialPivLu().solve(r);
    return DiagVec(d.data(), d.data() + N);
}

} // namespace

DEState de_fixed_point(const UserStats &user, std::span<const double> lambda,
                       std::span<const double> kbar, const SolverConfig &cfg) {
    const auto N = user.num_rx;
    const auto M = user.num_beams();
    if (lambda.size() != M || kbar.size() != N)
        throw DimensionMismatch("de_fixed_point: lambda/kbar lengths do not match omega");

    DEState st;
    st.kbar.assign(kbar.begin(), kbar.end());
    st.phi.assign(M, 1.0);
    st.phi_tilde.assign(N, 1.0);
    DiagVec next(N);
    DiagVec trial(N);
    DiagVec trial_phi(M);
    DiagVec trial_next(N);

    double theta = cfg.de_damping;
    double prev = std::numeric_limits<double>::infinity();
    bool converged = false;
    fixed_point_map(user, lambda, kbar, st.phi_tilde, st.phi, next);
    for (std::size_t u = 1; u <= cfg.max_iter_de; ++u) {
        const double res = max_abs_diff(next, st.phi_tilde);
        st.iterations = u - 1;
        st.residual = res;
        if (res <= cfg.eps_de) {
            converged = true;
            break;
        }
        bool stepped = false;
        if (cfg.de_newton) {
            // Backtracking on the log residual, which keeps measuring progress
            // when PhiTilde is large.
            const double log_res = max_log_ratio(next, st.phi_tilde);
            const auto d = newton_direction(user, lambda, kbar, st.phi_tilde, st.phi, next);
            for (double a = 1.0; a >= 1.0 / 1024.0 && !stepped; a *= 0.5) {
                bool ok = true;
                for (std::size_t n = 0; n < N; ++n) {
                    trial[n] = std::max(1.0, st.phi_tilde[n] * std::exp(a * d[n]));
                    ok = ok && std::isfinite(trial[n]);
                }
                if (!ok)
                    continue;
                fixed_point_map(user, lambda, kbar, trial, trial_phi, trial_next);
                if (max_log_ratio(trial_next, trial) < log_res) {
                    st.phi_tilde = trial;
                    st.phi = trial_phi;
                    next = trial_next;
                    stepped = true;
                }
            }
        }
        if (!stepped) {
            if (res > prev && theta > 1.0 / 64.0)
                theta *= 0.5;
            for (std::size_t n = 0; n < N; ++n)
                st.phi_tilde[n] = (1.0 - theta) * st.phi_tilde[n] + theta * next[n];
            fixed_point_map(user, lambda, kbar, st.phi_tilde, st.phi, next);
        }
        prev = res;
    }
    if (!converged)
        throw NoConvergence("de_fixed_point", cfg.max_iter_de, max_abs_diff(next, st.phi_tilde));

    DiagVec y(N);
    for (std::size_t n = 0; n < N; ++n)
        y[n] = 1.0 / (st.phi_tilde[n] * kbar[n]);
    st.gamma = xi_op(user, y);
    DiagVec z(M);
    for (std::size_t m = 0; m < M; ++m)
        z[m] = lambda[m] / st.phi[m];
    st.gamma_tilde = pi_op(user, z);
    return st;
}

DEState de_fixed_point(const ChannelStats &stats, const PowerAllocation &alloc, std::size_t k,
                       const SolverConfig &cfg) {
    const auto kb = kbar(stats, alloc, k);
    return de_fixed_point(stats.users[k], alloc.lambdas[k], kb, cfg);
}

std::vector<DEState> de_fixed_points(const ChannelStats &stats, const PowerAllocation &alloc,
                                     const SolverConfig &cfg) {
    const auto kbars = all_kbar(stats, alloc);
    std::vector<DEState> out;
    out.reserve(stats.users.size());
    for (std::size_t k = 0; k < stats.users.size(); ++k)
        out.push_back(de_fixed_point(stats.users[k], alloc.lambdas[k], kbars[k], cfg));
    return out;
}

double de_residual(const UserStats &user, std::span<const double> lambda, const DEState &state) {
    DiagVec phi(user.num_beams());
    DiagVec next(user.num_rx);
    fixed_point_map(user, lambda, state.kbar, state.phi_tilde, phi, next);
    return std::max(max_abs_diff(next, state.phi_tilde), max_abs_diff(phi, state.phi));
}

double de_rate_plus(const ChannelStats &stats, const PowerAllocation &alloc, std::size_t k,
                    const DEState &state) {
    return de_net_rate(alloc.lambdas[k], state) + rate_minus(stats, alloc, k);
}

double de_net_rate(std::span<const double> lambda, const DEState &state) {
    double r = 0.0;
    for (std::size_t m = 0; m < lambda.size(); ++m)
        r += std::log1p(state.gamma[m] * lambda[m]);
    for (std::size_t n = 0; n < state.kbar.size(); ++n)
        r += std::log1p(state.gamma_tilde[n] / state.kbar[n]) - (1.0 - 1.0 / state.phi_tilde[n]);
    return r;
}

std::vector<double> de_net_rates(const ChannelStats &stats, const PowerAllocation &alloc,
                                 const SolverConfig &cfg) {
    const auto states = de_fixed_points(stats, alloc, cfg);
    std::vector<double> rates(states.size());
    for (std::size_t k = 0; k < states.size(); ++k)
        rates[k] = de_net_rate(alloc.lambdas[k], states[k]);
    return rates;
}

double de_sum_rate(const ChannelStats &stats, const PowerAllocation &alloc,
                   const SolverConfig &cfg) {
    const auto rates = de_net_rates(stats, alloc, cfg);
    return std::accumulate(rates.begin(), rates.end(), 0.0);
}

double de_ee(const ChannelStats &stats, const PowerModel &pm, const PowerAllocation &alloc,
             const SolverConfig &cfg) {
    return ee_value(pm, stats.num_bs_antennas, alloc.total_power(),
                    de_sum_rate(stats, alloc, cfg));
}

DiagVec de_gradient_own(const DEState &state, std::span<const double> lambda) {
    DiagVec g(lambda.size());
    for (std::size_t m = 0; m < lambda.size(); ++m)
        g[m] = state.gamma[m] / (1.0 + state.gamma[m] * lambda[m]);
    return g;
}

DiagVec de_gradient_cross(const ChannelStats &stats, const std::vector<DEState> &states,
                          std::size_t k) {
    const auto M = stats.num_bs_antennas;
    DiagVec g(M, 0.0);
    for (std::size_t kp = 0; kp < stats.users.size(); ++kp) {
        if (kp == k)
            continue;
        const auto &user = stats.users[kp];
        const auto &st = states[kp];
        for (std::size_t n = 0; n < user.num_rx; ++n) {
            const double *row = user.omega.data() + n * M;
            const double inv = 1.0 / (st.gamma_tilde[n] + st.kbar[n]);
            for (std::size_t m = 0; m < M; ++m)
                g[m] += row[m] * inv;
        }
    }
    return g;
}

} // namespace eemimo
