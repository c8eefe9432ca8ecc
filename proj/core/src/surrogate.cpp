#include "eemimo/surrogate.hpp"

#include "eemimo/errors.hpp"
#include "eemimo/ops.hpp"

#include <cmath>

namespace eemimo {

Surrogate::Surrogate(ChannelStats stats, std::vector<DiagVec> deltas, std::vector<DEState> states,
                     const PowerAllocation &expansion)
    : stats_(std::move(stats)), deltas_(std::move(deltas)), states_(std::move(states)) {
    const auto K = stats_.users.size();
    const auto M = stats_.num_bs_antennas;
    if (deltas_.size() != K || states_.size() != K || expansion.lambdas.size() != K)
        throw DimensionMismatch("surrogate: per-user inputs disagree on K");
    for (std::size_t k = 0; k < K; ++k) {
        if (deltas_[k].size() != M || states_[k].gamma.size() != M ||
            states_[k].gamma_tilde.size() != stats_.users[k].num_rx ||
            expansion.lambdas[k].size() != M)
            throw DimensionMismatch("surrogate: per-user vector lengths disagree");
        rminus_expansion_ += rate_minus(stats_, expansion, k);
        linear_expansion_ += inner(deltas_[k], expansion.lambdas[k]);
    }
    update_constant();
}

void Surrogate::refresh(std::vector<DEState> states) {
    if (states.size() != states_.size())
        throw DimensionMismatch("surrogate refresh: wrong number of states");
    states_ = std::move(states);
    update_constant();
}

void Surrogate::update_constant() {
    double trace_term = 0.0;
    for (const auto &st : states_)
        for (double pt : st.phi_tilde)
            trace_term += 1.0 - 1.0 / pt;
    constant_ = -trace_term - rminus_expansion_ + linear_expansion_;
}

double Surrogate::core(const PowerAllocation &alloc) const {
    const auto kbars = all_kbar(stats_, alloc);
    double v = 0.0;
    for (std::size_t k = 0; k < states_.size(); ++k) {
        const auto &st = states_[k];
        const auto &l = alloc.lambdas[k];
        for (std::size_t m = 0; m < l.size(); ++m)
            v += std::log1p(st.gamma[m] * l[m]) - deltas_[k][m] * l[m];
        for (std::size_t n = 0; n < kbars[k].size(); ++n)
            v += std::log(st.gamma_tilde[n] + kbars[k][n]);
    }
    return v;
}

double Surrogate::numerator(const PowerAllocation &alloc) const {
    return core(alloc) + constant_;
}

double Surrogate::objective(const PowerAllocation &alloc, double level) const {
    return core(alloc) - level * alloc.total_power();
}

std::vector<DiagVec> Surrogate::gradient(const PowerAllocation &alloc, double level) const {
    const auto K = states_.size();
    const auto M = stats_.num_bs_antennas;
    const auto kbars = all_kbar(stats_, alloc);
    // own[k][m] = sum_n omega_k[n,m] / (gammaTilde_kn + kbar_kn); user k's
    // power reaches every other user's kbar, so the cross term sums own over k' != k.
    std::vector<DiagVec> own(K, DiagVec(M, 0.0));
    for (std::size_t k = 0; k < K; ++k) {
        const auto &user = stats_.users[k];
        for (std::size_t n = 0; n < user.num_rx; ++n) {
            const double inv = 1.0 / (states_[k].gamma_tilde[n] + kbars[k][n]);
            const double *row = user.omega.data() + n * M;
            for (std::size_t m = 0; m < M; ++m)
                own[k][m] += row[m] * inv;
        }
    }
    std::vector<DiagVec> g(K, DiagVec(M, 0.0));
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t m = 0; m < M; ++m) {
            double cross = 0.0;
            for (std::size_t kp = 0; kp < K; ++kp)
                if (kp != k)
                    cross += own[kp][m];
            const double gm = states_[k].gamma[m];
            g[k][m] = gm / (1.0 + gm * alloc.lambdas[k][m]) + cross - deltas_[k][m] - level;
        }
    return g;
}

Surrogate make_surrogate(const ChannelStats &stats, const PowerAllocation &expansion,
                         const SolverConfig &cfg) {
    return Surrogate(stats, all_deltas(stats, expansion), de_fixed_points(stats, expansion, cfg),
                     expansion);
}

} // namespace eemimo
