#pragma once

#include "eemimo/de.hpp"
#include "eemimo/model.hpp"

#include <cstddef>
#include <vector>

namespace eemimo {

/// Concave model of the net DE sum rate around an MM expansion point
/// Lambda^l, with the DE auxiliaries (Gamma, GammaTilde) held fixed:
///
///   N(Lambda) = sum_k [ sum_m log(1 + gamma_km lambda_km)
///                     + sum_n log(gammaTilde_kn + kbar_kn(Lambda))
///                     - sum_n (1 - 1/phiTilde_kn)
///                     - log det kbar_k(Lambda^l)
///                     - delta_k . (lambda_k - lambda_k^l) ]
///
/// N agrees with the net DE sum rate (value and gradient) at the point the
/// auxiliaries were computed for. The water-filling solvers and the
/// projected-gradient oracle both optimize this model.
class Surrogate {
public:
    Surrogate(ChannelStats stats, std::vector<DiagVec> deltas, std::vector<DEState> states,
              const PowerAllocation &expansion);

    /// Swap in auxiliaries computed at a new point; the linearization of the
    /// interference term stays anchored at the expansion point.
    void refresh(std::vector<DEState> states);

    const ChannelStats &stats() const noexcept { return stats_; }
    std::size_t num_users() const noexcept { return stats_.users.size(); }
    std::size_t num_beams() const noexcept { return stats_.num_bs_antennas; }
    const DiagVec &gamma(std::size_t k) const noexcept { return states_[k].gamma; }
    const DiagVec &gamma_tilde(std::size_t k) const noexcept { return states_[k].gamma_tilde; }
    const DiagVec &delta(std::size_t k) const noexcept { return deltas_[k]; }
    const std::vector<DiagVec> &deltas() const noexcept { return deltas_; }
    const std::vector<DEState> &states() const noexcept { return states_; }

    /// sum_k [log det(I + Gamma_k Lambda_k) + log det(GammaTilde_k + Kbar_k(Lambda))
    ///        - tr(Delta_k Lambda_k)]
    double core(const PowerAllocation &alloc) const;

    /// The full model N(Lambda) = core + constant.
    double numerator(const PowerAllocation &alloc) const;

    /// core - level * total_power: the parametric subproblem objective, with
    /// level = xi * eta (EE) or mu (sum rate).
    double objective(const PowerAllocation &alloc, double level) const;

    /// d objective / d lambda_km.
    std::vector<DiagVec> gradient(const PowerAllocation &alloc, double level) const;

private:
    void update_constant();

    ChannelStats stats_;
    std::vector<DiagVec> deltas_;
    std::vector<DEState> states_;
    double rminus_expansion_ = 0.0;
    double linear_expansion_ = 0.0;
    double constant_ = 0.0;
};

/// Builds the surrogate at `expansion`: DE fixed points and delta_k for every user.
Surrogate make_surrogate(const ChannelStats &stats, const PowerAllocation &expansion,
                         const SolverConfig &cfg);

} // namespace eemimo
