#pragma once

// Deterministic-equivalent (DE) approximation of the ergodic rate
// E{log det(Kbar_k + G_k Lambda_k G_k^H)}. The approximation is the solution
// of a small fixed-point system in the diagonals Phi_k (transmit side, length
// M) and PhiTilde_k (receive side, length N_k):
//
//   PhiTilde = 1 + pi_op(omega, lambda / Phi) / kbar
//   Phi      = 1 + xi_op(omega, 1 / (PhiTilde * kbar)) * lambda
//
// from which Gamma = xi_op(omega, 1 / (PhiTilde * kbar)) and
// GammaTilde = pi_op(omega, lambda / Phi) follow. All products are entrywise.

#include "eemimo/model.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace eemimo {

struct DEState {
    DiagVec gamma;       ///< length M
    DiagVec gamma_tilde; ///< length N_k
    DiagVec phi;         ///< length M, entries >= 1
    DiagVec phi_tilde;   ///< length N_k, entries >= 1
    DiagVec kbar;        ///< interference-plus-noise diagonal the state was solved for
    std::size_t iterations = 0;
    double residual = 0.0;
};

/// Iterates the PhiTilde map from PhiTilde = 1 until its max change is
/// <= cfg.eps_de. With cfg.de_newton each step first tries a Newton step on
/// the map and falls back to a damped Picard step when that does not reduce
/// the residual. Throws NoConvergence after cfg.max_iter_de.
DEState de_fixed_point(const UserStats &user, std::span<const double> lambda,
                       std::span<const double> kbar, const SolverConfig &cfg);
DEState de_fixed_point(const ChannelStats &stats, const PowerAllocation &alloc, std::size_t k,
                       const SolverConfig &cfg);
std::vector<DEState> de_fixed_points(const ChannelStats &stats, const PowerAllocation &alloc,
                                     const SolverConfig &cfg);

/// Max-norm change of (Phi, PhiTilde) after one more pass of the fixed-point map.
double de_residual(const UserStats &user, std::span<const double> lambda, const DEState &state);

/// log det(I + Gamma Lambda_k) + log det(GammaTilde + Kbar_k) - tr(I - PhiTilde^{-1}).
double de_rate_plus(const ChannelStats &stats, const PowerAllocation &alloc, std::size_t k,
                    const DEState &state);

/// de_rate_plus - rate_minus, evaluated without cancelling the log det(Kbar) terms.
double de_net_rate(std::span<const double> lambda, const DEState &state);

std::vector<double> de_net_rates(const ChannelStats &stats, const PowerAllocation &alloc,
                                 const SolverConfig &cfg);
double de_sum_rate(const ChannelStats &stats, const PowerAllocation &alloc,
                   const SolverConfig &cfg);
double de_ee(const ChannelStats &stats, const PowerModel &pm, const PowerAllocation &alloc,
             const SolverConfig &cfg);

/// Gradient of de_rate_plus(k) with respect to lambda_k: gamma / (1 + gamma lambda).
DiagVec de_gradient_own(const DEState &state, std::span<const double> lambda);

/// Gradient of sum_{k' != k} de_rate_plus(k') with respect to lambda_k.
DiagVec de_gradient_cross(const ChannelStats &stats, const std::vector<DEState> &states,
                          std::size_t k);

} // namespace eemimo
