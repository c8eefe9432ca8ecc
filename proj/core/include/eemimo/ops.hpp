#pragma once

// Diagonal linear operators and closed-form scalar quantities shared by all
// solvers. Every covariance-like matrix in the beam domain is diagonal, so
// matrices are carried as DiagVec and determinants become sums of logs.

#include "eemimo/model.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace eemimo {

/// Diagonal of E{G diag(x) G^H}: entries sum_m omega[n,m] * x[m]. Length N_k.
DiagVec pi_op(const UserStats &user, std::span<const double> x);

/// Diagonal of E{G^H diag(y) G}: entries sum_n omega[n,m] * y[n]. Length M.
DiagVec xi_op(const UserStats &user, std::span<const double> y);

/// Interference-plus-noise diagonal seen by UT k: sigma^2 + sum_{i != k} pi_op(omega_k, lambda_i).
DiagVec kbar(const ChannelStats &stats, const PowerAllocation &alloc, std::size_t k);

/// kbar for every user, sharing the total-power sum.
std::vector<DiagVec> all_kbar(const ChannelStats &stats, const PowerAllocation &alloc);

/// log det of the interference-plus-noise covariance of UT k.
double rate_minus(const ChannelStats &stats, const PowerAllocation &alloc, std::size_t k);

/// Derivative of sum_{k'} rate_minus(k') with respect to lambda_k, evaluated at `alloc`.
DiagVec delta_k(const ChannelStats &stats, const PowerAllocation &alloc, std::size_t k);

/// delta_k for every user in one O(K N M) pass.
std::vector<DiagVec> all_deltas(const ChannelStats &stats, const PowerAllocation &alloc);

/// Sum rate over consumed power: sum(rates) / (xi P + M p_c + p_s).
double ee_value(const ChannelStats &stats, const PowerModel &pm, const PowerAllocation &alloc,
                std::span<const double> rates);
double ee_value(const PowerModel &pm, std::size_t num_antennas, double transmit_power,
                double sum_rate);

double inner(std::span<const double> a, std::span<const double> b);

} // namespace eemimo
