#pragma once

// Monte-Carlo estimates of the ergodic rate for beam-domain channels whose
// entries are independent zero-mean complex Gaussians with variances Omega_k.
// Every (user, draw) pair gets its own RNG stream derived from the seed, so an
// estimate does not depend on evaluation order.

#include "eemimo/model.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace eemimo {

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
};

/// Seed of the RNG stream for (seed, a, b), via splitmix64 mixing.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

/// N_k x M matrix with entry (n, m) ~ CN(0, omega[n, m]).
Eigen::MatrixXcd sample_beam_channel(const UserStats &user, std::mt19937_64 &rng);

/// E{log det(Kbar_k + G_k Lambda_k G_k^H)}.
McEstimate mc_rate_plus(const ChannelStats &stats, const PowerAllocation &alloc, std::size_t k,
                        const SolverConfig &cfg);

/// mc_rate_plus - rate_minus, computed as E{log det(I + Kbar^-1/2 G Lambda G^H Kbar^-1/2)}.
McEstimate mc_net_rate(const ChannelStats &stats, const PowerAllocation &alloc, std::size_t k,
                       const SolverConfig &cfg);

/// EE with MC net rates; the standard error combines the independent per-user errors.
McEstimate mc_ee(const ChannelStats &stats, const PowerModel &pm, const PowerAllocation &alloc,
                 const SolverConfig &cfg);

/// Haar-distributed unitary (QR of a complex Ginibre matrix with the phase fix).
Eigen::MatrixXcd random_unitary(std::size_t dim, std::mt19937_64 &rng);

/// Per-sample EE of the covariances psi diag(lambda_i) psi^H for every user,
/// using the same channel draws for every psi. The interference covariance is
/// its expectation, which only sees the diagonal of the rotated covariance.
std::vector<double> rotated_ee_samples(const ChannelStats &stats, const PowerModel &pm,
                                       const PowerAllocation &alloc, const Eigen::MatrixXcd &psi,
                                       const SolverConfig &cfg);

struct Prop1Report {
    double beam_ee = 0.0;               ///< MC EE of the beam-domain allocation
    std::vector<double> differences;    ///< rotated EE - beam EE, one per rotation
    std::vector<double> std_errors;     ///< paired standard error of each difference
    double max_difference = 0.0;
    double pooled_std_error = 0.0;      ///< root mean square of std_errors
    double max_z = 0.0;                 ///< max difference / std error (0 when both vanish)
};

/// Compares the beam-domain allocation with num_rotations random unitary
/// rotations applied to every user's covariance.
Prop1Report prop1_validate(const ChannelStats &stats, const PowerModel &pm,
                           const PowerAllocation &alloc, std::size_t num_rotations,
                           std::uint64_t seed, const SolverConfig &cfg);

/// Difference statistics for one given rotation.
McEstimate prop1_difference(const ChannelStats &stats, const PowerModel &pm,
                            const PowerAllocation &alloc, const Eigen::MatrixXcd &psi,
                            const SolverConfig &cfg);

} // namespace eemimo
