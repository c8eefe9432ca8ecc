#pragma once

// Core domain types shared by every solver. All powers are in watts and all
// rates in nats; dBm only appears at the configuration boundary.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace eemimo {

/// Diagonal of a diagonal matrix.
using DiagVec = std::vector<double>;

/// Per-UT channel statistics: the N_k x M eigenmode coupling matrix, stored
/// row-major. Entry (n, m) is the average power gain between receive
/// eigen-direction n and transmit beam m.
struct UserStats {
    std::size_t num_rx = 0;
    std::vector<double> omega;

    std::size_t num_beams() const noexcept { return num_rx == 0 ? 0 : omega.size() / num_rx; }
    double at(std::size_t n, std::size_t m) const noexcept { return omega[n * num_beams() + m]; }
    std::span<const double> row(std::size_t n) const noexcept {
        const auto cols = num_beams();
        return {omega.data() + n * cols, cols};
    }

    bool operator==(const UserStats &) const = default;
};

struct ChannelStats {
    std::size_t num_bs_antennas = 0;
    std::vector<UserStats> users;
    double noise_power = 1.0;

    std::size_t num_users() const noexcept { return users.size(); }

    bool operator==(const ChannelStats &) const = default;
};

/// Affine consumption model: xi * P + M * p_c + p_s.
struct PowerModel {
    double xi = 5.0;
    double p_c = 1.0;
    double p_s = 10.0;
    double p_max = 1.0;

    double circuit_power(std::size_t num_antennas) const noexcept {
        return static_cast<double>(num_antennas) * p_c + p_s;
    }
    double consumed(double transmit_power, std::size_t num_antennas) const noexcept {
        return xi * transmit_power + circuit_power(num_antennas);
    }
};

/// Per-UT beam powers (the diagonals of the beam-domain covariances).
struct PowerAllocation {
    std::vector<DiagVec> lambdas;

    static PowerAllocation zeros(std::size_t num_users, std::size_t num_beams);
    /// Spreads `total` evenly over every (user, beam) pair.
    static PowerAllocation uniform(std::size_t num_users, std::size_t num_beams, double total);

    std::size_t num_users() const noexcept { return lambdas.size(); }
    std::size_t num_beams() const noexcept { return lambdas.empty() ? 0 : lambdas.front().size(); }
    double total_power() const noexcept;
    double user_power(std::size_t k) const noexcept;

    bool operator==(const PowerAllocation &) const = default;
};

enum class DeRefresh {
    mm,         ///< auxiliaries frozen at the MM point for the whole subproblem
    dinkelbach, ///< auxiliaries recomputed at every inner iterate (exact DE subproblem)
};

struct SolverConfig {
    double eps_mm = 1e-4;          ///< relative EE change stopping the MM loop
    double eps_dinkelbach = 1e-10; ///< Dinkelbach objective residual
    double eps_de = 1e-10;         ///< max change of the receive-side DE diagonal
    double eps_newton = 1e-12;     ///< scalar root step size (watts)
    double eps_sweep = 1e-11;      ///< max coordinate change ending the water-filling sweeps
    double eps_eta = 1e-11;        ///< Dinkelbach level change
    double eps_power = 1e-8;       ///< |total power - budget| (watts)
    double eps_pg = 1e-7;          ///< projected-gradient natural residual, relative to max(1, max power)
    double eps_ascent = 1e-9;      ///< refreshed-model step length, relative to max(1, total power)

    std::size_t max_iter_mm = 50;
    std::size_t max_iter_dinkelbach = 100;
    std::size_t max_iter_de = 500;
    std::size_t max_iter_newton = 200;
    std::size_t max_iter_sweep = 100000;
    std::size_t max_iter_bisection = 200;
    std::size_t max_iter_pg = 200000;
    std::size_t max_iter_ascent = 2000;

    double de_damping = 1.0; ///< Picard damping, halved on a residual increase
    bool de_newton = true;    ///< try a Newton step before each Picard step
    DeRefresh de_refresh = DeRefresh::dinkelbach;
    bool normalize = true;

    std::size_t mc_samples = 10000;
    std::uint64_t seed = 1;
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

enum class ValidationCode {
    DimensionMismatch,
    NonFiniteEntry,
    NegativeEntry,
    EmptyUser,
    ZeroCouplingRowAll,
    InvalidNoise,
    InvalidPowerModel,
    InvalidAllocation,
    InvalidConfig,
};

std::string to_string(ValidationCode code);

struct ValidationIssue {
    ValidationCode code;
    std::string message;
};

/// First invariant violation found, or nullopt when the inputs are valid.
std::optional<ValidationIssue> validate(const ChannelStats &stats);
std::optional<ValidationIssue> validate(const ChannelStats &stats, const PowerModel &pm);
std::optional<ValidationIssue> validate(const ChannelStats &stats, const PowerAllocation &alloc);
std::optional<ValidationIssue> validate(const SolverConfig &cfg);

/// Throws InvalidInput carrying the first issue, if any.
void require_valid(const ChannelStats &stats, const PowerModel &pm);
void require_valid(const ChannelStats &stats, const PowerAllocation &alloc);

/// Rescales so the noise power is 1. Coupling gains are divided by sigma^2;
/// beam powers keep their meaning, and net rates are unchanged.
ChannelStats normalized(const ChannelStats &stats);

} // namespace eemimo
