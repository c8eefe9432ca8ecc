#include "eemimo/model.hpp"

#include "eemimo/errors.hpp"

#include <cmath>
#include <numeric>

namespace eemimo {

PowerAllocation PowerAllocation::zeros(std::size_t num_users, std::size_t num_beams) {
    return {std::vector<DiagVec>(num_users, DiagVec(num_beams, 0.0))};
}

PowerAllocation PowerAllocation::uniform(std::size_t num_users, std::size_t num_beams,
                                         double total) {
    const double each =
        num_users * num_beams == 0 ? 0.0 : total / static_cast<double>(num_users * num_beams);
    return {std::vector<DiagVec>(num_users, DiagVec(num_beams, each))};
}

double PowerAllocation::total_power() const noexcept {
    double sum = 0.0;
    for (const auto &l : lambdas)
        sum += std::accumulate(l.begin(), l.end(), 0.0);
    return sum;
}

double PowerAllocation::user_power(std::size_t k) const noexcept {
    return std::accumulate(lambdas[k].begin(), lambdas[k].end(), 0.0);
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

std::string to_string(ValidationCode code) {
    switch (code) {
    case ValidationCode::DimensionMismatch: return "DimensionMismatch";
    case ValidationCode::NonFiniteEntry: return "NonFiniteEntry";
    case ValidationCode::NegativeEntry: return "NegativeEntry";
    case ValidationCode::EmptyUser: return "EmptyUser";
    case ValidationCode::ZeroCouplingRowAll: return "ZeroCouplingRowAll";
    case ValidationCode::InvalidNoise: return "InvalidNoise";
    case ValidationCode::InvalidPowerModel: return "InvalidPowerModel";
    case ValidationCode::InvalidAllocation: return "InvalidAllocation";
    case ValidationCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

namespace {

ValidationIssue issue(ValidationCode code, std::string message) {
    return {code, to_string(code) + ": " + std::move(message)};
}

} // namespace

std::optional<ValidationIssue> validate(const ChannelStats &stats) {
    if (stats.num_bs_antennas == 0)
        return issue(ValidationCode::DimensionMismatch, "M must be positive");
    if (!std::isfinite(stats.noise_power) || stats.noise_power <= 0.0)
        return issue(ValidationCode::InvalidNoise, "noise power must be finite and > 0");
    if (stats.users.empty())
        return issue(ValidationCode::EmptyUser, "no users");
    for (std::size_t k = 0; k < stats.users.size(); ++k) {
        const auto &u = stats.users[k];
        const auto tag = "user " + std::to_string(k);
        if (u.num_rx == 0 || u.omega.empty())
            return issue(ValidationCode::EmptyUser, tag + " has no receive antennas");
        if (u.omega.size() != u.num_rx * stats.num_bs_antennas)
            return issue(ValidationCode::DimensionMismatch,
                         tag + " coupling matrix has " + std::to_string(u.omega.size()) +
                             " entries, expected " +
                             std::to_string(u.num_rx * stats.num_bs_antennas));
        bool any_positive = false;
        for (double w : u.omega) {
            if (!std::isfinite(w))
                return issue(ValidationCode::NonFiniteEntry, tag + " coupling entry not finite");
            if (w < 0.0)
                return issue(ValidationCode::NegativeEntry, tag + " coupling entry negative");
            any_positive = any_positive || w > 0.0;
        }
        if (!any_positive)
            return issue(ValidationCode::ZeroCouplingRowAll, tag + " coupling matrix is all zero");
    }
    return std::nullopt;
}

std::optional<ValidationIssue> validate(const ChannelStats &stats, const PowerModel &pm) {
    if (auto bad = validate(stats))
        return bad;
    const bool finite = std::isfinite(pm.xi) && std::isfinite(pm.p_c) && std::isfinite(pm.p_s) &&
                        std::isfinite(pm.p_max);
    if (!finite || pm.xi < 0.0 || pm.p_c < 0.0 || pm.p_s < 0.0 || pm.p_max < 0.0)
        return issue(ValidationCode::InvalidPowerModel,
                     "power model entries must be finite and nonnegative");
    // Affine in P, so positivity at both ends of [0, P_max] covers the interval.
    if (pm.consumed(0.0, stats.num_bs_antennas) <= 0.0 ||
        pm.consumed(pm.p_max, stats.num_bs_antennas) <= 0.0)
        return issue(ValidationCode::InvalidPowerModel, "consumed power must stay positive");
    return std::nullopt;
}

std::optional<ValidationIssue> validate(const ChannelStats &stats, const PowerAllocation &alloc) {
    if (alloc.lambdas.size() != stats.users.size())
        return issue(ValidationCode::DimensionMismatch, "allocation user count differs from stats");
    for (const auto &l : alloc.lambdas) {
        if (l.size() != stats.num_bs_antennas)
            return issue(ValidationCode::DimensionMismatch, "allocation length differs from M");
        for (double x : l)
            if (!std::isfinite(x) || x < 0.0)
                return issue(ValidationCode::InvalidAllocation,
                             "beam powers must be finite and nonnegative");
    }
    return std::nullopt;
}

std::optional<ValidationIssue> validate(const SolverConfig &cfg) {
    const double eps[] = {cfg.eps_mm,    cfg.eps_dinkelbach, cfg.eps_de,    cfg.eps_newton,
                          cfg.eps_sweep, cfg.eps_eta,        cfg.eps_power, cfg.eps_pg,
                          cfg.eps_ascent};
    for (double e : eps)
        if (!(e > 0.0))
            return issue(ValidationCode::InvalidConfig, "tolerances must be > 0");
    const std::size_t caps[] = {cfg.max_iter_mm,     cfg.max_iter_dinkelbach, cfg.max_iter_de,
                                cfg.max_iter_newton, cfg.max_iter_sweep,      cfg.max_iter_bisection,
                                cfg.max_iter_pg,     cfg.max_iter_ascent,     cfg.mc_samples};
    for (auto c : caps)
        if (c < 1)
            return issue(ValidationCode::InvalidConfig, "iteration caps must be >= 1");
    if (!(cfg.de_damping > 0.0 && cfg.de_damping <= 1.0))
        return issue(ValidationCode::InvalidConfig, "DE damping must lie in (0, 1]");
    return std::nullopt;
}

void require_valid(const ChannelStats &stats, const PowerModel &pm) {
    if (auto bad = validate(stats, pm))
        throw InvalidInput(bad->message);
}

void require_valid(const ChannelStats &stats, const PowerAllocation &alloc) {
    if (auto bad = validate(stats))
        throw InvalidInput(bad->message);
    if (auto bad = validate(stats, alloc))
        throw InvalidInput(bad->message);
}

ChannelStats normalized(const ChannelStats &stats) {
    ChannelStats out = stats;
    const double scale = 1.0 / stats.noise_power;
    for (auto &u : out.users)
        for (auto &w : u.omega)
            w *= scale;
    out.noise_power = 1.0;
    return out;
}

} // namespace eemimo
