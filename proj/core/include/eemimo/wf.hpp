#pragma once

// Iterative water-filling for the two subproblems of the low-complexity
// algorithm: the unconstrained EE problem (Dinkelbach over the level eta)
// and the budget-constrained sum-rate problem (bisection over mu). Both
// reduce, per beam, to the root of a strictly decreasing scalar function
// rho(x) solved by safeguarded Newton-Raphson inside Gauss-Seidel sweeps.

#include "eemimo/errors.hpp"
#include "eemimo/model.hpp"
#include "eemimo/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace eemimo {

/// Everything rho_{k,m} needs, frozen at the current iterate of the other
/// coordinates. Each cross term (r, base) contributes r / (base + r x).
struct RhoContext {
    double gamma = 0.0;
    double delta = 0.0;
    double level = 0.0; ///< xi * eta or mu
    std::vector<std::pair<double, double>> cross;
};

struct RhoValue {
    double value;
    double derivative;
};

/// rho(x) = gamma / (1 + gamma x) + sum r / (base + r x) - delta - level, and rho'(x).
RhoValue rho(double x, const RhoContext &ctx);

/// Upper bound on the root of rho: each term is at most 1/x, so the root is
/// below (1 + #cross) / (delta + level). Infinite when delta + level <= 0.
double rho_root_bound(const RhoContext &ctx);

struct NewtonResult {
    double x;
    std::size_t iterations;
};

/// Root of a strictly decreasing f on [lower, upper], returning `lower` when
/// f(lower) <= 0 (the root lies at or below the floor) and `upper` when
/// f(upper) >= 0. Newton steps that leave the current bracket are replaced
/// by bisection. Stops when a step changes x by <= eps.
template <class F>
NewtonResult newton_root(F &&f, double x0, double eps, std::size_t max_iter, double lower = 0.0,
                         double upper = std::numeric_limits<double>::infinity());

/// Gauss-Seidel state: current powers and every user's kbar kept in sync.
class WfWorkspace {
public:
    WfWorkspace(const Surrogate &model, PowerAllocation start);

    const PowerAllocation &allocation() const noexcept { return x_; }
    RhoContext context(std::size_t k, std::size_t m, double level) const;

    /// One pass over users 1..K and beams 1..M, each coordinate moved to its
    /// projected root. Returns the largest coordinate change.
    double sweep(double level, double cap, const SolverConfig &cfg);

    /// Sweeps until the largest change is <= cfg.eps_sweep. Returns the sweep count.
    std::size_t solve(double level, double cap, const SolverConfig &cfg);

private:
    void resync();
    double extrapolate(const PowerAllocation &prev, double level, double cap);

    const Surrogate &model_;
    PowerAllocation x_;
    std::vector<DiagVec> kbar_;
};

struct EeWaterfillResult {
    PowerAllocation allocation;
    double eta = 0.0;   ///< final Dinkelbach level, N / D at the returned allocation
    double level = 0.0; ///< xi * eta used for the last subproblem
    std::vector<double> eta_trace; ///< eta_(0), eta_(1), ...
    std::size_t dinkelbach_iterations = 0;
    std::size_t sweeps = 0;
    std::vector<DEState> states; ///< auxiliaries of the model at exit
};

/// Maximizes N(Lambda) / (xi P + M p_c + p_s) over Lambda >= 0 with no budget.
/// With cfg.de_refresh == mm, N is the frozen model; with dinkelbach, each
/// level is solved by refreshed_ascent, so N is the exact DE numerator and
/// the model holds the auxiliaries of the returned allocation.
EeWaterfillResult ee_waterfill(const ChannelStats &stats, const std::vector<DiagVec> &deltas,
                               const std::vector<DEState> &de_states, const PowerModel &pm,
                               const PowerAllocation &alloc0, const SolverConfig &cfg);
EeWaterfillResult ee_waterfill(Surrogate &model, const PowerModel &pm,
                               const PowerAllocation &alloc0, const SolverConfig &cfg);

/// max_{k,m} gamma_km + sum_{k' != k, n} omega_k'[n,m] / (gammaTilde_k'n + sigma^2) - delta_km.
/// Every coordinate is inactive for mu >= this bound.
double mu_upper_bound(const Surrogate &model);

struct BisectionStep {
    double mu;
    double total_power;
};

struct SrWaterfillResult {
    PowerAllocation allocation;
    double mu = 0.0;
    bool binding = false; ///< false when the budget is slack at mu = 0
    std::vector<BisectionStep> steps;
    std::size_t sweeps = 0;
};

/// Maximizes core(Lambda) subject to sum Lambda <= p_max, Lambda >= 0.
SrWaterfillResult sr_waterfill(const ChannelStats &stats, const std::vector<DiagVec> &deltas,
                               const std::vector<DEState> &de_states, double p_max,
                               const PowerAllocation &alloc0, const SolverConfig &cfg);
SrWaterfillResult sr_waterfill(const Surrogate &model, double p_max,
                               const PowerAllocation &alloc0, const SolverConfig &cfg);

/// Maximizes core(Lambda) - level * P subject to P <= p_max: sr_waterfill
/// with the multiplier offset by `level`. The returned mu excludes `level`.
SrWaterfillResult budget_waterfill(const Surrogate &model, double level, double p_max,
                                   const PowerAllocation &alloc0, const SolverConfig &cfg);

struct AscentResult {
    PowerAllocation allocation;
    double value = 0.0; ///< exact DE numerator - level * P at the allocation
    std::size_t refreshes = 0;
    std::size_t sweeps = 0;
};

/// Maximizes the exact DE numerator minus level * P (with an optional
/// budget). Each step recomputes the auxiliaries at the iterate, solves the
/// frozen model by water-filling, and line-searches on the exact objective
/// along the segment towards that solution. Stops when the model solution
/// is within cfg.eps_ascent * max(1, P) of the iterate. On return the model
/// holds the auxiliaries of the returned allocation.
AscentResult refreshed_ascent(Surrogate &model, double level, std::optional<double> p_max,
                              const PowerAllocation &start, const SolverConfig &cfg);

struct KktReport {
    double stationarity = 0.0; ///< max |rho| over active coordinates
    double inactivity = 0.0;   ///< max positive rho(0) over zero coordinates
    std::size_t active = 0;
};

/// Substitutes `alloc` into the stationarity system of model.objective(., level).
KktReport kkt_residual(const Surrogate &model, const PowerAllocation &alloc, double level);

// ---------------------------------------------------------------------------

template <class F>
NewtonResult newton_root(F &&f, double x0, double eps, std::size_t max_iter, double lower,
                         double upper) {
    const RhoValue at_lower = f(lower);
    if (at_lower.value <= 0.0)
        return {lower, 0};
    double lo = lower;
    double hi = upper;
    if (std::isfinite(hi)) {
        if (f(hi).value >= 0.0)
            return {hi, 0};
    } else {
        hi = std::max(lower + 1.0, 2.0 * x0);
        std::size_t grow = 0;
        while (f(hi).value > 0.0) {
            lo = hi;
            hi = lower + 2.0 * (hi - lower);
            if (++grow > 2000 || !std::isfinite(hi))
                throw NoConvergence("newton_root bracket", grow, hi);
        }
    }
    double x = std::clamp(x0, lo, hi);
    for (std::size_t it = 1; it <= max_iter; ++it) {
        const RhoValue v = f(x);
        if (v.value == 0.0)
            return {x, it};
        if (v.value > 0.0)
            lo = x;
        else
            hi = x;
        double next = (v.derivative < 0.0 && std::isfinite(v.derivative))
                          ? x - v.value / v.derivative
                          : 0.5 * (lo + hi);
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= eps || hi - lo <= eps)
            return {next, it};
        x = next;
    }
    throw NoConvergence("newton_root", max_iter, hi - lo);
}

} // namespace eemimo
