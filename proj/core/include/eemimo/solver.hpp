#pragma once

// Outer MM loops. Each MM iteration linearizes the interference term at the
// current allocation and solves the resulting fractional subproblem. With
// DeRefresh::dinkelbach (the default) the subproblem keeps the exact DE
// numerator, so the EE trace is monotone; DeRefresh::mm freezes the DE
// auxiliaries at the MM point instead.
//
//  - solve_ee_lowcomplexity: unconstrained EE water-filling (P1); when its
//    power exceeds the budget, sum-rate water-filling at the budget (P2).
//  - solve_ee_reference: Dinkelbach over the budget-constrained subproblem,
//    each level solved by projected gradient.
//  - solve_sumrate: sum-rate water-filling at the budget.

#include "eemimo/errors.hpp"
#include "eemimo/model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace eemimo {

enum class Branch { none, p1, p2 };
std::string to_string(Branch b);

struct MmRecord {
    std::size_t iteration = 0; ///< 0 is the initial allocation
    double ee = 0.0;           ///< DE energy efficiency, nats/J
    double sum_rate = 0.0;     ///< DE net sum rate, nats
    double total_power = 0.0;
    std::size_t inner_iterations = 0; ///< Dinkelbach steps or bisection steps
    Branch branch = Branch::none;
    double p_opt = 0.0; ///< total power of the unconstrained EE solution (P1 attempts)
    double wall_time = 0.0;
    std::vector<double> eta_trace;
};

struct SolveTrace {
    std::vector<MmRecord> records;
    bool converged = false;
};

struct SolveResult {
    PowerAllocation allocation;
    double ee = 0.0;
    double sum_rate = 0.0;
    double total_power = 0.0;
    SolveTrace trace;
};

/// An inner solver failed; carries the MM trace up to the failure.
class MmAborted : public Error {
public:
    MmAborted(const std::string &what, SolveTrace trace) : Error(what), trace_(std::move(trace)) {}
    const SolveTrace &trace() const noexcept { return trace_; }

private:
    SolveTrace trace_;
};

/// p_max / (K M) on every entry.
PowerAllocation default_start(const ChannelStats &stats, const PowerModel &pm);

/// Without alloc0 the default start is used. Starts above the budget are
/// scaled onto it.
SolveResult solve_ee_lowcomplexity(const ChannelStats &stats, const PowerModel &pm,
                                   const std::optional<PowerAllocation> &alloc0,
                                   const SolverConfig &cfg);
SolveResult solve_ee_reference(const ChannelStats &stats, const PowerModel &pm,
                               const std::optional<PowerAllocation> &alloc0,
                               const SolverConfig &cfg);
SolveResult solve_sumrate(const ChannelStats &stats, const PowerModel &pm,
                          const std::optional<PowerAllocation> &alloc0, const SolverConfig &cfg);

enum class Objective { ee, sumrate };
enum class Algorithm { lowcomplexity, reference };
std::string to_string(Objective o);
std::string to_string(Algorithm a);
Objective parse_objective(const std::string &s);
Algorithm parse_algorithm(const std::string &s);

SolveResult solve(const ChannelStats &stats, const PowerModel &pm,
                  const std::optional<PowerAllocation> &alloc0, Objective objective,
                  Algorithm algorithm, const SolverConfig &cfg);

/// Start r of a restart family: r = 0 is default_start, later starts are
/// random positive allocations spending the whole budget, drawn from cfg.seed.
PowerAllocation restart_start(const ChannelStats &stats, const PowerModel &pm, std::size_t r,
                              std::uint64_t seed);

struct RestartSummary {
    SolveResult best; ///< highest EE (sum rate for the sumrate objective)
    double mean_ee = 0.0;
    double mean_sum_rate = 0.0;
    std::size_t restarts = 0;
};

RestartSummary solve_restarts(const ChannelStats &stats, const PowerModel &pm,
                              Objective objective, Algorithm algorithm, std::size_t restarts,
                              const SolverConfig &cfg);

struct PowerCurvePoint {
    double p_t = 0.0;
    double f = 0.0;     ///< best model numerator with total power <= p_t
    double ratio = 0.0; ///< f / (xi p_t + M p_c + p_s)
};

/// Evaluates the auxiliary power function of one MM step, expanded at
/// `expansion` (zero allocation when absent).
std::vector<PowerCurvePoint> auxiliary_power_curve(const ChannelStats &stats,
                                                   const PowerModel &pm, const SolverConfig &cfg,
                                                   const std::vector<double> &grid,
                                                   const std::optional<PowerAllocation> &expansion = {});

} // namespace eemimo
