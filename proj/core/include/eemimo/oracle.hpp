#pragma once

// Reference solvers for tests: projected-gradient ascent on the concave
// Dinkelbach subproblem, and exhaustive grid search for tiny instances.

#include "eemimo/de.hpp"
#include "eemimo/model.hpp"
#include "eemimo/surrogate.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace eemimo {

struct OracleResult {
    PowerAllocation allocation;
    double objective = 0.0;
    std::size_t iterations = 0;
    double kkt_residual = 0.0; ///< ||x - proj(x + grad)||_inf at exit
};

/// Euclidean projection onto {x >= 0} or, with a budget, {x >= 0, sum x <= budget}.
void project_capped_simplex(std::vector<double> &x, std::optional<double> budget);

/// Maximizes model.objective(., level) over the feasible set with
/// Barzilai-Borwein steps and Armijo backtracking (beta 0.5, c 1e-4). Stops
/// once the natural residual is <= cfg.eps_pg * max(1, max x).
OracleResult pg_solve(const Surrogate &model, double level, std::optional<double> p_max,
                      const PowerAllocation &start, const SolverConfig &cfg);

/// Same ascent on the exact DE numerator minus level * total power: the
/// auxiliaries are recomputed at every evaluated point. `objective` reports
/// that exact value. On return the model holds the auxiliaries of the result.
OracleResult pg_solve_exact(Surrogate &model, double level, std::optional<double> p_max,
                            const PowerAllocation &start, const SolverConfig &cfg);

/// The subproblem for Dinkelbach level eta: level = xi * eta.
OracleResult pg_solve_f6(const ChannelStats &stats, const std::vector<DiagVec> &deltas,
                         const std::vector<DEState> &de_states, const PowerModel &pm, double eta,
                         std::optional<double> p_max, const SolverConfig &cfg);

enum class GridObjective { de, mc };

/// Best EE over {0, d, 2d, ..., p_max}^(K M) restricted to sum <= p_max, with
/// d = p_max / points_per_axis. Throws InstanceTooLarge when K M > 3.
OracleResult grid_search_ee(const ChannelStats &stats, const PowerModel &pm,
                            std::size_t points_per_axis, const SolverConfig &cfg,
                            GridObjective objective = GridObjective::de);

} // namespace eemimo
