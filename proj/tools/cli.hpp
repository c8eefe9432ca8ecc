#pragma once

// Batch front-end. A run is described by a JSON config (see README) plus
// command-line overrides; every command writes its results into `out`.

#include "eemimo/model.hpp"
#include "eemimo/solver.hpp"
#include "eemimo/synth.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace eemimo::cli {

struct SweepGrid {
    std::vector<std::size_t> num_bs_antennas; ///< empty: the base scenario's M
    std::vector<double> pc_dbm;               ///< empty: the base p_c
    std::vector<double> pmax_dbm;             ///< empty: the base p_max
    std::vector<Objective> objectives{Objective::ee, Objective::sumrate};
};

struct RunConfig {
    std::optional<ScenarioSpec> scenario{ScenarioSpec{}};
    std::optional<std::string> stats_file;

    double xi = 5.0;
    double pc_dbm = 30.0;
    double ps_dbm = 40.0;
    double pmax_dbm = 10.0;

    Objective objective = Objective::ee;
    Algorithm algorithm = Algorithm::lowcomplexity;
    std::size_t restarts = 1;
    SolverConfig solver;

    SweepGrid sweep;
    std::size_t prop1_rotations = 50;
    std::size_t prop1_max_beams = 8; ///< Prop-1 check only runs when M is at most this

    std::optional<std::string> alloc_file; ///< validate: allocation to check instead of solving
    std::string out = "results";
    bool timing = false; ///< fill the wall-time column (otherwise left empty)
    std::size_t jobs = 0; ///< sweep workers; 0 picks the hardware concurrency
};

/// Applies a JSON config document on top of `base`. Unknown keys are errors.
RunConfig parse_config(const std::string &json_text, RunConfig base = {});
RunConfig load_config(const std::string &path, RunConfig base = {});

/// Checks the cross-field invariants (one stats source, sorted grids, ...).
/// Throws InvalidInput.
void check(const RunConfig &cfg);

ChannelStats channel_stats(const RunConfig &cfg);
PowerModel power_model(const RunConfig &cfg);

/// 17 significant digits.
std::string fmt_real(double v);

/// Each writes its files into cfg.out (created if missing) and returns the
/// process exit code: 0 on success, 3 when a solver did not converge.
int run_solve(const RunConfig &cfg);
int run_sweep(const RunConfig &cfg);
int run_validate(const RunConfig &cfg);
int run_trace(const RunConfig &cfg);

/// Full command line: `eemimo <solve|sweep|validate|trace> [flags]`.
int main(int argc, char **argv);

} // namespace eemimo::cli
