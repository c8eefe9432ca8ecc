#include "cli.hpp"

#include "eemimo/errors.hpp"
#include "eemimo/synth.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace eemimo;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path &p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> row;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');)
            row.push_back(cell);
        if (!line.empty() && line.back() == ',')
            row.emplace_back();
        rows.push_back(row);
    }
    return rows;
}

fs::path scratch(const std::string &name) {
    const auto p = fs::temp_directory_path() / ("eemimo_cli_" + name);
    fs::remove_all(p);
    return p;
}

cli::RunConfig small_config(const fs::path &out) {
    return cli::parse_config(R"({
        "scenario": {"M": 8, "K": 2, "num_rx": 2, "seed": 7},
        "power": {"pmax_dbm": 20},
        "solver": {"mc_samples": 200},
        "validate": {"prop1_rotations": 3},
        "out": ")" + out.string() + R"("
    })");
}

int run_main(std::vector<std::string> args) {
    args.insert(args.begin(), "eemimo");
    std::vector<char *> argv;
    for (auto &a : args)
        argv.push_back(a.data());
    return cli::main(static_cast<int>(argv.size()), argv.data());
}

} // namespace

TEST(CliConfig, Defaults) {
    const auto cfg = cli::parse_config("{}");
    ASSERT_TRUE(cfg.scenario.has_value());
    EXPECT_EQ(cfg.scenario->num_bs_antennas, 16u);
    EXPECT_EQ(cfg.pc_dbm, 30.0);
    EXPECT_EQ(cfg.ps_dbm, 40.0);
    EXPECT_EQ(cfg.xi, 5.0);
    EXPECT_EQ(cfg.objective, Objective::ee);
    EXPECT_EQ(cfg.solver.de_refresh, DeRefresh::dinkelbach);
    EXPECT_NO_THROW(cli::check(cfg));
}

TEST(CliConfig, ParsesEverySection) {
    const auto cfg = cli::parse_config(R"({
        "scenario": {"M": 32, "K": 2, "num_rx": [2, 4], "profile": "sparse-beam",
                     "pathloss_db": -110, "noise_dbm": -100, "seed": 9},
        "power": {"xi": 4, "pc_dbm": 10, "ps_dbm": 30, "pmax_dbm": 25},
        "objective": "sumrate", "algorithm": "reference", "restarts": 3,
        "solver": {"eps_mm": 1e-5, "max_iter_mm": 20, "de_refresh": "mm", "de_newton": false,
                   "mc_samples": 50, "seed": 11},
        "sweep": {"M": [16, 32], "pc_dbm": [10, 30], "pmax_dbm": [0, 10], "objectives": ["ee"]},
        "validate": {"prop1_rotations": 5},
        "out": "x", "jobs": 2
    })");
    EXPECT_EQ(cfg.scenario->num_rx, (std::vector<std::size_t>{2, 4}));
    EXPECT_EQ(cfg.scenario->profile, Profile::sparse_beam);
    EXPECT_EQ(cfg.scenario->seed, 9u);
    EXPECT_EQ(cfg.pc_dbm, 10.0);
    EXPECT_EQ(cfg.objective, Objective::sumrate);
    EXPECT_EQ(cfg.algorithm, Algorithm::reference);
    EXPECT_EQ(cfg.restarts, 3u);
    EXPECT_EQ(cfg.solver.eps_mm, 1e-5);
    EXPECT_EQ(cfg.solver.de_refresh, DeRefresh::mm);
    EXPECT_FALSE(cfg.solver.de_newton);
    EXPECT_EQ(cfg.solver.seed, 11u);
    EXPECT_EQ(cfg.sweep.num_bs_antennas, (std::vector<std::size_t>{16, 32}));
    EXPECT_EQ(cfg.sweep.objectives, std::vector<Objective>{Objective::ee});
    EXPECT_EQ(cfg.prop1_rotations, 5u);
    EXPECT_EQ(cfg.out, "x");
    EXPECT_EQ(cfg.jobs, 2u);
    EXPECT_NO_THROW(cli::check(cfg));
}

TEST(CliConfig, ErrorsNameTheField) {
    auto field_of = [](const std::string &text) {
        try {
            cli::parse_config(text);
        } catch (const ParseError &e) {
            return e.field();
        }
        return std::string("<none>");
    };
    EXPECT_EQ(field_of(R"({"power": {"pmax": 3}})"), "power.pmax");
    EXPECT_EQ(field_of(R"({"bogus": 1})"), "bogus");
    EXPECT_EQ(field_of(R"({"solver": {"max_iter_mm": -1}})"), "solver.max_iter_mm");
    EXPECT_EQ(field_of(R"({"scenario": {"profile": "flat"}})"), "scenario.profile");
    EXPECT_EQ(field_of(R"({"sweep": {"pmax_dbm": [0, "a"]}})"), "sweep.pmax_dbm[1]");
    EXPECT_THROW(cli::parse_config("{\"power\": "), ParseError);
}

TEST(CliConfig, CrossFieldChecks) {
    auto cfg = cli::parse_config(R"({"stats_file": "s.json"})");
    EXPECT_FALSE(cfg.scenario.has_value());
    EXPECT_NO_THROW(cli::check(cfg));
    cfg.sweep.num_bs_antennas = {16};
    EXPECT_THROW(cli::check(cfg), InvalidInput);

    cfg = cli::parse_config(R"({"sweep": {"pmax_dbm": [10, 0]}})");
    EXPECT_THROW(cli::check(cfg), InvalidInput);
    cfg = cli::parse_config(R"({"sweep": {"objectives": []}})");
    EXPECT_THROW(cli::check(cfg), InvalidInput);
    cfg = cli::parse_config(R"({"restarts": 0})");
    EXPECT_THROW(cli::check(cfg), InvalidInput);
}

TEST(CliRun, SolveMatchesGolden) {
    const auto out = scratch("golden");
    ASSERT_EQ(cli::run_solve(small_config(out)), 0);
    const auto got = read_csv(out / "summary.csv");
    const auto want = read_csv(fs::path(EEMIMO_GOLDEN_DIR) / "solve_summary.csv");
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t r = 0; r < got.size(); ++r) {
        ASSERT_EQ(got[r].size(), want[r].size());
        for (std::size_t c = 0; c < got[r].size(); ++c) {
            char *end = nullptr;
            const double w = std::strtod(want[r][c].c_str(), &end);
            if (r > 0 && !want[r][c].empty() && *end == '\0')
                EXPECT_NEAR(std::stod(got[r][c]), w, 1e-9 * std::max(1.0, std::abs(w)))
                    << got[0][c];
            else
                EXPECT_EQ(got[r][c], want[r][c]);
        }
    }
    const auto alloc = load_allocation((out / "allocation.json").string());
    const auto want_alloc = load_allocation((fs::path(EEMIMO_GOLDEN_DIR) / "solve_allocation.json").string());
    ASSERT_EQ(alloc.num_users(), want_alloc.num_users());
    for (std::size_t k = 0; k < alloc.num_users(); ++k)
        for (std::size_t m = 0; m < alloc.num_beams(); ++m)
            EXPECT_NEAR(alloc.lambdas[k][m], want_alloc.lambdas[k][m], 1e-9);
}

TEST(CliRun, RerunsAreByteIdentical) {
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    auto ca = small_config(a);
    auto cb = small_config(b);
    ca.sweep.pmax_dbm = cb.sweep.pmax_dbm = {0, 20};
    for (auto run : {cli::run_solve, cli::run_sweep, cli::run_validate, cli::run_trace}) {
        ASSERT_EQ(run(ca), 0);
        ASSERT_EQ(run(cb), 0);
    }
    for (const char *f : {"summary.csv", "allocation.json", "sweep.csv", "validate.csv",
                          "prop1.csv", "trace.csv", "dinkelbach.csv"}) {
        ASSERT_TRUE(fs::exists(a / f)) << f;
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
}

TEST(CliRun, ZeroBudgetAndFullBudget) {
    const auto out = scratch("budget");
    EXPECT_EQ(run_main({"solve", "--out", out.string(), "--pmax-dbm", "-inf"}), 0);
    auto rows = read_csv(out / "summary.csv");
    EXPECT_EQ(std::stod(rows[1][5]), 0.0); // ee_nats_per_j
    EXPECT_EQ(std::stod(rows[1][8]), 0.0); // total_power_w

    EXPECT_EQ(run_main({"solve", "--out", out.string(), "--objective", "sumrate", "--pmax-dbm",
                        "20"}),
              0);
    rows = read_csv(out / "summary.csv");
    EXPECT_NEAR(std::stod(rows[1][8]), 0.1, 1e-8);
}

TEST(CliRun, ExitCodes) {
    const auto out = scratch("codes");
    EXPECT_EQ(run_main({"solve", "--out", out.string(), "--objective", "nope"}), 1);
    EXPECT_EQ(run_main({"solve", "--config", "/nonexistent.json"}), 1);
    EXPECT_NE(run_main({"frobnicate"}), 0);

    const auto cfg_path = out.string() + ".json";
    std::ofstream(cfg_path) << R"({"solver": {"max_iter_mm": 1}, "out": ")" << out.string()
                            << R"("})";
    EXPECT_EQ(run_main({"trace", "--config", cfg_path}), 3);
    EXPECT_TRUE(fs::exists(out / "trace.csv"));
    fs::remove(cfg_path);
}

TEST(CliRun, ValidateUsesAGivenAllocation) {
    const auto out = scratch("alloc");
    auto cfg = small_config(out);
    ASSERT_EQ(cli::run_solve(cfg), 0);
    const auto stats_path = out / "stats.json";
    save_stats(generate(*cfg.scenario), stats_path.string());
    EXPECT_EQ(run_main({"validate", "--stats", stats_path.string(), "--alloc",
                        (out / "allocation.json").string(), "--out", out.string(),
                        "--mc-samples", "100"}),
              0);
    const auto rows = read_csv(out / "validate.csv");
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_LE(std::stod(rows[1][5]), 0.1);
}
