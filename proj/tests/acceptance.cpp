// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "cli.hpp"

#include "eemimo/de.hpp"
#include "eemimo/mc.hpp"
#include "eemimo/ops.hpp"
#include "eemimo/oracle.hpp"
#include "eemimo/solver.hpp"
#include "eemimo/synth.hpp"
#include "eemimo/wf.hpp"
#include "support.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace eemimo;
using eemimo::testing::random_alloc;
using eemimo::testing::random_stats;
using eemimo::testing::rel_err;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

PowerModel paper_power(double pmax_dbm, double pc_dbm = 30.0) {
    return {5.0, dbm_to_watts(pc_dbm), dbm_to_watts(40.0), dbm_to_watts(pmax_dbm)};
}

std::vector<std::map<std::string, std::string>> read_csv(const fs::path &p) {
    std::ifstream in(p);
    std::vector<std::map<std::string, std::string>> rows;
    std::vector<std::string> header;
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');)
            cells.push_back(c);
        if (header.empty()) {
            header = cells;
            continue;
        }
        std::map<std::string, std::string> row;
        for (std::size_t i = 0; i < header.size(); ++i)
            row[header[i]] = i < cells.size() ? cells[i] : "";
        rows.push_back(row);
    }
    return rows;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path workdir(const std::string &name) {
    const auto p = fs::temp_directory_path() / ("eemimo_acceptance_" + name);
    fs::remove_all(p);
    return p;
}

// 1 -------------------------------------------------------------------------

Outcome de_vs_mc() {
    const auto t0 = Clock::now();
    const std::size_t Ks[] = {1, 2, 4};
    const std::size_t Ms[] = {16, 32};
    const std::size_t Ns[] = {2, 4};
    const Profile profiles[] = {Profile::exponential_beam, Profile::sparse_beam, Profile::uniform};
    SolverConfig cfg;
    cfg.mc_samples = 10000;
    double worst = 0.0;
    std::size_t users = 0;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> dbm(0.0, 30.0);
    for (std::uint64_t i = 0; i < 20; ++i) {
        ScenarioSpec sc;
        sc.num_users = Ks[i % 3];
        sc.num_bs_antennas = Ms[(i / 3) % 2];
        sc.num_rx = {Ns[(i / 2) % 2]};
        sc.profile = profiles[i % 3 == 2 ? 0 : (i / 6) % 2];
        sc.seed = 100 + i;
        const auto s = generate(sc);
        const auto a = random_alloc(sc.num_users, sc.num_bs_antennas, dbm_to_watts(dbm(rng)),
                                    200 + i);
        const auto de = de_net_rates(s, a, cfg);
        for (std::size_t k = 0; k < s.users.size(); ++k) {
            cfg.seed = 300 + i;
            const auto mc = mc_net_rate(s, a, k, cfg);
            worst = std::max(worst, std::abs(de[k] - mc.mean) / mc.mean);
            ++users;
        }
    }
    const double t = seconds_since(t0);
    return {worst <= 0.05 && t <= 60.0,
            fmt::format("max per-user gap {:.2f}% over {} users, {:.1f} s", 100 * worst, users, t)};
}

// 2 -------------------------------------------------------------------------

Outcome gradients() {
    SolverConfig cfg;
    cfg.eps_de = 1e-13;
    auto rate_plus = [&](const ChannelStats &s, const PowerAllocation &a, std::size_t k) {
        return de_rate_plus(s, a, k, de_fixed_point(s, a, k, cfg));
    };
    double worst_own = 0.0, worst_cross = 0.0, worst_delta = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto s = random_stats(2, 4, 2, 5000 + seed, 2.0);
        const auto a = random_alloc(2, 4, 2.0, 5100 + seed);
        const auto st = de_fixed_points(s, a, cfg);
        for (std::size_t k = 0; k < 2; ++k) {
            const auto own = de_gradient_own(st[k], a.lambdas[k]);
            const auto cross = de_gradient_cross(s, st, k);
            const auto delta = delta_k(s, a, k);
            for (std::size_t m = 0; m < 4; ++m) {
                const double h = 1e-4 * std::max(1.0, a.lambdas[k][m]);
                auto up = a, dn = a;
                up.lambdas[k][m] += h;
                dn.lambdas[k][m] -= h;
                double fd_own = 0.0, fd_cross = 0.0, fd_minus = 0.0;
                for (std::size_t kp = 0; kp < 2; ++kp) {
                    const double d = (rate_plus(s, up, kp) - rate_plus(s, dn, kp)) / (2 * h);
                    (kp == k ? fd_own : fd_cross) += d;
                    fd_minus += (rate_minus(s, up, kp) - rate_minus(s, dn, kp)) / (2 * h);
                }
                worst_own = std::max(worst_own, rel_err(own[m], fd_own));
                worst_cross = std::max(worst_cross, rel_err(cross[m], fd_cross));
                worst_delta = std::max(worst_delta, rel_err(delta[m], fd_minus));
            }
        }
    }
    return {worst_own <= 1e-4 && worst_cross <= 1e-4 && worst_delta <= 1e-6,
            fmt::format("own {:.1e}, cross {:.1e}, delta_k {:.1e} (max rel. error)", worst_own,
                        worst_cross, worst_delta)};
}

// 3 -------------------------------------------------------------------------

Outcome kkt() {
    SolverConfig cfg;
    cfg.de_refresh = DeRefresh::mm;
    const PowerModel pm{5.0, 0.5, 5.0, 10.0};
    double stat = 0.0, inact = -std::numeric_limits<double>::infinity(), budget = 0.0;
    std::size_t binding = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto s = random_stats(2 + seed % 3, 4 + seed % 5, 2, 6000 + seed, 20.0);
        const auto x0 = random_alloc(s.users.size(), s.num_bs_antennas, 0.1, 6100 + seed);
        auto model = make_surrogate(s, x0, cfg);
        const auto ee = ee_waterfill(model, pm, x0, cfg);
        auto rep = kkt_residual(model, ee.allocation, pm.xi * ee.eta);
        stat = std::max(stat, rep.stationarity);
        inact = std::max(inact, rep.inactivity);
        const double p_max = 0.01 * static_cast<double>(1 + seed * seed);
        const auto sr = sr_waterfill(model, p_max, x0, cfg);
        rep = kkt_residual(model, sr.allocation, sr.mu);
        stat = std::max(stat, rep.stationarity);
        inact = std::max(inact, rep.inactivity);
        if (sr.binding) {
            ++binding;
            budget = std::max(budget, std::abs(sr.allocation.total_power() - p_max));
        }
    }
    return {stat <= 1e-6 && inact <= 1e-6 && budget <= cfg.eps_power && binding > 0,
            fmt::format("stationarity {:.1e}, inactivity {:.1e}, |P - P_max| {:.1e} over {} "
                        "binding budgets",
                        stat, std::max(0.0, inact), budget, binding)};
}

// 4 -------------------------------------------------------------------------

Outcome oracles() {
    SolverConfig cfg;
    cfg.de_refresh = DeRefresh::mm;
    double worst_sub = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto s = random_stats(2, 4, 2, 7000 + seed, 10.0);
        const auto x0 = random_alloc(2, 4, 1.0, 7100 + seed);
        const auto model = make_surrogate(s, x0, cfg);
        const double p_max = 0.5 + 0.25 * static_cast<double>(seed);
        const auto sr = sr_waterfill(model, p_max, x0, cfg);
        const auto pg = pg_solve(model, 0.0, p_max, x0, cfg);
        worst_sub = std::max(worst_sub, rel_err(model.objective(sr.allocation, 0.0), pg.objective));
        const double level = 0.05 + 0.02 * static_cast<double>(seed);
        WfWorkspace ws(model, x0);
        ws.solve(level, std::numeric_limits<double>::infinity(), cfg);
        const auto pl = pg_solve(model, level, std::nullopt, x0, cfg);
        worst_sub =
            std::max(worst_sub, rel_err(model.objective(ws.allocation(), level), pl.objective));
    }
    const SolverConfig exact;
    double worst_grid = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto s = random_stats(1, 2, 2, 7200 + seed, 4.0);
        const PowerModel pm{5.0, 0.05, 0.5, 0.5 + 0.5 * static_cast<double>(seed)};
        const auto r = solve_ee_lowcomplexity(s, pm, std::nullopt, exact);
        const auto g = grid_search_ee(s, pm, 200, exact);
        worst_grid = std::max(worst_grid, rel_err(r.ee, g.objective));
    }
    return {worst_sub <= 1e-4 && worst_grid <= 1e-3,
            fmt::format("wf vs PG {:.1e} (40 subproblems), pipeline vs grid {:.1e} (5 instances)",
                        worst_sub, worst_grid)};
}

// 5 -------------------------------------------------------------------------

Outcome algorithms() {
    const SolverConfig cfg;
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 10; ++i) {
        ScenarioSpec sc;
        sc.num_bs_antennas = 4 + 2 * (i % 3);
        sc.num_users = 2;
        sc.num_rx = {2};
        sc.seed = 40 + i;
        const auto s = generate(sc);
        const auto pm = paper_power(-10.0 + 5.0 * static_cast<double>(i));
        const auto lc = solve_ee_lowcomplexity(s, pm, std::nullopt, cfg);
        const auto ref = solve_ee_reference(s, pm, std::nullopt, cfg);
        worst = std::max(worst, rel_err(lc.ee, ref.ee));
    }
    return {worst <= 1e-3, fmt::format("max rel. EE difference {:.1e} on 10 instances", worst)};
}

// 6 -------------------------------------------------------------------------

Outcome monotone() {
    const auto s = generate(ScenarioSpec{});
    const SolverConfig cfg;
    const auto r = solve_ee_lowcomplexity(s, paper_power(10.0), std::nullopt, cfg);
    const auto &rec = r.trace.records;
    double worst_drop = 0.0, worst_eta_drop = 0.0;
    for (std::size_t i = 1; i < rec.size(); ++i) {
        worst_drop = std::max(worst_drop, rec[i - 1].ee - rec[i].ee);
        for (std::size_t j = 1; j < rec[i].eta_trace.size(); ++j)
            worst_eta_drop =
                std::max(worst_eta_drop, rec[i].eta_trace[j - 1] - rec[i].eta_trace[j]);
    }
    // Informational: iteration counts across the budget range.
    std::string counts;
    for (double p : {0.0, 10.0, 20.0, 30.0}) {
        const auto q = solve_ee_lowcomplexity(s, paper_power(p), std::nullopt, cfg);
        counts += fmt::format(" {}dBm:{}", p, q.trace.records.size() - 1);
    }
    const std::size_t iters = rec.size() - 1;
    return {r.trace.converged && iters <= 10 && worst_drop <= 1e-9 && worst_eta_drop <= 1e-9,
            fmt::format("{} MM iterations, max EE drop {:.1e}, max eta drop {:.1e};{}", iters,
                        std::max(0.0, worst_drop), std::max(0.0, worst_eta_drop), counts)};
}

// 7 -------------------------------------------------------------------------

Outcome fig2() {
    const auto t0 = Clock::now();
    const auto out = workdir("fig2");
    auto cfg = cli::parse_config("{}");
    cfg.sweep.pmax_dbm = {-10, -5, 0, 5, 10, 15, 20, 25, 30, 35, 40};
    cfg.out = out.string();
    const int code = cli::run_sweep(cfg);
    const auto rows = read_csv(out / "sweep.csv");
    std::vector<double> ee_design, sr_design;
    for (const auto &r : rows) {
        if (r.at("status") != "ok")
            continue;
        (r.at("objective") == "ee" ? ee_design : sr_design)
            .push_back(std::stod(r.at("ee_nats_per_j")));
    }
    const double t = seconds_since(t0);
    if (code != 0 || ee_design.size() != 11 || sr_design.size() != 11)
        return {false, fmt::format("sweep failed (exit {})", code)};
    bool nondecreasing = true;
    for (std::size_t i = 1; i < ee_design.size(); ++i)
        nondecreasing = nondecreasing && ee_design[i] >= ee_design[i - 1] * (1.0 - 1e-9);
    const double low = rel_err(ee_design.front(), sr_design.front());
    const double gain = ee_design.back() / sr_design.back() - 1.0;
    return {low <= 0.01 && gain >= 0.2 && nondecreasing && t <= 300.0,
            fmt::format("gap at -10 dBm {:.2f}%, gain at 40 dBm {:.1f}%, EE curve {}, {:.1f} s",
                        100 * low, 100 * gain, nondecreasing ? "nondecreasing" : "drops", t)};
}

// 8 -------------------------------------------------------------------------

Outcome fig56() {
    const auto t0 = Clock::now();
    const auto out = workdir("fig56");
    auto cfg = cli::parse_config("{}");
    cfg.sweep.num_bs_antennas = {16, 32, 64};
    cfg.sweep.pc_dbm = {10, 30};
    cfg.sweep.pmax_dbm = {0, 5, 10, 15, 20, 25, 30, 35, 40};
    cfg.sweep.objectives = {Objective::ee};
    cfg.out = out.string();
    const int code = cli::run_sweep(cfg);
    if (code != 0)
        return {false, fmt::format("sweep failed (exit {})", code)};
    // ee[(M, pc)][pmax index], power[(M, pc)][pmax index]
    std::map<std::pair<int, int>, std::vector<double>> ee, power;
    std::vector<double> pmax;
    for (const auto &r : read_csv(out / "sweep.csv")) {
        const auto key = std::pair{std::stoi(r.at("M")), std::stoi(r.at("pc_dbm"))};
        ee[key].push_back(std::stod(r.at("ee_nats_per_j")));
        power[key].push_back(std::stod(r.at("total_power_w")));
        if (key == std::pair{16, 10})
            pmax.push_back(std::stod(r.at("pmax_dbm")));
    }
    // EE falls with M at the default circuit power, at every budget.
    bool m_axis = true;
    for (std::size_t j = 0; j < pmax.size(); ++j)
        m_axis = m_axis && ee[{16, 30}][j] > ee[{32, 30}][j] && ee[{32, 30}][j] > ee[{64, 30}][j];
    // Lower p_c: higher EE everywhere and an earlier saturation point, the
    // first budget the EE design leaves partly unspent.
    auto saturation = [&](std::pair<int, int> key) {
        for (std::size_t j = 0; j < pmax.size(); ++j)
            if (power[key][j] < dbm_to_watts(pmax[j]) * (1.0 - 1e-6))
                return pmax[j];
        return std::numeric_limits<double>::infinity();
    };
    bool pc_axis = true;
    std::string sat;
    for (int M : {16, 32, 64}) {
        for (std::size_t j = 0; j < pmax.size(); ++j)
            pc_axis = pc_axis && ee[{M, 10}][j] > ee[{M, 30}][j];
        const double s10 = saturation({M, 10});
        const double s30 = saturation({M, 30});
        pc_axis = pc_axis && s10 < s30;
        sat += fmt::format(" M={}: {} vs {} dBm;", M, s10, s30);
    }
    return {m_axis && pc_axis,
            fmt::format("EE falls with M at p_c=30 dBm: {}; lower p_c higher EE and earlier "
                        "saturation (p_c=10 vs 30):{} {:.1f} s",
                        m_axis ? "yes" : "no", sat, seconds_since(t0))};
}

// 9 -------------------------------------------------------------------------

Outcome prop1() {
    ScenarioSpec sc;
    sc.num_bs_antennas = 4;
    sc.num_users = 2;
    sc.num_rx = {2};
    sc.seed = 3;
    const auto s = generate(sc);
    const auto pm = paper_power(20.0);
    SolverConfig cfg;
    cfg.mc_samples = 10000;
    const auto r = solve_ee_lowcomplexity(s, pm, std::nullopt, cfg);
    const auto rep = prop1_validate(s, pm, r.allocation, 50, 17, cfg);
    return {rep.max_difference <= 3.0 * rep.pooled_std_error,
            fmt::format("max rotated - beam EE {:.2e}, 3 pooled SE {:.2e}, max z {:.2f}",
                        rep.max_difference, 3.0 * rep.pooled_std_error, rep.max_z)};
}

// 10 ------------------------------------------------------------------------

Outcome determinism() {
    const char *config = R"({
        "scenario": {"M": 8, "K": 2, "num_rx": 2, "seed": 5},
        "power": {"pmax_dbm": 20},
        "solver": {"mc_samples": 500},
        "validate": {"prop1_rotations": 5},
        "sweep": {"pmax_dbm": [0, 10, 20], "pc_dbm": [10, 30]},
        "restarts": 2,
        "jobs": 3
    })";
    std::vector<std::string> files;
    bool same = true;
    const auto a = workdir("det_a");
    const auto b = workdir("det_b");
    for (const auto &dir : {a, b}) {
        auto cfg = cli::parse_config(config);
        cfg.out = dir.string();
        for (auto run : {cli::run_solve, cli::run_sweep, cli::run_validate, cli::run_trace})
            if (run(cfg) != 0)
                return {false, "a command failed"};
    }
    std::size_t n = 0;
    for (const auto &entry : fs::directory_iterator(a)) {
        const auto name = entry.path().filename();
        same = same && fs::exists(b / name) && slurp(a / name) == slurp(b / name);
        ++n;
    }
    return {same && n >= 7, fmt::format("{} output files {}", n, same ? "identical" : "differ")};
}

} // namespace

// Optional arguments select criteria by number, e.g. `acceptance 3 5`.
int main(int argc, char **argv) {
    const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria{
        {"DE vs Monte-Carlo rates", de_vs_mc},
        {"gradient checks", gradients},
        {"KKT residuals", kkt},
        {"oracle equivalence", oracles},
        {"algorithm equivalence", algorithms},
        {"monotone convergence", monotone},
        {"EE vs sum-rate design over P_max", fig2},
        {"EE versus M and p_c", fig56},
        {"beam-domain optimality (rotations)", prop1},
        {"determinism", determinism},
    };
    std::vector<bool> selected(criteria.size(), argc <= 1);
    for (int a = 1; a < argc; ++a) {
        const auto n = static_cast<std::size_t>(std::atoi(argv[a]));
        if (n < 1 || n > criteria.size()) {
            fmt::print(stderr, "unknown criterion '{}'\n", argv[a]);
            return 2;
        }
        selected[n - 1] = true;
    }
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!selected[i])
            continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        fmt::print("{} {:>2} {}: {}\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                   o.detail);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
