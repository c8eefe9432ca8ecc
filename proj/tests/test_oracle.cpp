#include "eemimo/de.hpp"
#include "eemimo/errors.hpp"
#include "eemimo/ops.hpp"
#include "eemimo/oracle.hpp"
#include "eemimo/wf.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <numeric>

using namespace eemimo;
using eemimo::testing::random_alloc;
using eemimo::testing::random_stats;
using eemimo::testing::rel_err;

namespace {

SolverConfig frozen() {
    SolverConfig cfg;
    cfg.de_refresh = DeRefresh::mm;
    return cfg;
}

} // namespace

TEST(Oracle, ProjectionOntoTheCappedSimplex) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.5, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> y(6);
        for (auto &v : y)
            v = n(rng);
        auto p = y;
        project_capped_simplex(p, 1.0);
        EXPECT_LE(std::accumulate(p.begin(), p.end(), 0.0), 1.0 + 1e-12);
        for (double v : p)
            EXPECT_GE(v, 0.0);
        // Variational inequality against random feasible points.
        for (int j = 0; j < 20; ++j) {
            std::vector<double> z(6);
            for (auto &v : z)
                v = std::abs(n(rng));
            const double s = std::accumulate(z.begin(), z.end(), 0.0);
            for (auto &v : z)
                v /= std::max(1.0, s);
            double vi = 0.0;
            for (std::size_t i = 0; i < 6; ++i)
                vi += (y[i] - p[i]) * (z[i] - p[i]);
            EXPECT_LE(vi, 1e-12);
        }
    }
    std::vector<double> x{-1.0, 2.0};
    project_capped_simplex(x, std::nullopt);
    EXPECT_EQ(x, (std::vector<double>{0.0, 2.0}));
}

TEST(Oracle, BudgetSubproblemMatchesWaterfilling) {
    const auto cfg = frozen();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto s = random_stats(2, 4, 2, 2000 + seed, 10.0);
        const auto x0 = random_alloc(2, 4, 1.0, 2100 + seed);
        const auto model = make_surrogate(s, x0, cfg);
        const double p_max = 0.5 + 0.25 * static_cast<double>(seed);
        const auto wf = sr_waterfill(model, p_max, x0, cfg);
        const auto pg = pg_solve(model, 0.0, p_max, x0, cfg);
        EXPECT_LE(rel_err(model.objective(wf.allocation, 0.0), pg.objective), 1e-4)
            << "seed " << seed;
        EXPECT_LE(pg.kkt_residual, 1e-6);
    }
}

TEST(Oracle, LevelSubproblemMatchesWaterfilling) {
    const auto cfg = frozen();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto s = random_stats(2, 4, 2, 2200 + seed, 10.0);
        const auto x0 = random_alloc(2, 4, 1.0, 2300 + seed);
        const auto model = make_surrogate(s, x0, cfg);
        const double level = 0.05 + 0.02 * static_cast<double>(seed);
        WfWorkspace ws(model, x0);
        ws.solve(level, std::numeric_limits<double>::infinity(), cfg);
        const auto pg = pg_solve(model, level, std::nullopt, x0, cfg);
        EXPECT_LE(rel_err(model.objective(ws.allocation(), level), pg.objective), 1e-4)
            << "seed " << seed;
    }
}

TEST(Oracle, ExactSubproblemMatchesRefreshedAscent) {
    const SolverConfig cfg;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto s = random_stats(2, 4, 2, 2400 + seed, 10.0);
        const auto x0 = random_alloc(2, 4, 1.0, 2500 + seed);
        auto a = make_surrogate(s, x0, cfg);
        auto b = make_surrogate(s, x0, cfg);
        const auto asc = refreshed_ascent(a, 0.1, 2.0, x0, cfg);
        const auto pg = pg_solve_exact(b, 0.1, 2.0, x0, cfg);
        EXPECT_LE(rel_err(asc.value, pg.objective), 1e-6) << "seed " << seed;
    }
}

TEST(Oracle, DinkelbachLevelSubproblem) {
    const auto cfg = frozen();
    const auto s = random_stats(2, 3, 2, 2600, 10.0);
    const auto zero = PowerAllocation::zeros(2, 3);
    const PowerModel pm{5.0, 0.1, 1.0, 2.0};
    const auto r = pg_solve_f6(s, all_deltas(s, zero), de_fixed_points(s, zero, cfg), pm, 0.2,
                               pm.p_max, cfg);
    EXPECT_LE(r.allocation.total_power(), pm.p_max + 1e-12);
    EXPECT_LE(r.kkt_residual, 1e-6);
}

TEST(Oracle, GridSearchFindsTheBestPoint) {
    ChannelStats s;
    s.num_bs_antennas = 2;
    s.users.push_back({1, {4.0, 1.0}});
    const PowerModel pm{5.0, 0.1, 0.5, 1.0};
    const SolverConfig cfg;
    const auto r = grid_search_ee(s, pm, 20, cfg);
    EXPECT_EQ(r.iterations, 21u * 22u / 2u);
    EXPECT_NEAR(r.objective, de_ee(s, pm, r.allocation, cfg), 1e-15);
    // Brute-force recheck on the same lattice.
    double best = 0.0;
    for (int i = 0; i <= 20; ++i)
        for (int j = 0; i + j <= 20; ++j) {
            PowerAllocation a{{{i * 0.05, j * 0.05}}};
            best = std::max(best, de_ee(s, pm, a, cfg));
        }
    EXPECT_DOUBLE_EQ(r.objective, best);
}

TEST(Oracle, GridSearchRejectsLargeInstances) {
    const auto s = random_stats(2, 2, 1, 2700);
    EXPECT_THROW(grid_search_ee(s, PowerModel{}, 10, SolverConfig{}), InstanceTooLarge);
    const auto t = random_stats(1, 2, 1, 2701);
    EXPECT_THROW(grid_search_ee(t, PowerModel{}, 0, SolverConfig{}), InvalidInput);
}
