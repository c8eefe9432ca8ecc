#include "eemimo/oracle.hpp"

#include "eemimo/errors.hpp"
#include "eemimo/mc.hpp"
#include "eemimo/ops.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <tuple>
#include <utility>

namespace eemimo {

namespace {

std::vector<double> flatten(const PowerAllocation &a) {
    std::vector<double> out;
    for (const auto &l : a.lambdas)
        out.insert(out.end(), l.begin(), l.end());
    return out;
}

PowerAllocation unflatten(const std::vector<double> &x, std::size_t K, std::size_t M) {
    auto a = PowerAllocation::zeros(K, M);
    for (std::size_t k = 0; k < K; ++k)
        std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(k * M), M, a.lambdas[k].begin());
    return a;
}

double max_abs(const std::vector<double> &v) {
    double r = 0.0;
    for (double x : v)
        r = std::max(r, std::abs(x));
    return r;
}

} // namespace

void project_capped_simplex(std::vector<double> &x, std::optional<double> budget) {
    for (auto &v : x)
        v = std::max(v, 0.0);
    if (!budget)
        return;
    double total = 0.0;
    for (double v : x)
        total += v;
    if (total <= *budget)
        return;
    // Projection onto {sum = budget}: subtract the threshold tau and clip.
    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cum = 0.0;
    double tau = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        cum += sorted[i];
        const double t = (cum - *budget) / static_cast<double>(i + 1);
        if (i + 1 == sorted.size() || sorted[i + 1] <= t) {
            tau = t;
            break;
        }
    }
    for (auto &v : x)
        v = std::max(v - tau, 0.0);
}

namespace {

// Projected gradient ascent of a concave f. `eval` returns f and its gradient.
template <class Eval>
OracleResult pg_maximize(Eval &&eval, std::size_t K, std::size_t M, std::optional<double> p_max,
                         const PowerAllocation &start, const SolverConfig &cfg) {
    if (p_max && !(*p_max >= 0.0))
        throw InvalidInput("pg_solve: budget must be >= 0");
    auto residual = [&](const std::vector<double> &x, const std::vector<double> &g) {
        std::vector<double> y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            y[i] = x[i] + g[i];
        project_capped_simplex(y, p_max);
        double r = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            r = std::max(r, std::abs(y[i] - x[i]));
        return r;
    };

    std::vector<double> x = flatten(start);
    project_capped_simplex(x, p_max);
    auto [fx, g] = eval(x);
    double step = 1.0 / std::max(1.0, max_abs(g));
    const double tiny = 64.0 * std::numeric_limits<double>::epsilon();

    OracleResult res;
    for (std::size_t it = 1; it <= cfg.max_iter_pg; ++it) {
        const double r = residual(x, g);
        if (r <= cfg.eps_pg * std::max(1.0, max_abs(x))) {
            res.iterations = it - 1;
            res.kkt_residual = r;
            res.allocation = unflatten(x, K, M);
            res.objective = fx;
            return res;
        }
        std::vector<double> trial(x.size());
        double f_trial = 0.0;
        std::vector<double> g_trial;
        for (int bt = 0;; ++bt) {
            for (std::size_t i = 0; i < x.size(); ++i)
                trial[i] = x[i] + step * g[i];
            project_capped_simplex(trial, p_max);
            double dir = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i)
                dir += g[i] * (trial[i] - x[i]);
            std::tie(f_trial, g_trial) = eval(trial);
            if (std::isfinite(f_trial) && f_trial >= fx + 1e-4 * dir)
                break;
            // Concavity along the segment: a nonnegative slope at the trial
            // point means the whole segment ascends, even when the value
            // difference is lost in roundoff.
            double end_slope = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i)
                end_slope += g_trial[i] * (trial[i] - x[i]);
            if (std::isfinite(f_trial) && end_slope >= 0.0 &&
                f_trial >= fx - tiny * std::max(1.0, std::abs(fx)))
                break;
            step *= 0.5;
            if (bt > 200)
                throw NoConvergence("pg_solve line search", it, r);
        }
        double ss = 0.0;
        double sy = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double s = trial[i] - x[i];
            const double y = g[i] - g_trial[i];
            ss += s * s;
            sy += s * y;
        }
        step = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e12) : std::min(2.0 * step, 1e12);
        x = std::move(trial);
        fx = f_trial;
        g = std::move(g_trial);
    }
    throw NoConvergence("pg_solve", cfg.max_iter_pg, residual(x, g));
}

} // namespace

OracleResult pg_solve(const Surrogate &model, double level, std::optional<double> p_max,
                      const PowerAllocation &start, const SolverConfig &cfg) {
    const auto K = model.num_users();
    const auto M = model.num_beams();
    auto eval = [&](const std::vector<double> &x) {
        const auto a = unflatten(x, K, M);
        return std::pair{model.objective(a, level), flatten(PowerAllocation{model.gradient(a, level)})};
    };
    return pg_maximize(eval, K, M, p_max, start, cfg);
}

OracleResult pg_solve_exact(Surrogate &model, double level, std::optional<double> p_max,
                            const PowerAllocation &start, const SolverConfig &cfg) {
    const auto K = model.num_users();
    const auto M = model.num_beams();
    auto eval = [&](const std::vector<double> &x) {
        const auto a = unflatten(x, K, M);
        model.refresh(de_fixed_points(model.stats(), a, cfg));
        return std::pair{model.numerator(a) - level * a.total_power(),
                         flatten(PowerAllocation{model.gradient(a, level)})};
    };
    auto res = pg_maximize(eval, K, M, p_max, start, cfg);
    model.refresh(de_fixed_points(model.stats(), res.allocation, cfg));
    return res;
}

OracleResult pg_solve_f6(const ChannelStats &stats, const std::vector<DiagVec> &deltas,
                         const std::vector<DEState> &de_states, const PowerModel &pm, double eta,
                         std::optional<double> p_max, const SolverConfig &cfg) {
    const auto zero = PowerAllocation::zeros(stats.users.size(), stats.num_bs_antennas);
    const Surrogate model(stats, deltas, de_states, zero);
    return pg_solve(model, pm.xi * eta, p_max, zero, cfg);
}

OracleResult grid_search_ee(const ChannelStats &stats, const PowerModel &pm,
                            std::size_t points_per_axis, const SolverConfig &cfg,
                            GridObjective objective) {
    const auto K = stats.users.size();
    const auto M = stats.num_bs_antennas;
    const auto dims = K * M;
    if (dims > 3)
        throw InstanceTooLarge("grid search supports at most 3 power variables, got " +
                               std::to_string(dims));
    if (points_per_axis == 0)
        throw InvalidInput("grid search needs at least one step per axis");
    require_valid(stats, pm);
    const double step = pm.p_max / static_cast<double>(points_per_axis);

    auto evaluate = [&](const PowerAllocation &a) {
        return objective == GridObjective::de ? de_ee(stats, pm, a, cfg)
                                              : mc_ee(stats, pm, a, cfg).mean;
    };

    OracleResult best;
    best.objective = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> idx(dims, 0);
    for (;;) {
        std::size_t used = 0;
        for (auto i : idx)
            used += i;
        if (used <= points_per_axis) {
            auto a = PowerAllocation::zeros(K, M);
            for (std::size_t d = 0; d < dims; ++d)
                a.lambdas[d / M][d % M] = static_cast<double>(idx[d]) * step;
            const double v = evaluate(a);
            ++best.iterations;
            if (v > best.objective) {
                best.objective = v;
                best.allocation = std::move(a);
            }
        }
        std::size_t d = 0;
        while (d < dims && ++idx[d] > points_per_axis)
            idx[d++] = 0;
        if (d == dims)
            break;
    }
    return best;
}

} // namespace eemimo
