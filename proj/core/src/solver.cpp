#include "eemimo/solver.hpp"

#include "eemimo/de.hpp"
#include "eemimo/mc.hpp"
#include "eemimo/ops.hpp"
#include "eemimo/oracle.hpp"
#include "eemimo/surrogate.hpp"
#include "eemimo/wf.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace eemimo {

namespace {

using Clock = std::chrono::steady_clock;

struct Prepared {
    ChannelStats stats; ///< normalized when cfg.normalize is set
    PowerAllocation start;
};

Prepared prepare(const ChannelStats &stats, const PowerModel &pm,
                 const std::optional<PowerAllocation> &alloc0, const SolverConfig &cfg) {
    require_valid(stats, pm);
    if (auto issue = validate(cfg))
        throw InvalidInput(issue->message);
    Prepared p{cfg.normalize ? normalized(stats) : stats,
               alloc0 ? *alloc0 : default_start(stats, pm)};
    require_valid(stats, p.start);
    const double total = p.start.total_power();
    if (total > pm.p_max) {
        const double scale = pm.p_max > 0.0 ? pm.p_max / total : 0.0;
        for (auto &l : p.start.lambdas)
            for (auto &v : l)
                v *= scale;
    }
    return p;
}

MmRecord evaluate(const ChannelStats &stats, const PowerModel &pm, const PowerAllocation &x,
                  const SolverConfig &cfg, std::size_t iteration, Clock::time_point t0) {
    MmRecord r;
    r.iteration = iteration;
    r.sum_rate = de_sum_rate(stats, x, cfg);
    r.total_power = x.total_power();
    r.ee = ee_value(pm, stats.num_bs_antennas, r.total_power, r.sum_rate);
    r.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
    return r;
}

bool converged(double prev, double next, double eps) {
    const double scale = std::max(std::abs(prev), std::abs(next));
    return std::abs(next - prev) <= eps * scale;
}

SolveResult finish(PowerAllocation x, SolveTrace trace) {
    SolveResult res;
    const auto &last = trace.records.back();
    res.ee = last.ee;
    res.sum_rate = last.sum_rate;
    res.total_power = last.total_power;
    res.allocation = std::move(x);
    res.trace = std::move(trace);
    return res;
}

SolveResult zero_budget(const ChannelStats &stats, const PowerModel &pm, const SolverConfig &cfg,
                        Clock::time_point t0) {
    auto x = PowerAllocation::zeros(stats.users.size(), stats.num_bs_antennas);
    SolveTrace trace;
    trace.records.push_back(evaluate(stats, pm, x, cfg, 0, t0));
    trace.converged = true;
    return finish(std::move(x), std::move(trace));
}

// Runs `step` once per MM iteration. `step` fills in the record fields it
// owns and returns the next allocation.
template <class Step, class Metric>
SolveResult mm_loop(const Prepared &p, const PowerModel &pm, const SolverConfig &cfg,
                    Clock::time_point t0, Step &&step, Metric &&metric) {
    PowerAllocation x = p.start;
    SolveTrace trace;
    trace.records.push_back(evaluate(p.stats, pm, x, cfg, 0, t0));
    for (std::size_t l = 1; l <= cfg.max_iter_mm; ++l) {
        MmRecord rec;
        PowerAllocation next;
        try {
            next = step(x, rec);
            const auto eval = evaluate(p.stats, pm, next, cfg, l, t0);
            rec.iteration = l;
            rec.ee = eval.ee;
            rec.sum_rate = eval.sum_rate;
            rec.total_power = eval.total_power;
            rec.wall_time = eval.wall_time;
        } catch (const NoConvergence &e) {
            throw MmAborted(std::string("MM iteration ") + std::to_string(l) + ": " + e.what(),
                            trace);
        }
        const double prev = metric(trace.records.back());
        trace.records.push_back(std::move(rec));
        x = std::move(next);
        if (converged(prev, metric(trace.records.back()), cfg.eps_mm)) {
            trace.converged = true;
            return finish(std::move(x), std::move(trace));
        }
    }
    throw MmAborted("MM loop: no convergence after " + std::to_string(cfg.max_iter_mm) +
                        " iterations",
                    trace);
}

double ee_metric(const MmRecord &r) { return r.ee; }
double sr_metric(const MmRecord &r) { return r.sum_rate; }

} // namespace

std::string to_string(Branch b) {
    switch (b) {
    case Branch::none:
        return "none";
    case Branch::p1:
        return "P1";
    case Branch::p2:
        return "P2";
    }
    return "unknown";
}

std::string to_string(Objective o) { return o == Objective::ee ? "ee" : "sumrate"; }
std::string to_string(Algorithm a) {
    return a == Algorithm::lowcomplexity ? "lowcomplexity" : "reference";
}

Objective parse_objective(const std::string &s) {
    if (s == "ee")
        return Objective::ee;
    if (s == "sumrate")
        return Objective::sumrate;
    throw InvalidInput("unknown objective '" + s + "'");
}

Algorithm parse_algorithm(const std::string &s) {
    if (s == "lowcomplexity")
        return Algorithm::lowcomplexity;
    if (s == "reference")
        return Algorithm::reference;
    throw InvalidInput("unknown algorithm '" + s + "'");
}

PowerAllocation default_start(const ChannelStats &stats, const PowerModel &pm) {
    return PowerAllocation::uniform(stats.users.size(), stats.num_bs_antennas, pm.p_max);
}

SolveResult solve_ee_lowcomplexity(const ChannelStats &stats, const PowerModel &pm,
                                   const std::optional<PowerAllocation> &alloc0,
                                   const SolverConfig &cfg) {
    const auto t0 = Clock::now();
    const auto p = prepare(stats, pm, alloc0, cfg);
    if (pm.p_max == 0.0)
        return zero_budget(p.stats, pm, cfg, t0);
    auto step = [&](const PowerAllocation &x, MmRecord &rec) {
        auto model = make_surrogate(p.stats, x, cfg);
        const auto p1 = ee_waterfill(model, pm, x, cfg);
        rec.p_opt = p1.allocation.total_power();
        rec.eta_trace = p1.eta_trace;
        if (rec.p_opt <= pm.p_max) {
            rec.branch = Branch::p1;
            rec.inner_iterations = p1.dinkelbach_iterations;
            return p1.allocation;
        }
        // Past the budget the auxiliary power ratio is still increasing, so
        // the EE optimum spends the whole budget.
        rec.branch = Branch::p2;
        if (cfg.de_refresh == DeRefresh::dinkelbach) {
            auto fresh = make_surrogate(p.stats, x, cfg);
            auto p2 = refreshed_ascent(fresh, 0.0, pm.p_max, x, cfg);
            rec.inner_iterations = p2.refreshes;
            return p2.allocation;
        }
        const auto p2 = sr_waterfill(model, pm.p_max, x, cfg);
        rec.inner_iterations = p2.steps.size();
        return p2.allocation;
    };
    return mm_loop(p, pm, cfg, t0, step, ee_metric);
}

SolveResult solve_ee_reference(const ChannelStats &stats, const PowerModel &pm,
                               const std::optional<PowerAllocation> &alloc0,
                               const SolverConfig &cfg) {
    const auto t0 = Clock::now();
    const auto p = prepare(stats, pm, alloc0, cfg);
    if (pm.p_max == 0.0)
        return zero_budget(p.stats, pm, cfg, t0);
    const auto M = p.stats.num_bs_antennas;
    auto step = [&](const PowerAllocation &x, MmRecord &rec) {
        auto model = make_surrogate(p.stats, x, cfg);
        const bool exact = cfg.de_refresh == DeRefresh::dinkelbach;
        auto consumed = [&](const PowerAllocation &a) { return pm.consumed(a.total_power(), M); };
        double eta = model.numerator(x) / consumed(x);
        rec.eta_trace.push_back(eta);
        rec.branch = Branch::none;
        PowerAllocation y = x;
        for (std::size_t i = 1; i <= cfg.max_iter_dinkelbach; ++i) {
            y = exact ? pg_solve_exact(model, pm.xi * eta, pm.p_max, y, cfg).allocation
                      : pg_solve(model, pm.xi * eta, pm.p_max, y, cfg).allocation;
            const double n = model.numerator(y);
            const double d = consumed(y);
            // F = max_y N(y) - eta D(y) is >= 0 and vanishes at the optimal level.
            const double f = n - eta * d;
            eta = n / d;
            rec.eta_trace.push_back(eta);
            rec.inner_iterations = i;
            if (f <= cfg.eps_dinkelbach)
                return y;
        }
        throw NoConvergence("reference Dinkelbach", cfg.max_iter_dinkelbach, 0.0);
    };
    return mm_loop(p, pm, cfg, t0, step, ee_metric);
}

SolveResult solve_sumrate(const ChannelStats &stats, const PowerModel &pm,
                          const std::optional<PowerAllocation> &alloc0, const SolverConfig &cfg) {
    const auto t0 = Clock::now();
    const auto p = prepare(stats, pm, alloc0, cfg);
    if (pm.p_max == 0.0)
        return zero_budget(p.stats, pm, cfg, t0);
    auto step = [&](const PowerAllocation &x, MmRecord &rec) {
        auto model = make_surrogate(p.stats, x, cfg);
        rec.branch = Branch::p2;
        if (cfg.de_refresh == DeRefresh::dinkelbach) {
            auto sr = refreshed_ascent(model, 0.0, pm.p_max, x, cfg);
            rec.inner_iterations = sr.refreshes;
            return sr.allocation;
        }
        const auto sr = sr_waterfill(model, pm.p_max, x, cfg);
        rec.inner_iterations = sr.steps.size();
        return sr.allocation;
    };
    return mm_loop(p, pm, cfg, t0, step, sr_metric);
}

SolveResult solve(const ChannelStats &stats, const PowerModel &pm,
                  const std::optional<PowerAllocation> &alloc0, Objective objective,
                  Algorithm algorithm, const SolverConfig &cfg) {
    if (objective == Objective::sumrate)
        return solve_sumrate(stats, pm, alloc0, cfg);
    return algorithm == Algorithm::lowcomplexity ? solve_ee_lowcomplexity(stats, pm, alloc0, cfg)
                                                 : solve_ee_reference(stats, pm, alloc0, cfg);
}

PowerAllocation restart_start(const ChannelStats &stats, const PowerModel &pm, std::size_t r,
                              std::uint64_t seed) {
    if (r == 0)
        return default_start(stats, pm);
    const auto K = stats.users.size();
    const auto M = stats.num_bs_antennas;
    std::mt19937_64 rng(stream_seed(seed, 0x7265737461727473ULL, r));
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    auto a = PowerAllocation::zeros(K, M);
    double total = 0.0;
    for (auto &l : a.lambdas)
        for (auto &v : l)
            total += (v = unit(rng));
    for (auto &l : a.lambdas)
        for (auto &v : l)
            v *= pm.p_max / total;
    return a;
}

RestartSummary solve_restarts(const ChannelStats &stats, const PowerModel &pm,
                              Objective objective, Algorithm algorithm, std::size_t restarts,
                              const SolverConfig &cfg) {
    if (restarts == 0)
        throw InvalidInput("restarts must be >= 1");
    RestartSummary out;
    out.restarts = restarts;
    auto score = [&](const SolveResult &r) {
        return objective == Objective::ee ? r.ee : r.sum_rate;
    };
    for (std::size_t r = 0; r < restarts; ++r) {
        auto res = solve(stats, pm, restart_start(stats, pm, r, cfg.seed), objective, algorithm, cfg);
        out.mean_ee += res.ee;
        out.mean_sum_rate += res.sum_rate;
        if (r == 0 || score(res) > score(out.best))
            out.best = std::move(res);
    }
    out.mean_ee /= static_cast<double>(restarts);
    out.mean_sum_rate /= static_cast<double>(restarts);
    return out;
}

std::vector<PowerCurvePoint> auxiliary_power_curve(const ChannelStats &stats,
                                                   const PowerModel &pm, const SolverConfig &cfg,
                                                   const std::vector<double> &grid,
                                                   const std::optional<PowerAllocation> &expansion) {
    require_valid(stats, pm);
    const auto S = cfg.normalize ? normalized(stats) : stats;
    const auto K = S.users.size();
    const auto M = S.num_bs_antennas;
    const auto at = expansion ? *expansion : PowerAllocation::zeros(K, M);
    require_valid(stats, at);
    const auto model = make_surrogate(S, at, cfg);
    std::vector<PowerCurvePoint> out;
    PowerAllocation warm = PowerAllocation::zeros(K, M);
    for (double pt : grid) {
        if (!(pt >= 0.0) || pt > pm.p_max)
            throw InvalidInput("power curve grid must lie in [0, p_max]");
        const auto sr = sr_waterfill(model, pt, warm, cfg);
        warm = sr.allocation;
        PowerCurvePoint pnt;
        pnt.p_t = pt;
        pnt.f = model.numerator(sr.allocation);
        pnt.ratio = pnt.f / pm.consumed(pt, M);
        out.push_back(pnt);
    }
    return out;
}

} // namespace eemimo
