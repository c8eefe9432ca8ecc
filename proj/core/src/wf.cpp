#include "eemimo/wf.hpp"

#include "eemimo/de.hpp"
#include "eemimo/errors.hpp"
#include "eemimo/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <utility>

namespace eemimo {

RhoValue rho(double x, const RhoContext &ctx) {
    const double own_den = 1.0 + ctx.gamma * x;
    double value = ctx.gamma / own_den - ctx.delta - ctx.level;
    double derivative = -(ctx.gamma * ctx.gamma) / (own_den * own_den);
    for (const auto &[r, base] : ctx.cross) {
        const double den = base + r * x;
        value += r / den;
        derivative -= (r * r) / (den * den);
    }
    return {value, derivative};
}

double rho_root_bound(const RhoContext &ctx) {
    const double slope = ctx.delta + ctx.level;
    if (!(slope > 0.0))
        return std::numeric_limits<double>::infinity();
    return static_cast<double>(1 + ctx.cross.size()) / slope;
}

WfWorkspace::WfWorkspace(const Surrogate &model, PowerAllocation start)
    : model_(model), x_(std::move(start)) {
    if (x_.lambdas.size() != model_.num_users())
        throw DimensionMismatch("water-filling start has the wrong number of users");
    for (auto &l : x_.lambdas) {
        if (l.size() != model_.num_beams())
            throw DimensionMismatch("water-filling start has the wrong number of beams");
        for (auto &v : l)
            v = std::max(v, 0.0);
    }
    resync();
}

void WfWorkspace::resync() { kbar_ = all_kbar(model_.stats(), x_); }

RhoContext WfWorkspace::context(std::size_t k, std::size_t m, double level) const {
    const auto &stats = model_.stats();
    const auto M = stats.num_bs_antennas;
    RhoContext ctx;
    ctx.gamma = model_.gamma(k)[m];
    ctx.delta = model_.delta(k)[m];
    ctx.level = level;
    const double xkm = x_.lambdas[k][m];
    for (std::size_t kp = 0; kp < stats.users.size(); ++kp) {
        if (kp == k)
            continue;
        const auto &user = stats.users[kp];
        const auto &gt = model_.gamma_tilde(kp);
        for (std::size_t n = 0; n < user.num_rx; ++n) {
            const double r = user.omega[n * M + m];
            if (r > 0.0)
                ctx.cross.emplace_back(r, gt[n] + kbar_[kp][n] - r * xkm);
        }
    }
    return ctx;
}

double WfWorkspace::sweep(double level, double cap, const SolverConfig &cfg) {
    resync();
    const auto &stats = model_.stats();
    const auto M = stats.num_bs_antennas;
    double max_change = 0.0;
    for (std::size_t k = 0; k < stats.users.size(); ++k) {
        for (std::size_t m = 0; m < M; ++m) {
            const auto ctx = context(k, m, level);
            const double upper = std::min(cap, rho_root_bound(ctx));
            const double old = x_.lambdas[k][m];
            const auto root = newton_root([&ctx](double x) { return rho(x, ctx); },
                                          std::min(old, upper), cfg.eps_newton,
                                          cfg.max_iter_newton, 0.0, upper);
            const double next = std::max(root.x, 0.0);
            const double change = next - old;
            if (change == 0.0)
                continue;
            x_.lambdas[k][m] = next;
            for (std::size_t kp = 0; kp < stats.users.size(); ++kp) {
                if (kp == k)
                    continue;
                const auto &user = stats.users[kp];
                for (std::size_t n = 0; n < user.num_rx; ++n)
                    kbar_[kp][n] += user.omega[n * M + m] * change;
            }
            max_change = std::max(max_change, std::abs(change));
        }
    }
    return max_change;
}

std::size_t WfWorkspace::solve(double level, double cap, const SolverConfig &cfg) {
    double change = 0.0;
    PowerAllocation prev = x_;
    for (std::size_t s = 1; s <= cfg.max_iter_sweep; ++s) {
        change = sweep(level, cap, cfg);
        if (change <= cfg.eps_sweep)
            return s;
        extrapolate(prev, level, cap);
        prev = x_;
    }
    throw NoConvergence("water-filling sweeps", cfg.max_iter_sweep, change);
}

// Coordinate sweeps crawl along directions in which the objective is nearly
// flat. Try steps of 1, 2, 4, ... 1024 times the last sweep's displacement and
// keep the best one if it beats the current value by more than roundoff.
double WfWorkspace::extrapolate(const PowerAllocation &prev, double level, double cap) {
    const double base = model_.objective(x_, level);
    double best_value = base;
    PowerAllocation best;
    PowerAllocation trial = x_;
    for (double beta = 1.0; beta <= 1024.0; beta *= 2.0) {
        for (std::size_t k = 0; k < x_.lambdas.size(); ++k)
            for (std::size_t m = 0; m < x_.lambdas[k].size(); ++m)
                trial.lambdas[k][m] = std::clamp(
                    x_.lambdas[k][m] + beta * (x_.lambdas[k][m] - prev.lambdas[k][m]), 0.0, cap);
        const double v = model_.objective(trial, level);
        if (v > best_value) {
            best_value = v;
            best = trial;
        }
    }
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(base));
    if (best_value - base <= noise)
        return base;
    x_ = std::move(best);
    resync();
    return best_value;
}

EeWaterfillResult ee_waterfill(const ChannelStats &stats, const std::vector<DiagVec> &deltas,
                               const std::vector<DEState> &de_states, const PowerModel &pm,
                               const PowerAllocation &alloc0, const SolverConfig &cfg) {
    Surrogate model(stats, deltas, de_states, alloc0);
    return ee_waterfill(model, pm, alloc0, cfg);
}

EeWaterfillResult ee_waterfill(Surrogate &model, const PowerModel &pm,
                               const PowerAllocation &alloc0, const SolverConfig &cfg) {
    const auto M = model.num_beams();
    const auto consumed = [&](const PowerAllocation &a) {
        return pm.consumed(a.total_power(), M);
    };
    const bool exact = cfg.de_refresh == DeRefresh::dinkelbach;
    // Used only while xi * eta = 0, where the subproblem has no finite maximizer.
    const double fallback_cap = 10.0 * std::max({pm.p_max, alloc0.total_power(), 1.0});

    EeWaterfillResult res;
    if (exact)
        model.refresh(de_fixed_points(model.stats(), alloc0, cfg));
    WfWorkspace ws(model, alloc0);
    PowerAllocation x = ws.allocation();
    double eta = model.numerator(x) / consumed(x);
    res.eta_trace.push_back(eta);
    for (std::size_t i = 1; i <= cfg.max_iter_dinkelbach; ++i) {
        const double level = pm.xi * eta;
        if (exact) {
            auto r = refreshed_ascent(model, level, std::nullopt, x, cfg);
            res.sweeps += r.sweeps;
            x = std::move(r.allocation);
        } else {
            const double cap =
                level > 0.0 ? std::numeric_limits<double>::infinity() : fallback_cap;
            res.sweeps += ws.solve(level, cap, cfg);
            x = ws.allocation();
        }
        const double next = model.numerator(x) / consumed(x);
        res.eta_trace.push_back(next);
        res.level = level;
        res.dinkelbach_iterations = i;
        const double step = std::abs(next - eta);
        eta = next;
        if (step <= cfg.eps_eta) {
            res.eta = eta;
            res.allocation = std::move(x);
            res.states = model.states();
            return res;
        }
    }
    throw NoConvergence("ee_waterfill Dinkelbach", cfg.max_iter_dinkelbach,
                        std::abs(res.eta_trace.back() - res.eta_trace[res.eta_trace.size() - 2]));
}

double mu_upper_bound(const Surrogate &model) {
    const auto &stats = model.stats();
    const auto M = stats.num_bs_antennas;
    const auto K = stats.users.size();
    // zero_interf[k][m] = sum_n omega_k[n,m] / (gammaTilde_kn + sigma^2)
    std::vector<DiagVec> zero_interf(K, DiagVec(M, 0.0));
    for (std::size_t k = 0; k < K; ++k) {
        const auto &user = stats.users[k];
        for (std::size_t n = 0; n < user.num_rx; ++n) {
            const double inv = 1.0 / (model.gamma_tilde(k)[n] + stats.noise_power);
            for (std::size_t m = 0; m < M; ++m)
                zero_interf[k][m] += user.omega[n * M + m] * inv;
        }
    }
    double bound = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t m = 0; m < M; ++m) {
            double v = model.gamma(k)[m] - model.delta(k)[m];
            for (std::size_t kp = 0; kp < K; ++kp)
                if (kp != k)
                    v += zero_interf[kp][m];
            bound = std::max(bound, v);
        }
    return bound;
}

SrWaterfillResult sr_waterfill(const ChannelStats &stats, const std::vector<DiagVec> &deltas,
                               const std::vector<DEState> &de_states, double p_max,
                               const PowerAllocation &alloc0, const SolverConfig &cfg) {
    const Surrogate model(stats, deltas, de_states, alloc0);
    return sr_waterfill(model, p_max, alloc0, cfg);
}

SrWaterfillResult sr_waterfill(const Surrogate &model, double p_max,
                               const PowerAllocation &alloc0, const SolverConfig &cfg) {
    return budget_waterfill(model, 0.0, p_max, alloc0, cfg);
}

SrWaterfillResult budget_waterfill(const Surrogate &model, double level, double p_max,
                                   const PowerAllocation &alloc0, const SolverConfig &cfg) {
    if (!(p_max >= 0.0))
        throw InvalidInput("sr_waterfill: budget must be >= 0");
    SrWaterfillResult res;
    const auto K = model.num_users();
    const auto M = model.num_beams();
    if (p_max == 0.0) {
        res.allocation = PowerAllocation::zeros(K, M);
        res.mu = std::max(0.0, mu_upper_bound(model) - level);
        res.binding = true;
        return res;
    }

    PowerAllocation start = alloc0;
    if (const double total = start.total_power(); total > p_max)
        for (auto &l : start.lambdas)
            for (auto &v : l)
                v *= p_max / total;
    WfWorkspace ws(model, std::move(start));

    // With mu = 0 the coordinates are capped at the budget, so a total at or
    // below it is the unconstrained optimum and the constraint is slack.
    res.sweeps += ws.solve(level, p_max, cfg);
    double power = ws.allocation().total_power();
    res.steps.push_back({0.0, power});
    if (power <= p_max + cfg.eps_power) {
        res.allocation = ws.allocation();
        res.mu = 0.0;
        res.binding = std::abs(power - p_max) <= cfg.eps_power;
        return res;
    }

    double mu_lo = 0.0;
    double mu_hi = std::max(0.0, mu_upper_bound(model) - level);
    for (std::size_t it = 1; it <= cfg.max_iter_bisection; ++it) {
        const double mu = 0.5 * (mu_lo + mu_hi);
        res.sweeps += ws.solve(level + mu, p_max, cfg);
        power = ws.allocation().total_power();
        res.steps.push_back({mu, power});
        if (std::abs(power - p_max) <= cfg.eps_power) {
            res.allocation = ws.allocation();
            res.mu = mu;
            res.binding = true;
            return res;
        }
        if (power < p_max)
            mu_hi = mu;
        else
            mu_lo = mu;
    }
    throw NoConvergence("sr_waterfill bisection", cfg.max_iter_bisection,
                        std::abs(power - p_max));
}

AscentResult refreshed_ascent(Surrogate &model, double level, std::optional<double> p_max,
                              const PowerAllocation &start, const SolverConfig &cfg) {
    const auto &stats = model.stats();
    AscentResult res;
    PowerAllocation x = start;
    if (p_max) {
        if (const double total = x.total_power(); total > *p_max)
            for (auto &l : x.lambdas)
                for (auto &v : l)
                    v *= *p_max > 0.0 ? *p_max / total : 0.0;
    }
    const double fallback_cap = 10.0 * std::max(1.0, x.total_power());
    auto value = [&](const PowerAllocation &a) {
        model.refresh(de_fixed_points(stats, a, cfg));
        ++res.refreshes;
        return model.numerator(a) - level * a.total_power();
    };

    double fx = value(x);
    for (std::size_t j = 1; j <= cfg.max_iter_ascent; ++j) {
        PowerAllocation target;
        if (p_max) {
            auto r = budget_waterfill(model, level, *p_max, x, cfg);
            res.sweeps += r.sweeps;
            target = std::move(r.allocation);
            // Bisection stops within eps_power of the budget; put the target
            // exactly on it so mu times that error does not swamp the slope.
            if (const double total = target.total_power(); r.binding && total > 0.0)
                for (auto &l : target.lambdas)
                    for (auto &v : l)
                        v *= *p_max / total;
        } else {
            WfWorkspace ws(model, x);
            res.sweeps +=
                ws.solve(level, level > 0.0 ? std::numeric_limits<double>::infinity() : fallback_cap,
                         cfg);
            target = ws.allocation();
        }

        double gap = 0.0;
        double slope = 0.0;
        const auto g = model.gradient(x, level);
        for (std::size_t k = 0; k < x.lambdas.size(); ++k)
            for (std::size_t m = 0; m < x.lambdas[k].size(); ++m) {
                const double d = target.lambdas[k][m] - x.lambdas[k][m];
                gap = std::max(gap, std::abs(d));
                slope += g[k][m] * d;
            }
        if (gap <= cfg.eps_ascent * std::max(1.0, x.total_power()) || !(slope > 0.0))
            break;

        // The exact objective phi(t) = f(x + t d) is concave, so its slope
        // phi'(t) = grad(x + t d) . d decreases from phi'(0) = slope. Take the
        // full step when phi'(1) >= 0; otherwise locate a root of phi' by
        // Illinois regula falsi, stopping at a point with |phi'(t)| <= slope / 10
        // and phi(t) >= phi(0) + 1e-4 t slope.
        PowerAllocation trial = x;
        auto move_to = [&](double t) {
            for (std::size_t k = 0; k < x.lambdas.size(); ++k)
                for (std::size_t m = 0; m < x.lambdas[k].size(); ++m)
                    trial.lambdas[k][m] = std::max(
                        0.0, x.lambdas[k][m] + t * (target.lambdas[k][m] - x.lambdas[k][m]));
            model.refresh(de_fixed_points(stats, trial, cfg));
            ++res.refreshes;
            const auto gt = model.gradient(trial, level);
            double dd = 0.0;
            for (std::size_t k = 0; k < x.lambdas.size(); ++k)
                for (std::size_t m = 0; m < x.lambdas[k].size(); ++m)
                    dd += gt[k][m] * (target.lambdas[k][m] - x.lambdas[k][m]);
            return std::pair{model.numerator(trial) - level * trial.total_power(), dd};
        };
        double t = 1.0;
        auto [ft, st] = move_to(t);
        double t_lo = 0.0, s_lo = slope;
        double t_hi = 1.0, s_hi = st;
        bool accepted = st >= 0.0 && ft >= fx;
        for (int side = 0, it = 0; !accepted && it < 100; ++it) {
            t = t_hi - s_hi * (t_hi - t_lo) / (s_hi - s_lo);
            if (!(t > t_lo && t < t_hi))
                t = 0.5 * (t_lo + t_hi);
            std::tie(ft, st) = move_to(t);
            if (std::abs(st) <= 0.1 * slope && ft >= fx + 1e-4 * t * slope) {
                accepted = true;
            } else if (st > 0.0) {
                t_lo = t;
                s_lo = st;
                if (side == 1)
                    s_hi *= 0.5;
                side = 1;
            } else {
                t_hi = t;
                s_hi = st;
                if (side == -1)
                    s_lo *= 0.5;
                side = -1;
            }
        }
        if (!accepted || !(ft >= fx))
            break;
        fx = ft;
        x = std::move(trial);
        if (j == cfg.max_iter_ascent)
            throw NoConvergence("refreshed_ascent", j, gap);
    }
    fx = value(x);
    res.allocation = std::move(x);
    res.value = fx;
    return res;
}

KktReport kkt_residual(const Surrogate &model, const PowerAllocation &alloc, double level) {
    const auto g = model.gradient(alloc, level);
    KktReport rep;
    for (std::size_t k = 0; k < g.size(); ++k)
        for (std::size_t m = 0; m < g[k].size(); ++m) {
            if (alloc.lambdas[k][m] > 0.0) {
                ++rep.active;
                rep.stationarity = std::max(rep.stationarity, std::abs(g[k][m]));
            } else {
                rep.inactivity = std::max(rep.inactivity, g[k][m]);
            }
        }
    return rep;
}

} // namespace eemimo
