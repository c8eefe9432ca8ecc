#include "cli.hpp"

#include "eemimo/de.hpp"
#include "eemimo/errors.hpp"
#include "eemimo/mc.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace eemimo::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_error = 1;
constexpr int exit_no_convergence = 3;

std::string join(const std::string &path, const std::string &key) {
    return path.empty() ? key : path + "." + key;
}

void reject_unknown(const json &obj, const std::string &path,
                    std::initializer_list<const char *> known) {
    if (!obj.is_object())
        throw ParseError("expected an object", 0, path);
    for (const auto &[key, value] : obj.items()) {
        (void)value;
        if (std::none_of(known.begin(), known.end(), [&](const char *k) { return key == k; }))
            throw ParseError("unknown key", 0, join(path, key));
    }
}

double get_real(const json &j, const std::string &path) {
    if (!j.is_number())
        throw ParseError("expected a number", 0, path);
    return j.get<double>();
}

std::size_t get_count(const json &j, const std::string &path) {
    if (!j.is_number_integer() || j.get<long long>() < 0)
        throw ParseError("expected a nonnegative integer", 0, path);
    return j.get<std::size_t>();
}

bool get_bool(const json &j, const std::string &path) {
    if (!j.is_boolean())
        throw ParseError("expected true or false", 0, path);
    return j.get<bool>();
}

std::string get_string(const json &j, const std::string &path) {
    if (!j.is_string())
        throw ParseError("expected a string", 0, path);
    return j.get<std::string>();
}

// A scalar is accepted where a per-user list is expected.
template <class T, class Get>
std::vector<T> get_list(const json &j, const std::string &path, Get get) {
    std::vector<T> out;
    if (!j.is_array()) {
        out.push_back(get(j, path));
        return out;
    }
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(get(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

template <class T, class Get>
void maybe(const json &obj, const char *key, const std::string &path, T &dst, Get get) {
    if (const auto it = obj.find(key); it != obj.end())
        dst = get(*it, join(path, key));
}

template <class E, class Parse>
E get_enum(const json &j, const std::string &path, Parse parse) {
    const auto s = get_string(j, path);
    try {
        return parse(s);
    } catch (const Error &e) {
        throw ParseError(e.what(), 0, path);
    }
}

DeRefresh parse_refresh(const std::string &s) {
    if (s == "mm")
        return DeRefresh::mm;
    if (s == "dinkelbach")
        return DeRefresh::dinkelbach;
    throw InvalidInput("unknown refresh policy '" + s + "'");
}

void parse_scenario(const json &j, ScenarioSpec &sc) {
    const std::string p = "scenario";
    reject_unknown(j, p,
                   {"M", "K", "num_rx", "profile", "beam_center", "spread", "pathloss_db",
                    "noise_dbm", "seed"});
    maybe(j, "M", p, sc.num_bs_antennas, get_count);
    maybe(j, "K", p, sc.num_users, get_count);
    if (j.contains("num_rx"))
        sc.num_rx = get_list<std::size_t>(j["num_rx"], p + ".num_rx", get_count);
    if (j.contains("profile"))
        sc.profile = get_enum<Profile>(j["profile"], p + ".profile", parse_profile);
    if (j.contains("beam_center"))
        sc.beam_center = get_list<double>(j["beam_center"], p + ".beam_center", get_real);
    if (j.contains("spread"))
        sc.spread = get_list<double>(j["spread"], p + ".spread", get_real);
    if (j.contains("pathloss_db"))
        sc.pathloss_db = get_list<double>(j["pathloss_db"], p + ".pathloss_db", get_real);
    maybe(j, "noise_dbm", p, sc.noise_dbm, get_real);
    if (j.contains("seed"))
        sc.seed = get_count(j["seed"], p + ".seed");
}

void parse_solver(const json &j, SolverConfig &s) {
    const std::string p = "solver";
    reject_unknown(j, p,
                   {"eps_mm", "eps_dinkelbach", "eps_de", "eps_newton", "eps_sweep", "eps_eta",
                    "eps_power", "eps_pg", "eps_ascent", "max_iter_mm", "max_iter_dinkelbach",
                    "max_iter_de", "max_iter_newton", "max_iter_sweep", "max_iter_bisection",
                    "max_iter_pg", "max_iter_ascent", "de_damping", "de_newton", "de_refresh",
                    "normalize", "mc_samples", "seed"});
    maybe(j, "eps_mm", p, s.eps_mm, get_real);
    maybe(j, "eps_dinkelbach", p, s.eps_dinkelbach, get_real);
    maybe(j, "eps_de", p, s.eps_de, get_real);
    maybe(j, "eps_newton", p, s.eps_newton, get_real);
    maybe(j, "eps_sweep", p, s.eps_sweep, get_real);
    maybe(j, "eps_eta", p, s.eps_eta, get_real);
    maybe(j, "eps_power", p, s.eps_power, get_real);
    maybe(j, "eps_pg", p, s.eps_pg, get_real);
    maybe(j, "eps_ascent", p, s.eps_ascent, get_real);
    maybe(j, "max_iter_mm", p, s.max_iter_mm, get_count);
    maybe(j, "max_iter_dinkelbach", p, s.max_iter_dinkelbach, get_count);
    maybe(j, "max_iter_de", p, s.max_iter_de, get_count);
    maybe(j, "max_iter_newton", p, s.max_iter_newton, get_count);
    maybe(j, "max_iter_sweep", p, s.max_iter_sweep, get_count);
    maybe(j, "max_iter_bisection", p, s.max_iter_bisection, get_count);
    maybe(j, "max_iter_pg", p, s.max_iter_pg, get_count);
    maybe(j, "max_iter_ascent", p, s.max_iter_ascent, get_count);
    maybe(j, "de_damping", p, s.de_damping, get_real);
    maybe(j, "de_newton", p, s.de_newton, get_bool);
    if (j.contains("de_refresh"))
        s.de_refresh = get_enum<DeRefresh>(j["de_refresh"], p + ".de_refresh", parse_refresh);
    maybe(j, "normalize", p, s.normalize, get_bool);
    maybe(j, "mc_samples", p, s.mc_samples, get_count);
    if (j.contains("seed"))
        s.seed = get_count(j["seed"], p + ".seed");
}

void parse_sweep(const json &j, SweepGrid &g) {
    const std::string p = "sweep";
    reject_unknown(j, p, {"M", "pc_dbm", "pmax_dbm", "objectives"});
    if (j.contains("M"))
        g.num_bs_antennas = get_list<std::size_t>(j["M"], p + ".M", get_count);
    if (j.contains("pc_dbm"))
        g.pc_dbm = get_list<double>(j["pc_dbm"], p + ".pc_dbm", get_real);
    if (j.contains("pmax_dbm"))
        g.pmax_dbm = get_list<double>(j["pmax_dbm"], p + ".pmax_dbm", get_real);
    if (j.contains("objectives"))
        g.objectives = get_list<Objective>(j["objectives"], p + ".objectives",
                                           [](const json &v, const std::string &path) {
                                               return get_enum<Objective>(v, path, parse_objective);
                                           });
}

std::string read_text(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InvalidInput("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class CsvFile {
public:
    CsvFile(const fs::path &path, const std::vector<std::string> &header) : out_(path, std::ios::binary) {
        if (!out_)
            throw InvalidInput("cannot write " + path.string());
        row(header);
    }
    void row(const std::vector<std::string> &cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

std::string fmt_count(std::size_t v) { return std::to_string(v); }

fs::path prepare_out(const RunConfig &cfg) {
    fs::path out(cfg.out);
    fs::create_directories(out);
    return out;
}

double bits(double nats) { return nats / std::log(2.0); }

std::string wall_time(const RunConfig &cfg, double seconds) {
    return cfg.timing ? fmt_real(seconds) : std::string();
}

struct SolveOutcome {
    SolveResult result;
    double mean_ee = 0.0;
    double wall_time = 0.0;
};

// Best of the restart family and, when given, one more MM run from `warm`.
SolveOutcome solve_point(const ChannelStats &stats, const PowerModel &pm, Objective objective,
                         const RunConfig &cfg, const std::optional<PowerAllocation> &warm = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    auto summary = solve_restarts(stats, pm, objective, cfg.algorithm, cfg.restarts, cfg.solver);
    SolveOutcome out;
    out.result = std::move(summary.best);
    out.mean_ee = summary.mean_ee;
    if (warm) {
        auto r = solve(stats, pm, warm, objective, cfg.algorithm, cfg.solver);
        const bool better = objective == Objective::ee ? r.ee > out.result.ee
                                                       : r.sum_rate > out.result.sum_rate;
        if (better)
            out.result = std::move(r);
    }
    out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

std::string last_branch(const SolveResult &r) {
    const auto &recs = r.trace.records;
    return recs.size() > 1 ? to_string(recs.back().branch) : to_string(Branch::none);
}

int report(const std::exception &e) {
    std::cerr << "eemimo: " << e.what() << '\n';
    return dynamic_cast<const NoConvergence *>(&e) || dynamic_cast<const MmAborted *>(&e)
               ? exit_no_convergence
               : exit_error;
}

} // namespace

std::string fmt_real(double v) { return fmt::format("{:.17g}", v); }

RunConfig parse_config(const std::string &json_text, RunConfig base) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error &e) {
        const auto upto = std::min<std::size_t>(e.byte, json_text.size());
        const auto line =
            1 + static_cast<std::size_t>(std::count(json_text.begin(),
                                                    json_text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
        throw ParseError(e.what(), line);
    }
    reject_unknown(doc, "",
                   {"scenario", "stats_file", "power", "objective", "algorithm", "restarts",
                    "solver", "sweep", "validate", "out", "jobs"});
    RunConfig cfg = std::move(base);
    if (doc.contains("stats_file")) {
        cfg.stats_file = get_string(doc["stats_file"], "stats_file");
        if (!doc.contains("scenario"))
            cfg.scenario.reset();
    }
    if (doc.contains("scenario")) {
        if (!cfg.scenario)
            cfg.scenario = ScenarioSpec{};
        parse_scenario(doc["scenario"], *cfg.scenario);
    }
    if (doc.contains("power")) {
        const auto &j = doc["power"];
        reject_unknown(j, "power", {"xi", "pc_dbm", "ps_dbm", "pmax_dbm"});
        maybe(j, "xi", "power", cfg.xi, get_real);
        maybe(j, "pc_dbm", "power", cfg.pc_dbm, get_real);
        maybe(j, "ps_dbm", "power", cfg.ps_dbm, get_real);
        maybe(j, "pmax_dbm", "power", cfg.pmax_dbm, get_real);
    }
    if (doc.contains("objective"))
        cfg.objective = get_enum<Objective>(doc["objective"], "objective", parse_objective);
    if (doc.contains("algorithm"))
        cfg.algorithm = get_enum<Algorithm>(doc["algorithm"], "algorithm", parse_algorithm);
    maybe(doc, "restarts", "", cfg.restarts, get_count);
    if (doc.contains("solver"))
        parse_solver(doc["solver"], cfg.solver);
    if (doc.contains("sweep"))
        parse_sweep(doc["sweep"], cfg.sweep);
    if (doc.contains("validate")) {
        const auto &j = doc["validate"];
        reject_unknown(j, "validate", {"prop1_rotations", "prop1_max_beams", "alloc_file"});
        maybe(j, "prop1_rotations", "validate", cfg.prop1_rotations, get_count);
        maybe(j, "prop1_max_beams", "validate", cfg.prop1_max_beams, get_count);
        if (j.contains("alloc_file"))
            cfg.alloc_file = get_string(j["alloc_file"], "validate.alloc_file");
    }
    maybe(doc, "out", "", cfg.out, get_string);
    maybe(doc, "jobs", "", cfg.jobs, get_count);
    return cfg;
}

RunConfig load_config(const std::string &path, RunConfig base) {
    return parse_config(read_text(path), std::move(base));
}

void check(const RunConfig &cfg) {
    if (cfg.scenario.has_value() == cfg.stats_file.has_value())
        throw InvalidInput("exactly one of scenario and stats_file must be given");
    if (cfg.restarts < 1)
        throw InvalidInput("restarts must be >= 1");
    if (auto issue = validate(cfg.solver))
        throw InvalidInput(issue->message);
    const auto sorted = [](const auto &v) { return std::is_sorted(v.begin(), v.end()); };
    if (!sorted(cfg.sweep.num_bs_antennas) || !sorted(cfg.sweep.pc_dbm) ||
        !sorted(cfg.sweep.pmax_dbm))
        throw InvalidInput("sweep grids must be sorted ascending");
    if (cfg.sweep.objectives.empty())
        throw InvalidInput("sweep needs at least one objective");
    if (!cfg.sweep.num_bs_antennas.empty() && !cfg.scenario)
        throw InvalidInput("an M sweep needs a generated scenario, not a stats file");
    if (std::isnan(cfg.pmax_dbm) || std::isnan(cfg.pc_dbm) || std::isnan(cfg.ps_dbm))
        throw InvalidInput("power levels must not be NaN");
}

ChannelStats channel_stats(const RunConfig &cfg) {
    return cfg.stats_file ? load_stats(*cfg.stats_file) : generate(*cfg.scenario);
}

PowerModel power_model(const RunConfig &cfg) {
    return {cfg.xi, dbm_to_watts(cfg.pc_dbm), dbm_to_watts(cfg.ps_dbm), dbm_to_watts(cfg.pmax_dbm)};
}

int run_solve(const RunConfig &cfg) {
    check(cfg);
    const auto stats = channel_stats(cfg);
    const auto pm = power_model(cfg);
    const auto out = prepare_out(cfg);
    const auto r = solve_point(stats, pm, cfg.objective, cfg);
    save_allocation(r.result.allocation, (out / "allocation.json").string());
    CsvFile csv(out / "summary.csv",
                {"objective", "algorithm", "restarts", "pmax_dbm", "pmax_w", "ee_nats_per_j",
                 "ee_bits_per_j", "sum_rate_nats", "total_power_w", "branch", "mm_iterations",
                 "converged", "wall_time_s"});
    csv.row({to_string(cfg.objective), to_string(cfg.algorithm), fmt_count(cfg.restarts),
             fmt_real(cfg.pmax_dbm), fmt_real(pm.p_max), fmt_real(r.result.ee),
             fmt_real(bits(r.result.ee)), fmt_real(r.result.sum_rate),
             fmt_real(r.result.total_power), last_branch(r.result),
             fmt_count(r.result.trace.records.size() - 1),
             r.result.trace.converged ? "1" : "0", wall_time(cfg, r.wall_time)});
    return exit_ok;
}

int run_sweep(const RunConfig &cfg) {
    check(cfg);
    struct Point {
        std::size_t M;
        double pc_dbm;
        double pmax_dbm;
        Objective objective;
        std::optional<SolveOutcome> outcome;
        std::string error;
    };
    const auto Ms = cfg.sweep.num_bs_antennas.empty()
                        ? std::vector<std::size_t>{0}
                        : cfg.sweep.num_bs_antennas;
    const auto pcs = cfg.sweep.pc_dbm.empty() ? std::vector<double>{cfg.pc_dbm} : cfg.sweep.pc_dbm;
    const auto pmaxs =
        cfg.sweep.pmax_dbm.empty() ? std::vector<double>{cfg.pmax_dbm} : cfg.sweep.pmax_dbm;
    std::vector<Point> points;
    for (auto M : Ms)
        for (double pc : pcs)
            for (double pmax : pmaxs)
                for (auto obj : cfg.sweep.objectives)
                    points.push_back({M, pc, pmax, obj, std::nullopt, {}});

    // Stats per M value, generated once.
    std::vector<ChannelStats> stats_by_m;
    for (auto M : Ms) {
        if (M == 0) {
            stats_by_m.push_back(channel_stats(cfg));
        } else {
            auto sc = *cfg.scenario;
            sc.num_bs_antennas = M;
            stats_by_m.push_back(generate(sc));
        }
    }
    const auto out = prepare_out(cfg);

    // Budgets run in ascending order within each (M, p_c, objective) chain; a
    // chain's previous solution stays feasible at the next budget and seeds
    // one extra start, so the curve cannot drop because of a poor start.
    const std::size_t chain_len = pmaxs.size();
    const std::size_t n_obj = cfg.sweep.objectives.size();
    const std::size_t chains = points.size() / chain_len;
    auto point_index = [&](std::size_t chain, std::size_t j) {
        const std::size_t outer = chain / n_obj; // (M, pc) pair
        const std::size_t obj = chain % n_obj;
        return (outer * chain_len + j) * n_obj + obj;
    };
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t c = next++; c < chains; c = next++) {
            std::optional<PowerAllocation> warm;
            for (std::size_t j = 0; j < chain_len; ++j) {
                auto &p = points[point_index(c, j)];
                const auto mi = static_cast<std::size_t>(
                    std::find(Ms.begin(), Ms.end(), p.M) - Ms.begin());
                RunConfig local = cfg;
                local.pc_dbm = p.pc_dbm;
                local.pmax_dbm = p.pmax_dbm;
                try {
                    p.outcome =
                        solve_point(stats_by_m[mi], power_model(local), p.objective, cfg, warm);
                    warm = p.outcome->result.allocation;
                } catch (const Error &e) {
                    p.error = e.what();
                }
            }
        }
    };
    std::size_t jobs = cfg.jobs ? cfg.jobs : std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min(jobs, chains);
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < jobs; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto &t : pool)
        t.join();

    CsvFile csv(out / "sweep.csv",
                {"M", "pc_dbm", "pmax_dbm", "objective", "algorithm", "status", "ee_nats_per_j",
                 "ee_bits_per_j", "mean_ee_nats_per_j", "sum_rate_nats", "total_power_w",
                 "branch", "mm_iterations", "wall_time_s"});
    int code = exit_ok;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto &p = points[i];
        const auto M = stats_by_m[i / (pcs.size() * pmaxs.size() * cfg.sweep.objectives.size())]
                           .num_bs_antennas;
        std::vector<std::string> row{fmt_count(M), fmt_real(p.pc_dbm), fmt_real(p.pmax_dbm),
                                     to_string(p.objective), to_string(cfg.algorithm)};
        if (p.outcome) {
            const auto &r = p.outcome->result;
            row.insert(row.end(),
                       {"ok", fmt_real(r.ee), fmt_real(bits(r.ee)), fmt_real(p.outcome->mean_ee),
                        fmt_real(r.sum_rate), fmt_real(r.total_power), last_branch(r),
                        fmt_count(r.trace.records.size() - 1),
                        wall_time(cfg, p.outcome->wall_time)});
        } else {
            std::cerr << "eemimo: sweep point " << i << ": " << p.error << '\n';
            row.insert(row.end(), {"failed", "", "", "", "", "", "", "", ""});
            code = exit_no_convergence;
        }
        csv.row(row);
    }
    return code;
}

int run_validate(const RunConfig &cfg) {
    check(cfg);
    const auto stats = channel_stats(cfg);
    const auto pm = power_model(cfg);
    const auto out = prepare_out(cfg);
    const auto alloc = cfg.alloc_file ? load_allocation(*cfg.alloc_file)
                                      : solve_point(stats, pm, cfg.objective, cfg).result.allocation;
    require_valid(stats, alloc);

    const auto de = de_net_rates(stats, alloc, cfg.solver);
    CsvFile csv(out / "validate.csv",
                {"user", "num_rx", "de_rate_nats", "mc_rate_nats", "mc_std_error", "rel_gap"});
    for (std::size_t k = 0; k < stats.users.size(); ++k) {
        const auto mc = mc_net_rate(stats, alloc, k, cfg.solver);
        const double gap = mc.mean == de[k] ? 0.0 : std::abs(de[k] - mc.mean) / std::abs(mc.mean);
        csv.row({fmt_count(k), fmt_count(stats.users[k].num_rx), fmt_real(de[k]),
                 fmt_real(mc.mean), fmt_real(mc.std_error), fmt_real(gap)});
    }

    if (cfg.prop1_rotations > 0 && stats.num_bs_antennas <= cfg.prop1_max_beams) {
        const auto rep = prop1_validate(stats, pm, alloc, cfg.prop1_rotations, cfg.solver.seed,
                                        cfg.solver);
        CsvFile p1(out / "prop1.csv",
                   {"rotation", "beam_ee_nats_per_j", "rotated_ee_nats_per_j", "difference",
                    "std_error", "z"});
        for (std::size_t r = 0; r < rep.differences.size(); ++r) {
            const double d = rep.differences[r];
            const double se = rep.std_errors[r];
            p1.row({fmt_count(r), fmt_real(rep.beam_ee), fmt_real(rep.beam_ee + d), fmt_real(d),
                    fmt_real(se), fmt_real(se > 0.0 ? d / se : 0.0)});
        }
    }
    return exit_ok;
}

int run_trace(const RunConfig &cfg) {
    check(cfg);
    const auto stats = channel_stats(cfg);
    const auto pm = power_model(cfg);
    const auto out = prepare_out(cfg);
    SolveTrace trace;
    int code = exit_ok;
    try {
        trace = solve(stats, pm, std::nullopt, cfg.objective, cfg.algorithm, cfg.solver).trace;
    } catch (const MmAborted &e) {
        std::cerr << "eemimo: " << e.what() << '\n';
        trace = e.trace();
        code = exit_no_convergence;
    }
    CsvFile csv(out / "trace.csv",
                {"iteration", "ee_nats_per_j", "ee_bits_per_j", "sum_rate_nats", "total_power_w",
                 "branch", "inner_iterations", "p_opt_w", "wall_time_s"});
    CsvFile dk(out / "dinkelbach.csv", {"mm_iteration", "step", "eta_nats_per_j"});
    for (const auto &r : trace.records) {
        csv.row({fmt_count(r.iteration), fmt_real(r.ee), fmt_real(bits(r.ee)),
                 fmt_real(r.sum_rate), fmt_real(r.total_power), to_string(r.branch),
                 fmt_count(r.inner_iterations), fmt_real(r.p_opt), wall_time(cfg, r.wall_time)});
        for (std::size_t i = 0; i < r.eta_trace.size(); ++i)
            dk.row({fmt_count(r.iteration), fmt_count(i), fmt_real(r.eta_trace[i])});
    }
    return code;
}

int main(int argc, char **argv) {
    CLI::App app{"Energy-efficient beam-domain power allocation from statistical CSI"};
    app.require_subcommand(1);
    std::string config_path;
    std::optional<double> pmax_dbm;
    std::optional<std::string> objective;
    std::optional<std::string> algorithm;
    std::optional<std::string> de_refresh;
    std::optional<std::string> out;
    std::optional<std::string> alloc;
    std::optional<std::string> stats;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> restarts;
    std::optional<std::size_t> mc_samples;
    std::optional<std::size_t> jobs;
    bool timing = false;

    auto add_common = [&](CLI::App *sub) {
        sub->add_option("--config", config_path, "JSON run configuration");
        sub->add_option("--pmax-dbm", pmax_dbm, "power budget in dBm (-inf for zero)");
        sub->add_option("--objective", objective, "ee or sumrate");
        sub->add_option("--algorithm", algorithm, "lowcomplexity or reference");
        sub->add_option("--seed", seed, "seed for the scenario, restarts and Monte-Carlo draws");
        sub->add_option("--restarts", restarts, "number of starting points");
        sub->add_option("--out", out, "output directory");
        sub->add_option("--mc-samples", mc_samples, "Monte-Carlo samples per user");
        sub->add_option("--de-refresh", de_refresh, "mm or dinkelbach");
        sub->add_option("--stats", stats, "channel statistics JSON (replaces the scenario)");
        sub->add_option("--alloc", alloc, "validate: allocation JSON to check");
        sub->add_option("--jobs", jobs, "sweep worker threads");
        sub->add_flag("--timing", timing, "fill the wall-time columns");
    };
    auto *solve_cmd = app.add_subcommand("solve", "solve one instance");
    auto *sweep_cmd = app.add_subcommand("sweep", "solve over the sweep grid");
    auto *validate_cmd = app.add_subcommand("validate", "DE versus Monte-Carlo rates");
    auto *trace_cmd = app.add_subcommand("trace", "MM and Dinkelbach convergence traces");
    for (auto *s : {solve_cmd, sweep_cmd, validate_cmd, trace_cmd})
        add_common(s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e);
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (stats) {
            cfg.stats_file = *stats;
            cfg.scenario.reset();
        }
        if (pmax_dbm)
            cfg.pmax_dbm = *pmax_dbm;
        if (objective)
            cfg.objective = parse_objective(*objective);
        if (algorithm)
            cfg.algorithm = parse_algorithm(*algorithm);
        if (de_refresh)
            cfg.solver.de_refresh = parse_refresh(*de_refresh);
        if (seed) {
            if (cfg.scenario)
                cfg.scenario->seed = *seed;
            cfg.solver.seed = *seed;
        }
        if (restarts)
            cfg.restarts = *restarts;
        if (mc_samples)
            cfg.solver.mc_samples = *mc_samples;
        if (out)
            cfg.out = *out;
        if (alloc)
            cfg.alloc_file = *alloc;
        if (jobs)
            cfg.jobs = *jobs;
        cfg.timing = timing;

        if (solve_cmd->parsed())
            return run_solve(cfg);
        if (sweep_cmd->parsed())
            return run_sweep(cfg);
        if (validate_cmd->parsed())
            return run_validate(cfg);
        return run_trace(cfg);
    } catch (const std::exception &e) {
        return report(e);
    }
}

} // namespace eemimo::cli
