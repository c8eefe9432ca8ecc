#include "eemimo/synth.hpp"

#include "eemimo/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace eemimo {

using nlohmann::json;

namespace {

template <class T>
T per_user(const std::vector<T> &v, std::size_t k, const char *name) {
    if (v.size() == 1)
        return v[0];
    if (k >= v.size())
        throw InvalidSpec(std::string(name) + " must have length 1 or K");
    return v[k];
}

template <class T>
void check_len(const std::vector<T> &v, std::size_t K, bool allow_empty, const char *name) {
    if ((v.empty() && !allow_empty) || (!v.empty() && v.size() != 1 && v.size() != K))
        throw InvalidSpec(std::string(name) + " must have length 1 or K");
}

std::size_t line_of(const std::string &text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(
                   std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

json parse(const std::string &text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        throw ParseError(e.what(), line_of(text, e.byte));
    }
}

const json &field(const json &obj, const char *name, const std::string &path) {
    if (!obj.is_object())
        throw ParseError("expected an object", 0, path);
    const auto it = obj.find(name);
    if (it == obj.end())
        throw ParseError("missing field", 0, path.empty() ? name : path + "." + name);
    return *it;
}

double number(const json &j, const std::string &path) {
    if (!j.is_number())
        throw ParseError("expected a number", 0, path);
    return j.get<double>();
}

std::size_t count(const json &j, const std::string &path) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
        throw ParseError("expected a nonnegative integer", 0, path);
    return j.get<std::size_t>();
}

std::vector<double> numbers(const json &j, const std::string &path) {
    if (!j.is_array())
        throw ParseError("expected an array", 0, path);
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InvalidInput("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InvalidInput("cannot write " + path);
    out << text << '\n';
}

} // namespace

std::string to_string(Profile p) {
    switch (p) {
    case Profile::uniform:
        return "uniform";
    case Profile::exponential_beam:
        return "exponential-beam";
    case Profile::sparse_beam:
        return "sparse-beam";
    }
    return "unknown";
}

Profile parse_profile(const std::string &name) {
    if (name == "uniform")
        return Profile::uniform;
    if (name == "exponential-beam")
        return Profile::exponential_beam;
    if (name == "sparse-beam")
        return Profile::sparse_beam;
    throw InvalidSpec("unknown profile '" + name + "'");
}

ChannelStats generate(const ScenarioSpec &spec) {
    const auto M = spec.num_bs_antennas;
    const auto K = spec.num_users;
    if (M == 0 || K == 0)
        throw InvalidSpec("M and K must be positive");
    check_len(spec.num_rx, K, false, "num_rx");
    check_len(spec.pathloss_db, K, false, "pathloss_db");
    check_len(spec.beam_center, K, true, "beam_center");
    check_len(spec.spread, K, true, "spread");
    if (!std::isfinite(spec.noise_dbm))
        throw InvalidSpec("noise_dbm must be finite");

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ChannelStats stats;
    stats.num_bs_antennas = M;
    stats.noise_power = dbm_to_watts(spec.noise_dbm);
    const double max_spread = std::max(1.0, static_cast<double>(M) / 8.0);
    for (std::size_t k = 0; k < K; ++k) {
        const auto N = per_user(spec.num_rx, k, "num_rx");
        const double pl = per_user(spec.pathloss_db, k, "pathloss_db");
        if (N == 0)
            throw InvalidSpec("num_rx must be positive");
        if (!std::isfinite(pl))
            throw InvalidSpec("pathloss_db must be finite");
        // Draw the geometry even when it is overridden so the remaining users
        // do not depend on which fields were given.
        const double c_draw = unit(rng) * static_cast<double>(M - 1);
        const double s_draw = 0.5 + unit(rng) * max_spread;
        const double c = spec.beam_center.empty() ? c_draw : per_user(spec.beam_center, k, "beam_center");
        const double s = spec.spread.empty() ? s_draw : per_user(spec.spread, k, "spread");
        if (!(s > 0.0) || !std::isfinite(c))
            throw InvalidSpec("spread must be > 0 and beam_center finite");

        UserStats user;
        user.num_rx = N;
        user.omega.assign(N * M, 1.0);
        if (spec.profile != Profile::uniform) {
            const auto window = std::max(1.0, std::round(s));
            for (std::size_t n = 0; n < N; ++n) {
                const double gain = 0.5 + unit(rng);
                const double offset = unit(rng) - 0.5;
                for (std::size_t m = 0; m < M; ++m) {
                    const double dist = std::abs(static_cast<double>(m) - c);
                    double v = gain * std::exp(-std::abs(static_cast<double>(m) - c - offset) / s);
                    if (spec.profile == Profile::sparse_beam && dist > window)
                        v = 0.0;
                    user.omega[n * M + m] = v;
                }
            }
        }
        double total = 0.0;
        for (double v : user.omega)
            total += v;
        if (!(total > 0.0))
            throw InvalidSpec("profile produced an all-zero coupling matrix");
        const double scale = static_cast<double>(N * M) * std::pow(10.0, pl / 10.0) / total;
        for (auto &v : user.omega)
            v *= scale;
        stats.users.push_back(std::move(user));
    }
    return stats;
}

std::string stats_to_json(const ChannelStats &stats) {
    json users = json::array();
    for (const auto &u : stats.users)
        users.push_back({{"N", u.num_rx}, {"omega", u.omega}});
    const json doc = {{"M", stats.num_bs_antennas}, {"sigma2", stats.noise_power}, {"users", users}};
    return doc.dump(2);
}

ChannelStats stats_from_json(const std::string &text) {
    const json doc = parse(text);
    ChannelStats stats;
    stats.num_bs_antennas = count(field(doc, "M", ""), "M");
    stats.noise_power = number(field(doc, "sigma2", ""), "sigma2");
    const auto &users = field(doc, "users", "");
    if (!users.is_array())
        throw ParseError("expected an array", 0, "users");
    for (std::size_t k = 0; k < users.size(); ++k) {
        const std::string path = "users[" + std::to_string(k) + "]";
        UserStats u;
        u.num_rx = count(field(users[k], "N", path), path + ".N");
        u.omega = numbers(field(users[k], "omega", path), path + ".omega");
        if (u.omega.size() != u.num_rx * stats.num_bs_antennas)
            throw ParseError("omega has " + std::to_string(u.omega.size()) +
                                 " entries, expected N * M = " +
                                 std::to_string(u.num_rx * stats.num_bs_antennas),
                             0, path + ".omega");
        stats.users.push_back(std::move(u));
    }
    return stats;
}

void save_stats(const ChannelStats &stats, const std::string &path) {
    write_file(path, stats_to_json(stats));
}

ChannelStats load_stats(const std::string &path) { return stats_from_json(read_file(path)); }

std::string allocation_to_json(const PowerAllocation &alloc) {
    const json doc = {{"K", alloc.num_users()}, {"M", alloc.num_beams()}, {"lambdas", alloc.lambdas}};
    return doc.dump(2);
}

PowerAllocation allocation_from_json(const std::string &text) {
    const json doc = parse(text);
    const auto K = count(field(doc, "K", ""), "K");
    const auto M = count(field(doc, "M", ""), "M");
    const auto &rows = field(doc, "lambdas", "");
    if (!rows.is_array() || rows.size() != K)
        throw ParseError("expected an array of K = " + std::to_string(K) + " rows", 0, "lambdas");
    PowerAllocation alloc;
    for (std::size_t k = 0; k < K; ++k) {
        const std::string path = "lambdas[" + std::to_string(k) + "]";
        auto row = numbers(rows[k], path);
        if (row.size() != M)
            throw ParseError("row has " + std::to_string(row.size()) + " entries, expected M = " +
                                 std::to_string(M),
                             0, path);
        alloc.lambdas.push_back(std::move(row));
    }
    return alloc;
}

void save_allocation(const PowerAllocation &alloc, const std::string &path) {
    write_file(path, allocation_to_json(alloc));
}

PowerAllocation load_allocation(const std::string &path) {
    return allocation_from_json(read_file(path));
}

} // namespace eemimo
