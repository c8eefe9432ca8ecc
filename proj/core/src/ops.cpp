#include "eemimo/ops.hpp"

#include "eemimo/errors.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace eemimo {

namespace {

void check_alloc(const ChannelStats &stats, const PowerAllocation &alloc) {
    if (alloc.lambdas.size() != stats.users.size())
        throw DimensionMismatch("allocation has " + std::to_string(alloc.lambdas.size()) +
                                " users, stats have " + std::to_string(stats.users.size()));
    for (const auto &l : alloc.lambdas)
        if (l.size() != stats.num_bs_antennas)
            throw DimensionMismatch("allocation vector length " + std::to_string(l.size()) +
                                    " differs from M = " + std::to_string(stats.num_bs_antennas));
}

// pi_op(omega_k, sum_{i != k} lambda_i) without forming the difference vector,
// which would cancel badly when lambda_k dominates the total.
DiagVec interference(const ChannelStats &stats, const PowerAllocation &alloc, std::size_t k) {
    const auto &user = stats.users[k];
    const auto M = stats.num_bs_antennas;
    DiagVec out(user.num_rx, 0.0);
    for (std::size_t i = 0; i < alloc.lambdas.size(); ++i) {
        if (i == k)
            continue;
        const auto &l = alloc.lambdas[i];
        for (std::size_t n = 0; n < user.num_rx; ++n) {
            const double *row = user.omega.data() + n * M;
            double acc = 0.0;
            for (std::size_t m = 0; m < M; ++m)
                acc += row[m] * l[m];
            out[n] += acc;
        }
    }
    return out;
}

} // namespace

DiagVec pi_op(const UserStats &user, std::span<const double> x) {
    const auto M = user.num_beams();
    if (x.size() != M || user.omega.size() != user.num_rx * M)
        throw DimensionMismatch("pi_op: expected input of length " + std::to_string(M) + ", got " +
                                std::to_string(x.size()));
    DiagVec out(user.num_rx, 0.0);
    for (std::size_t n = 0; n < user.num_rx; ++n) {
        const double *row = user.omega.data() + n * M;
        double acc = 0.0;
        for (std::size_t m = 0; m < M; ++m)
            acc += row[m] * x[m];
        out[n] = acc;
    }
    return out;
}

DiagVec xi_op(const UserStats &user, std::span<const double> y) {
    const auto M = user.num_beams();
    if (y.size() != user.num_rx || user.omega.size() != user.num_rx * M)
        throw DimensionMismatch("xi_op: expected input of length " + std::to_string(user.num_rx) +
                                ", got " + std::to_string(y.size()));
    DiagVec out(M, 0.0);
    for (std::size_t n = 0; n < user.num_rx; ++n) {
        const double *row = user.omega.data() + n * M;
        for (std::size_t m = 0; m < M; ++m)
            out[m] += row[m] * y[n];
    }
    return out;
}

DiagVec kbar(const ChannelStats &stats, const PowerAllocation &alloc, std::size_t k) {
    check_alloc(stats, alloc);
    auto out = interference(stats, alloc, k);
    for (auto &v : out)
        v += stats.noise_power;
    return out;
}

std::vector<DiagVec> all_kbar(const ChannelStats &stats, const PowerAllocation &alloc) {
    check_alloc(stats, alloc);
    std::vector<DiagVec> out;
    out.reserve(stats.users.size());
    for (std::size_t k = 0; k < stats.users.size(); ++k) {
        auto v = interference(stats, alloc, k);
        for (auto &e : v)
            e += stats.noise_power;
        out.push_back(std::move(v));
    }
    return out;
}

double rate_minus(const ChannelStats &stats, const PowerAllocation &alloc, std::size_t k) {
    check_alloc(stats, alloc);
    const auto interf = interference(stats, alloc, k);
    const double log_noise = std::log(stats.noise_power);
    double sum = 0.0;
    for (double v : interf)
        sum += log_noise + std::log1p(v / stats.noise_power);
    return sum;
}

DiagVec delta_k(const ChannelStats &stats, const PowerAllocation &alloc, std::size_t k) {
    check_alloc(stats, alloc);
    const auto M = stats.num_bs_antennas;
    DiagVec d(M, 0.0);
    for (std::size_t kp = 0; kp < stats.users.size(); ++kp) {
        if (kp == k)
            continue;
        const auto &user = stats.users[kp];
        const auto kb = kbar(stats, alloc, kp);
        for (std::size_t n = 0; n < user.num_rx; ++n) {
            const double *row = user.omega.data() + n * M;
            const double inv = 1.0 / kb[n];
            for (std::size_t m = 0; m < M; ++m)
                d[m] += row[m] * inv;
        }
    }
    return d;
}

std::vector<DiagVec> all_deltas(const ChannelStats &stats, const PowerAllocation &alloc) {
    check_alloc(stats, alloc);
    const auto M = stats.num_bs_antennas;
    const auto K = stats.users.size();
    const auto kbars = all_kbar(stats, alloc);
    // own[k][m] = sum_n omega_k[n,m] / kbar_k[n]; delta_k sums own over the other users.
    std::vector<DiagVec> own(K, DiagVec(M, 0.0));
    for (std::size_t k = 0; k < K; ++k) {
        const auto &user = stats.users[k];
        for (std::size_t n = 0; n < user.num_rx; ++n) {
            const double *row = user.omega.data() + n * M;
            const double inv = 1.0 / kbars[k][n];
            for (std::size_t m = 0; m < M; ++m)
                own[k][m] += row[m] * inv;
        }
    }
    std::vector<DiagVec> out(K, DiagVec(M, 0.0));
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t m = 0; m < M; ++m) {
            double s = 0.0;
            for (std::size_t kp = 0; kp < K; ++kp)
                if (kp != k)
                    s += own[kp][m];
            out[k][m] = s;
        }
    return out;
}

double ee_value(const PowerModel &pm, std::size_t num_antennas, double transmit_power,
                double sum_rate) {
    return sum_rate / pm.consumed(transmit_power, num_antennas);
}

double ee_value(const ChannelStats &stats, const PowerModel &pm, const PowerAllocation &alloc,
                std::span<const double> rates) {
    const double sum = std::accumulate(rates.begin(), rates.end(), 0.0);
    return ee_value(pm, stats.num_bs_antennas, alloc.total_power(), sum);
}

double inner(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

} // namespace eemimo
