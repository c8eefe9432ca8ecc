#include "eemimo/mc.hpp"

#include "eemimo/errors.hpp"
#include "eemimo/ops.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace eemimo {

namespace {

constexpr std::uint64_t rotation_stream = 0x9e3779b97f4a7c15ULL;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

McEstimate summarize(const std::vector<double> &xs) {
    McEstimate est;
    est.samples = xs.size();
    if (xs.empty())
        return est;
    double mean = 0.0;
    for (double x : xs)
        mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs)
        ss += (x - mean) * (x - mean);
    est.mean = mean;
    if (xs.size() > 1)
        est.std_error = std::sqrt(ss / static_cast<double>(xs.size() - 1) /
                                  static_cast<double>(xs.size()));
    return est;
}

// log det of a Hermitian positive definite matrix.
double logdet_hpd(const Eigen::MatrixXcd &h) {
    Eigen::LLT<Eigen::MatrixXcd> llt(h);
    if (llt.info() != Eigen::Success)
        throw NumericalFailure("Cholesky failed on a sampled covariance");
    double r = 0.0;
    const auto &l = llt.matrixL();
    for (Eigen::Index i = 0; i < h.rows(); ++i)
        r += std::log(std::real(l(i, i)));
    return 2.0 * r;
}

Eigen::MatrixXcd whitened_channel(const UserStats &user, std::span<const double> kbar,
                                  std::mt19937_64 &rng) {
    Eigen::MatrixXcd g = sample_beam_channel(user, rng);
    for (std::size_t n = 0; n < user.num_rx; ++n)
        g.row(static_cast<Eigen::Index>(n)) /= std::sqrt(kbar[n]);
    return g;
}

std::vector<double> net_rate_samples(const ChannelStats &stats, const PowerAllocation &alloc,
                                     std::size_t k, const SolverConfig &cfg) {
    const auto &user = stats.users[k];
    const auto kb = kbar(stats, alloc, k);
    const auto &l = alloc.lambdas[k];
    const auto N = static_cast<Eigen::Index>(user.num_rx);
    std::vector<double> out(cfg.mc_samples, 0.0);
    if (std::all_of(l.begin(), l.end(), [](double v) { return v == 0.0; }))
        return out;
    for (std::size_t s = 0; s < cfg.mc_samples; ++s) {
        std::mt19937_64 rng(stream_seed(cfg.seed, k, s));
        Eigen::MatrixXcd b = whitened_channel(user, kb, rng);
        for (std::size_t m = 0; m < l.size(); ++m)
            b.col(static_cast<Eigen::Index>(m)) *= std::sqrt(l[m]);
        Eigen::MatrixXcd h = Eigen::MatrixXcd::Identity(N, N);
        h.noalias() += b * b.adjoint();
        out[s] = logdet_hpd(h);
    }
    return out;
}

} // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b);
}

Eigen::MatrixXcd sample_beam_channel(const UserStats &user, std::mt19937_64 &rng) {
    const auto M = user.num_beams();
    Eigen::MatrixXcd g(static_cast<Eigen::Index>(user.num_rx), static_cast<Eigen::Index>(M));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t n = 0; n < user.num_rx; ++n)
        for (std::size_t m = 0; m < M; ++m) {
            const double scale = std::sqrt(user.omega[n * M + m] / 2.0);
            const double re = normal(rng);
            const double im = normal(rng);
            g(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m)) = {scale * re,
                                                                            scale * im};
        }
    return g;
}

McEstimate mc_net_rate(const ChannelStats &stats, const PowerAllocation &alloc, std::size_t k,
                       const SolverConfig &cfg) {
    require_valid(stats, alloc);
    if (k >= stats.users.size())
        throw InvalidInput("mc_net_rate: user index out of range");
    if (cfg.mc_samples == 0)
        throw InvalidInput("mc_samples must be >= 1");
    return summarize(net_rate_samples(stats, alloc, k, cfg));
}

McEstimate mc_rate_plus(const ChannelStats &stats, const PowerAllocation &alloc, std::size_t k,
                        const SolverConfig &cfg) {
    auto est = mc_net_rate(stats, alloc, k, cfg);
    est.mean += rate_minus(stats, alloc, k);
    return est;
}

McEstimate mc_ee(const ChannelStats &stats, const PowerModel &pm, const PowerAllocation &alloc,
                 const SolverConfig &cfg) {
    const double denom = pm.consumed(alloc.total_power(), stats.num_bs_antennas);
    McEstimate out;
    double var = 0.0;
    for (std::size_t k = 0; k < stats.users.size(); ++k) {
        const auto r = mc_net_rate(stats, alloc, k, cfg);
        out.mean += r.mean;
        var += r.std_error * r.std_error;
        out.samples = r.samples;
    }
    out.mean /= denom;
    out.std_error = std::sqrt(var) / denom;
    return out;
}

Eigen::MatrixXcd random_unitary(std::size_t dim, std::mt19937_64 &rng) {
    const auto d = static_cast<Eigen::Index>(dim);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXcd z(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) {
            const double re = normal(rng);
            const double im = normal(rng);
            z(i, j) = {re, im};
        }
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
    Eigen::MatrixXcd q = qr.householderQ();
    const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < d; ++i) {
        const auto rii = r(i, i);
        if (std::abs(rii) > 0.0)
            q.col(i) *= rii / std::abs(rii);
    }
    return q;
}

std::vector<double> rotated_ee_samples(const ChannelStats &stats, const PowerModel &pm,
                                       const PowerAllocation &alloc, const Eigen::MatrixXcd &psi,
                                       const SolverConfig &cfg) {
    require_valid(stats, alloc);
    const auto K = stats.users.size();
    const auto M = static_cast<Eigen::Index>(stats.num_bs_antennas);
    if (psi.rows() != M || psi.cols() != M)
        throw DimensionMismatch("rotation must be M x M");

    std::vector<Eigen::MatrixXcd> q(K);
    PowerAllocation diag_q = PowerAllocation::zeros(K, stats.num_bs_antennas);
    for (std::size_t k = 0; k < K; ++k) {
        Eigen::VectorXd l(M);
        for (Eigen::Index m = 0; m < M; ++m)
            l(m) = alloc.lambdas[k][static_cast<std::size_t>(m)];
        q[k] = psi * l.cast<std::complex<double>>().asDiagonal() * psi.adjoint();
        for (Eigen::Index m = 0; m < M; ++m)
            diag_q.lambdas[k][static_cast<std::size_t>(m)] = std::max(0.0, std::real(q[k](m, m)));
    }

    const double denom = pm.consumed(alloc.total_power(), stats.num_bs_antennas);
    std::vector<double> ee(cfg.mc_samples, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        const auto &user = stats.users[k];
        const auto kb = kbar(stats, diag_q, k);
        const auto N = static_cast<Eigen::Index>(user.num_rx);
        for (std::size_t s = 0; s < cfg.mc_samples; ++s) {
            std::mt19937_64 rng(stream_seed(cfg.seed, k, s));
            const Eigen::MatrixXcd a = whitened_channel(user, kb, rng);
            Eigen::MatrixXcd h = Eigen::MatrixXcd::Identity(N, N);
            h.noalias() += a * q[k] * a.adjoint();
            ee[s] += logdet_hpd(h) / denom;
        }
    }
    return ee;
}

McEstimate prop1_difference(const ChannelStats &stats, const PowerModel &pm,
                            const PowerAllocation &alloc, const Eigen::MatrixXcd &psi,
                            const SolverConfig &cfg) {
    const auto M = static_cast<Eigen::Index>(stats.num_bs_antennas);
    const auto beam = rotated_ee_samples(stats, pm, alloc, Eigen::MatrixXcd::Identity(M, M), cfg);
    const auto rot = rotated_ee_samples(stats, pm, alloc, psi, cfg);
    std::vector<double> diff(beam.size());
    for (std::size_t s = 0; s < beam.size(); ++s)
        diff[s] = rot[s] - beam[s];
    return summarize(diff);
}

Prop1Report prop1_validate(const ChannelStats &stats, const PowerModel &pm,
                           const PowerAllocation &alloc, std::size_t num_rotations,
                           std::uint64_t seed, const SolverConfig &cfg) {
    if (cfg.mc_samples == 0)
        throw InvalidInput("mc_samples must be >= 1");
    const auto M = static_cast<Eigen::Index>(stats.num_bs_antennas);
    const auto beam = rotated_ee_samples(stats, pm, alloc, Eigen::MatrixXcd::Identity(M, M), cfg);
    Prop1Report rep;
    rep.beam_ee = summarize(beam).mean;
    double sq = 0.0;
    for (std::size_t i = 0; i < num_rotations; ++i) {
        std::mt19937_64 rng(stream_seed(seed, rotation_stream, i));
        const auto psi = random_unitary(stats.num_bs_antennas, rng);
        const auto rot = rotated_ee_samples(stats, pm, alloc, psi, cfg);
        std::vector<double> diff(beam.size());
        for (std::size_t s = 0; s < beam.size(); ++s)
            diff[s] = rot[s] - beam[s];
        const auto d = summarize(diff);
        rep.differences.push_back(d.mean);
        rep.std_errors.push_back(d.std_error);
        sq += d.std_error * d.std_error;
        if (i == 0 || d.mean > rep.max_difference)
            rep.max_difference = d.mean;
        const double z = d.std_error > 0.0 ? d.mean / d.std_error : 0.0;
        if (i == 0 || z > rep.max_z)
            rep.max_z = z;
    }
    if (num_rotations > 0)
        rep.pooled_std_error = std::sqrt(sq / static_cast<double>(num_rotations));
    return rep;
}

} // namespace eemimo
