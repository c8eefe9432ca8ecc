#pragma once

#include "eemimo/model.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace eemimo::testing {

// Random coupling matrices with gains around `scale` (noise power 1).
inline ChannelStats random_stats(std::size_t K, std::size_t M, std::size_t N, std::uint64_t seed,
                                 double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    ChannelStats s;
    s.num_bs_antennas = M;
    s.noise_power = 1.0;
    for (std::size_t k = 0; k < K; ++k) {
        UserStats user;
        user.num_rx = N;
        for (std::size_t i = 0; i < N * M; ++i)
            user.omega.push_back(scale * u(rng));
        s.users.push_back(user);
    }
    return s;
}

inline PowerAllocation random_alloc(std::size_t K, std::size_t M, double total,
                                    std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    auto a = PowerAllocation::zeros(K, M);
    double sum = 0.0;
    for (auto &l : a.lambdas)
        for (auto &x : l)
            sum += (x = u(rng));
    for (auto &l : a.lambdas)
        for (auto &x : l)
            x *= total / sum;
    return a;
}

inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

} // namespace eemimo::testing
