#pragma once

// Synthetic channel statistics and JSON persistence for ChannelStats and
// PowerAllocation.
//
// Stats file:      {"M": 4, "sigma2": 1.0, "users": [{"N": 2, "omega": [...]}]}
// Allocation file: {"K": 2, "M": 4, "lambdas": [[...], [...]]}
//
// omega is the row-major N x M coupling matrix.

#include "eemimo/model.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace eemimo {

enum class Profile { uniform, exponential_beam, sparse_beam };

std::string to_string(Profile p);
Profile parse_profile(const std::string &name);

/// Per-user vectors may have length K or 1 (broadcast). Empty beam_center
/// and spread are drawn from the seed.
struct ScenarioSpec {
    std::size_t num_bs_antennas = 16;
    std::size_t num_users = 4;
    std::vector<std::size_t> num_rx{4};
    Profile profile = Profile::exponential_beam;
    std::vector<double> beam_center;
    std::vector<double> spread;
    std::vector<double> pathloss_db{-120.0};
    double noise_dbm = -105.0;
    std::uint64_t seed = 1;
};

/// exponential-beam: omega[n, m] = g_n exp(-|m - c - o_n| / s) with per-row
/// gain g_n and offset o_n; sparse-beam additionally zeroes beams with
/// |m - c| > max(1, round(s)); uniform: all ones. Every user is then scaled
/// so its entries sum to N M 10^(pathloss_db / 10).
ChannelStats generate(const ScenarioSpec &spec);

std::string stats_to_json(const ChannelStats &stats);
ChannelStats stats_from_json(const std::string &text);
void save_stats(const ChannelStats &stats, const std::string &path);
ChannelStats load_stats(const std::string &path);

std::string allocation_to_json(const PowerAllocation &alloc);
PowerAllocation allocation_from_json(const std::string &text);
void save_allocation(const PowerAllocation &alloc, const std::string &path);
PowerAllocation load_allocation(const std::string &path);

} // namespace eemimo
