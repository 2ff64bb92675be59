/**
 * @file experiments.hpp
 * @brief Monte-Carlo harnesses: average rate versus SNR under complete and
 *        incomplete CSIT, and average CSIT allocation size versus the total
 *        antenna budget.
 *
 * Trials are embarrassingly parallel; every trial derives its own sub-seed
 * from (spec seed, trial index), and per-trial results are reduced in a fixed
 * order, so tables are bit-identical regardless of worker count. Policies
 * within a trial always see the same channel (same channel sub-seed).
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "ia/antenna_config.hpp"
#include "ia/precoding.hpp"

namespace ia {

enum class RatePolicy { Complete, Incomplete };
enum class FeedbackPolicy { Complete, Heuristic, Exhaustive };

const char* to_cstring(RatePolicy p);
const char* to_cstring(FeedbackPolicy p);

struct RateSweepSpec {
    AntennaConfig config;
    std::vector<double> snr_grid_db;
    int trials = 200;
    std::vector<RatePolicy> policies = {RatePolicy::Complete, RatePolicy::Incomplete};
    std::uint64_t seed = 1;
    SolverOptions solver;  // tolerance / max iterations for every solve
};

struct FeedbackSweepSpec {
    int users = 3;
    std::vector<int> total_antennas_grid;
    int trials = 1000;
    std::vector<FeedbackPolicy> policies = {FeedbackPolicy::Complete, FeedbackPolicy::Heuristic,
                                            FeedbackPolicy::Exhaustive};
    std::uint64_t seed = 1;
};

struct ResultRow {
    double x = 0;  // SNR in dB, or total antenna count
    std::string policy;
    double mean = 0;
    double stderr_ = 0;  // sample std / sqrt(n)
    long n = 0;
};

/// A trial whose solver did not reach tolerance; excluded from the averages
/// of all policies (pairing) but never dropped silently.
struct FailureRecord {
    std::string policy;
    int trial = 0;
    std::uint64_t channel_seed = 0;
    double leakage = 0;
};

struct ResultTable {
    std::vector<ResultRow> rows;
    std::vector<FailureRecord> failures;
    nlohmann::json metadata;

    void write_csv(std::ostream& out) const;
    nlohmann::json to_json() const;
};

/// Uniformly distributes `total - 2K` surplus antennas over the 2K nodes
/// (every node starts at one antenna) and redraws whole configurations until
/// a feasible one appears. Deterministic in the seed. Totals below K(K+1)
/// cannot be feasible and raise an error instead of looping.
AntennaConfig random_feasible_config(int users, int total_antennas, std::uint64_t seed);

/// Fig-1-style protocol: per trial draw one channel, precode under every
/// requested policy (COMPLETE: full-CSIT min-leakage; INCOMPLETE: allocation
/// plus distributed precoding), filter, and record the user-average rate at
/// every SNR point. `workers` caps the OpenMP team (0 = library default).
ResultTable rate_vs_snr(const RateSweepSpec& spec, int workers = 0);

/// Fig-2-style protocol: per total and trial, draw a random feasible
/// configuration and record the CSIT allocation size under every policy.
ResultTable feedback_size_sweep(const FeedbackSweepSpec& spec, int workers = 0);

/// Plain-text `key = value` spec files ('#' comments). Lists are
/// comma-separated; integer ranges may be written `a..b` and stepped ranges
/// `a..b:step`.
RateSweepSpec parse_rate_spec(std::istream& in);
FeedbackSweepSpec parse_feedback_spec(std::istream& in);

}  // namespace ia
