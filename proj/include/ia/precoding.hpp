/**
 * @file precoding.hpp
 * @brief Min-leakage interference alignment and its distributed variant for
 *        incomplete CSIT allocations.
 *
 * The core solver alternately minimizes the total leakage
 *     I_IA = sum_i sum_{k != i} |g_i^H H_ik t_k|^2
 * over a generalized sub-IC: RX filters first (each the smallest-eigenvalue
 * eigenvector of its received interference covariance), then the free TX
 * beamformers; frozen TX beamformers are returned bit-identical to their
 * inputs and the sums run only over present nodes.
 *
 * The distributed precoder gives each TX only its CSIT mask. TXs whose masks
 * are strictly included in TX j's mask are replicated by TX j: their
 * beamformers are recomputed locally and then frozen while TX j aligns its
 * own interference over the restricted channel. All solver initializations
 * derive from (init_seed, sub-IC identity, tx index) so replicas are
 * bit-identical to the originals regardless of which TX computes them.
 */
#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "ia/antenna_config.hpp"
#include "ia/channel.hpp"
#include "ia/csit_allocation.hpp"

namespace ia {

struct SolverOptions {
    double tolerance = 1e-10;
    int max_iterations = 5000;
    std::uint64_t init_seed = 0;
};

struct LeakageTrace {
    /// leakage[0] is the initial leakage; one entry per iteration after that.
    std::vector<double> leakage;
    bool converged = false;
    int iterations_used = 0;

    double final_leakage() const { return leakage.empty() ? 0.0 : leakage.back(); }
};

/// Beamformers over the present nodes of a (possibly generalized) IC, keyed
/// by 1-based user index.
struct BeamformerSet {
    std::map<int, Eigen::VectorXcd> tx;
    std::map<int, Eigen::VectorXcd> rx;
};

/// Channel of a generalized sub-IC, materialized blockwise.
struct SubChannel {
    std::vector<int> rx_ids;  // sorted 1-based
    std::vector<int> tx_ids;
    std::vector<int> rx_dims;  // antennas per present RX
    std::vector<int> tx_dims;  // antennas per present TX
    std::vector<std::vector<Eigen::MatrixXcd>> blocks;  // [rx pos][tx pos]

    static SubChannel restriction(const ChannelMatrix& channel, const SubIC& sub);
    /// Restriction through a CSIT mask: blocks the mask does not cover are
    /// zero, exactly what the owning TX would see.
    static SubChannel masked_restriction(const ChannelMatrix& channel, const CsitMask& owner_mask,
                                         const SubIC& sub);

    std::string key() const { return SubIC{rx_ids, tx_ids}.key(); }
};

/// Total interference power leaked across all present cross links.
double leakage(const SubChannel& channel, const BeamformerSet& beamformers);

/// Leakage over the full IC.
double leakage(const ChannelMatrix& channel, const BeamformerSet& beamformers);

/// Alternating minimization of I_IA over a generalized sub-IC with the given
/// TX beamformers held fixed. Free beamformers are initialized from
/// (opts.init_seed, sub-IC identity, tx index).
std::pair<BeamformerSet, LeakageTrace> min_leakage_solve(
    const SubChannel& channel, const std::map<int, Eigen::VectorXcd>& fixed_tx,
    const SolverOptions& opts);

struct SolveLog {
    SubIC sub_ic;
    LeakageTrace trace;
};

struct PrecodeResult {
    BeamformerSet beamformers;  // full-dimension beamformers and filters, all K users
    bool converged = true;      // every component solve reached tolerance
    double residual_leakage = 0;  // full-channel leakage with the final filters
    std::vector<SolveLog> solves;
};

/// Distributed precoding from an incomplete CSIT allocation. When a removal
/// plan is given, all computations run on the projected reduced channel and
/// the returned beamformers are lifted back to full dimension. RX filters are
/// always recomputed over the full channel once every beamformer exists.
PrecodeResult distributed_precode(const AntennaConfig& config, const CsitAllocation& alloc,
                                  const RemovalPlan* plan, const ChannelMatrix& channel,
                                  const SolverOptions& opts);

/// TX `at_tx`'s local view of the recursion: every beamformer it can compute
/// from its own CSIT mask alone (its own plus the replicas of masks included
/// in its own), in reduced dimensions when a plan is given. Bit-identical to
/// the same beamformers computed at their owning TXs.
std::map<int, Eigen::VectorXcd> replica_beamformers(const AntennaConfig& config,
                                                    const CsitAllocation& alloc,
                                                    const RemovalPlan* plan,
                                                    const ChannelMatrix& channel,
                                                    const SolverOptions& opts, int at_tx);

/// Per-RX filters from the received interference covariance of the given TX
/// beamformers, over the full channel.
std::map<int, Eigen::VectorXcd> rx_filters(const ChannelMatrix& channel,
                                           const std::map<int, Eigen::VectorXcd>& tx);

/// Achievable single-stream rates, residual interference treated as noise:
/// R_i = log2(1 + P |g_i^H H_ii t_i|^2 / (1 + P sum_{j != i} |g_i^H H_ij t_j|^2)).
std::vector<double> user_rates(const ChannelMatrix& channel, const BeamformerSet& beamformers,
                               double power);

}  // namespace ia
