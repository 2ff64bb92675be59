/**
 * @file channel.hpp
 * @brief The random multi-user MIMO channel and its subspace reductions.
 *
 * The stacked channel matrix H is N_Tot x M_Tot with block H_ij (RX i, TX j)
 * of shape N_i x M_j. Entries are i.i.d. CN(0,1), drawn deterministically for
 * a (config, seed) pair: each block uses its own sub-stream derived from
 * (seed, i, j), so a block's values do not depend on the draw order or on
 * other blocks.
 */
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ia/antenna_config.hpp"
#include "ia/csit_allocation.hpp"

namespace ia {

struct ChannelMatrix {
    Eigen::MatrixXcd h;
    AntennaConfig config;
    std::uint64_t seed = 0;

    /// Block H_{rx,tx}, 1-based indices.
    Eigen::MatrixXcd block(int rx, int tx) const;
};

ChannelMatrix draw_channel(const AntennaConfig& config, std::uint64_t seed);

/// Orthonormal columns spanning a subspace of the parent (column) space.
struct SubspaceBasis {
    Eigen::MatrixXcd columns;  // parent_dim x reduced_dim, orthonormal
    int parent_dim = 0;
    int reduced_dim = 0;
};

/// The n right-singular vectors of `a` with the largest singular values:
/// among all orthonormal column sets B of rank n, the returned basis
/// maximizes the captured power |a B|_F^2. Each vector's phase is fixed by
/// making its first non-negligible entry real positive. Requires
/// 1 <= n < cols(a).
SubspaceBasis max_power_subspace(const Eigen::MatrixXcd& a, int n);

/// Channel after "removing" antennas per the plan: every removed precoding or
/// receive dimension is projected out through the max-power subspace of the
/// node's direct channel, so block (i,j) becomes W_i^H H_ij V_j with shapes
/// taken from the reduced configuration.
struct ReducedChannel {
    ChannelMatrix channel;                  // drawn-for reduced_config shapes
    std::vector<Eigen::MatrixXcd> rx_bases;  // per user, N_i x N'_i (identity when untouched)
    std::vector<Eigen::MatrixXcd> tx_bases;  // per user, M_j x M'_j
};

ReducedChannel reduce_channel(const ChannelMatrix& full, const RemovalPlan& plan);

}  // namespace ia
