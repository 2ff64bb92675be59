/**
 * @file csit_allocation.hpp
 * @brief Incomplete-CSIT masks and the allocation policies that produce them.
 *
 * A CSIT mask A^(j) tells TX j which channel coefficients it is fed back.
 * Masks are parameterized by a sub-IC (S_RX, S_TX): the mask covers every
 * cross block (x, y) with x in S_RX, y in S_TX, x != y; direct blocks are
 * never fed back. COMPLETE is the full-set mask A_{K,K}.
 *
 * For tightly-feasible configurations, allocate_tight gives each TX the CSI
 * of the smallest tight sub-IC the greedy scan finds around it. For
 * super-feasible configurations the surplus antennas are first "removed"
 * (their precoding dimensions re-purposed through a max-power subspace
 * projection, see channel.hpp) to reach a tightly-feasible reduced
 * configuration; both a polynomial heuristic and an exhaustive search over
 * removal plans are provided. Allocation sizes after a removal are counted in
 * the reduced dimensions, since only the projected effective channel needs to
 * be shared.
 */
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

#include "ia/antenna_config.hpp"
#include "ia/feasibility.hpp"

namespace ia {

/// CSIT mask of one TX. Normal form: an empty rx or tx set collapses to the
/// all-empty mask (it covers no coefficient either way), and the full pair is
/// stored as Complete.
struct CsitMask {
    enum class Kind { Sets, Complete };

    Kind kind = Kind::Sets;
    SubIC sets;        // meaningful when kind == Sets
    int owner_tx = 0;  // 1-based

    static CsitMask complete(int owner);
    /// Builds a Sets mask in normal form (collapses empty / full cases).
    static CsitMask of(int owner, SubIC sets, int users);

    /// The covered sub-IC with Complete expanded to the full pair.
    SubIC effective_sets(int users) const;

    bool operator==(const CsitMask&) const = default;
};

/// One mask per TX, masks[j-1].owner_tx == j.
struct CsitAllocation {
    std::vector<CsitMask> masks;

    const CsitMask& mask_of(int tx) const { return masks.at(static_cast<std::size_t>(tx) - 1); }
};

/// Boolean N_Tot x M_Tot matrix with ones exactly on the coefficients the
/// mask covers.
Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> expand_mask(const AntennaConfig& config,
                                                                const CsitMask& mask);

/// Number of coefficients the mask feeds back; equals the number of ones in
/// expand_mask (tested against it) but computed blockwise.
long mask_size(const AntennaConfig& config, const CsitMask& mask);

/// Total feedback size of an allocation, sum of the per-TX mask sizes.
long allocation_size(const AntennaConfig& config, const CsitAllocation& alloc);

/// Size of the conventional allocation: every TX learns every interfering
/// block, K * (N_Tot * M_Tot - sum_i N_i M_i).
long complete_size(const AntennaConfig& config);

/// Surplus antennas over the tight bound: sum_i (N_i + M_i) - K(K+1).
/// Negative means infeasible by counting.
long excess_antennas(const AntennaConfig& config);

/// CSIT allocation for a tightly-feasible configuration. Throws NotTightError
/// otherwise.
CsitAllocation allocate_tight(const AntennaConfig& config);

/// Nodes that belong to at least one tight sub-IC of a feasible
/// configuration; removing an antenna at such a node would break IA
/// feasibility. Collected from the greedy scans anchored at every node.
struct TightMembership {
    std::vector<int> rx_members;
    std::vector<int> tx_members;
};
TightMembership tight_membership(const AntennaConfig& config);

/// A way of reducing a super-feasible configuration to a tightly-feasible
/// one by ignoring antennas.
struct RemovalPlan {
    std::vector<int> rx_removals;  // multiset of RX indices, sorted
    std::vector<int> tx_removals;  // multiset of TX indices, sorted
    AntennaConfig reduced_config;

    bool empty() const { return rx_removals.empty() && tx_removals.empty(); }
};

/// Greedy removal: at each step drop one antenna at the TX with the fewest
/// antennas among TXs in no tight sub-IC, falling back to the RX side when
/// every TX is protected. Ties resolved by ascending user index. Throws
/// NotSuperError unless the configuration is feasible and super-feasible.
RemovalPlan remove_antennas_heuristic(const AntennaConfig& config);

/// Exhaustive search over all ways of distributing the surplus removals,
/// keeping feasible reduced configurations and minimizing the resulting
/// tight-allocation size; ties by lexicographically smallest removal count
/// vector (r_1..r_K, t_1..t_K). Guarded at 10^6 candidate plans.
RemovalPlan remove_antennas_exhaustive(const AntennaConfig& config);

enum class SuperMode { Heuristic, Exhaustive };

struct SuperAllocation {
    RemovalPlan plan;       // empty plan for tight inputs
    CsitAllocation alloc;   // masks over plan.reduced_config
};

/// Composes antenna removal with the tight allocation. Tight inputs get an
/// empty plan and allocate_tight directly; infeasible inputs throw.
SuperAllocation allocate_super(const AntennaConfig& config, SuperMode mode);

namespace detail {
RemovalPlan remove_exhaustive_serial(const AntennaConfig& config);
RemovalPlan remove_exhaustive_parallel(const AntennaConfig& config);
/// Number of candidate removal plans (for the guard and the benchmark).
std::uint64_t count_removal_plans(const AntennaConfig& config);
}  // namespace detail

}  // namespace ia
