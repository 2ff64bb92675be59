/**
 * @file feasibility.hpp
 * @brief Single-stream interference-alignment feasibility for K-user MIMO ICs.
 *
 * Feasibility is equivalent to the counting condition
 *     n_var(S_RX, S_TX) >= n_eq(S_RX, S_TX)   for every pair of user subsets,
 * with
 *     n_var = sum_{i in S_RX} (N_i - 1) + sum_{j in S_TX} (M_j - 1)
 *     n_eq  = #{ (j, k) : j in S_RX, k in S_TX, j != k }.
 *
 * Two testers are provided: an exhaustive oracle over all 4^K subset pairs
 * (guarded at K <= 10) and a polynomial-time tester built from an ordered
 * greedy scan over sub-ICs. The scan grows a pair of index sets, adding the
 * next receiver whenever that adds strictly more equations than variables and
 * the next transmitter otherwise; it is also the engine behind the
 * smallest-tight-sub-IC search used by the CSIT allocation policies.
 */
#pragma once

#include <optional>

#include "ia/antenna_config.hpp"

namespace ia {

enum class Classification { Infeasible, Tight, Super };

const char* to_cstring(Classification c);

struct WitnessCounts {
    long n_var = 0;
    long n_eq = 0;
};

struct FeasibilityReport {
    bool feasible = false;
    Classification classification = Classification::Infeasible;
    /// For Infeasible: a subset pair with n_var < n_eq. For Tight/Super: a
    /// tight sub-IC when one was encountered, else absent.
    std::optional<SubIC> witness;
    /// Counts of the witness pair, when a witness is present.
    std::optional<WitnessCounts> counts;
};

/// Number of free beamforming variables contributed by a subset pair.
long n_var(const AntennaConfig& config, const SubIC& s);

/// Number of zero-forcing equations generated by a subset pair.
long n_eq(const AntennaConfig& config, const SubIC& s);

/// Exhaustive tester over every (rx subset, tx subset) pair; guarded at
/// K <= 10. The infeasibility witness is the first violating pair when pairs
/// are ordered by (rx bitmask, tx bitmask) ascending, bit i = user i+1.
FeasibilityReport is_feasible_bruteforce(const AntennaConfig& config);

/// Polynomial-time tester: runs the greedy scan unanchored, then anchored at
/// every TX and every RX, reporting the first violating sub-IC encountered in
/// that order. Equivalence with the brute-force oracle is enforced by tests,
/// not assumed.
FeasibilityReport is_feasible(const AntennaConfig& config);

/// Greedy scan for a tight sub-IC containing the anchor node (or seeded empty
/// when no anchor is given). Returns the first visited pair with
/// n_var == n_eq, or nullopt if the scan exhausts all transmitters while the
/// configuration is still slack. At most one anchor may be given.
std::optional<SubIC> smallest_tight_subic(const AntennaConfig& config,
                                          std::optional<int> anchor_tx = std::nullopt,
                                          std::optional<int> anchor_rx = std::nullopt);

namespace detail {

/// Serial reference for the brute-force subset enumeration; the public
/// is_feasible_bruteforce partitions the same search across OpenMP workers
/// with a min-bitmask reduction and must return identical reports.
FeasibilityReport brute_force_serial(const AntennaConfig& config);
FeasibilityReport brute_force_parallel(const AntennaConfig& config);

/// One greedy scan. The visitor sees every visited pair; `stop_at_tight`
/// makes the scan return at the first zero-slack non-empty pair (the
/// allocation use), otherwise it keeps growing until stuck (the feasibility
/// use, hunting for negative slack).
struct ScanOutcome {
    std::optional<SubIC> tight;      // first zero-slack non-empty pair
    std::optional<SubIC> violation;  // first negative-slack pair
};

ScanOutcome run_scan(const AntennaConfig& config, std::optional<int> anchor_tx, bool stop_at_tight);

}  // namespace detail

}  // namespace ia
