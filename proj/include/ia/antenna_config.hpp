/**
 * @file antenna_config.hpp
 * @brief Antenna configurations of a K-user MIMO interference channel and
 *        generalized sub-IC index sets.
 *
 * Configurations print and parse in bracket notation, e.g.
 * `[(2,3).(2,4).(3,5).(3,2).(4,2)]`, with the homogeneous shorthand
 * `[(N,M)^K]` (the exponent is accepted on any group). User indices are
 * 1-based everywhere in the public interface.
 */
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ia {

/// Raised for malformed config strings, bad indices and other caller errors.
class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Raised when a combinatorial guard (enumeration too large) trips.
class GuardError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class NotTightError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class NotSuperError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Per-user RX/TX antenna counts of a K-user interference channel.
class AntennaConfig {
  public:
    AntennaConfig(std::vector<int> rx_counts, std::vector<int> tx_counts);

    int users() const { return static_cast<int>(rx_.size()); }

    /// RX antenna count N_i, 1-based user index.
    int rx_antennas(int user) const { return rx_.at(check(user) - 1); }
    /// TX antenna count M_j, 1-based user index.
    int tx_antennas(int user) const { return tx_.at(check(user) - 1); }

    const std::vector<int>& rx_counts() const { return rx_; }
    const std::vector<int>& tx_counts() const { return tx_; }

    int rx_total() const { return rx_total_; }
    int tx_total() const { return tx_total_; }

    /// Row offset of block row `user` in the stacked channel matrix.
    int rx_offset(int user) const;
    /// Column offset of block column `user` in the stacked channel matrix.
    int tx_offset(int user) const;

    /// Sum of all antenna counts, sum_i (N_i + M_i).
    long antenna_sum() const { return rx_total_ + tx_total_; }

    /// Same channel with the TX and RX roles exchanged.
    AntennaConfig transposed() const { return {tx_, rx_}; }

    static AntennaConfig parse(std::string_view text);
    std::string to_string() const;

    bool operator==(const AntennaConfig&) const = default;

  private:
    int check(int user) const {
        if (user < 1 || user > users()) throw UsageError("user index out of range");
        return user;
    }

    std::vector<int> rx_, tx_;
    int rx_total_ = 0, tx_total_ = 0;
};

/// A generalized sub-interference-channel: subsets of RXs and TXs, either of
/// which may be empty. Indices are sorted, unique and 1-based.
struct SubIC {
    std::vector<int> rx;
    std::vector<int> tx;

    SubIC() = default;
    SubIC(std::vector<int> rx_set, std::vector<int> tx_set);

    static SubIC full(int users);

    bool empty() const { return rx.empty() && tx.empty(); }
    bool is_full(int users) const;

    bool rx_contains(int user) const;
    bool tx_contains(int user) const;

    /// Strict inclusion of both index sets.
    bool strictly_inside(const SubIC& other) const;

    SubIC transposed() const { return SubIC{tx, rx}; }

    /// Stable text form used for seed derivation and map keys.
    std::string key() const;

    bool operator==(const SubIC&) const = default;
};

/// Decrements antenna counts at the listed nodes (multisets: repeats allowed).
/// Throws if any count would drop below one.
AntennaConfig apply_reduction(const AntennaConfig& config, const std::vector<int>& rx_removals,
                              const std::vector<int>& tx_removals);

}  // namespace ia
