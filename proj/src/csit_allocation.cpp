#include "ia/csit_allocation.hpp"

#include <algorithm>
#include <cassert>
#include <set>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ia {

CsitMask CsitMask::complete(int owner) {
    CsitMask m;
    m.kind = Kind::Complete;
    m.owner_tx = owner;
    return m;
}

CsitMask CsitMask::of(int owner, SubIC sets, int users) {
    CsitMask m;
    m.owner_tx = owner;
    if (sets.rx.empty() || sets.tx.empty()) {
        m.kind = Kind::Sets;
        m.sets = SubIC{};  // covers nothing either way; keep the empty normal form
    } else if (sets.is_full(users)) {
        m.kind = Kind::Complete;
    } else {
        m.kind = Kind::Sets;
        m.sets = std::move(sets);
    }
    return m;
}

SubIC CsitMask::effective_sets(int users) const {
    return kind == Kind::Complete ? SubIC::full(users) : sets;
}

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> expand_mask(const AntennaConfig& config,
                                                                const CsitMask& mask) {
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> out(config.rx_total(), config.tx_total());
    out.setConstant(false);
    const SubIC sets = mask.effective_sets(config.users());
    for (int x : sets.rx) {
        for (int y : sets.tx) {
            if (x == y) continue;
            out.block(config.rx_offset(x), config.tx_offset(y), config.rx_antennas(x),
                      config.tx_antennas(y))
                .setConstant(true);
        }
    }
    return out;
}

long mask_size(const AntennaConfig& config, const CsitMask& mask) {
    const SubIC sets = mask.effective_sets(config.users());
    long total = 0;
    for (int x : sets.rx)
        for (int y : sets.tx)
            if (x != y) total += static_cast<long>(config.rx_antennas(x)) * config.tx_antennas(y);
    return total;
}

long allocation_size(const AntennaConfig& config, const CsitAllocation& alloc) {
    if (static_cast<int>(alloc.masks.size()) != config.users())
        throw UsageError("allocation must hold one mask per TX");
    long total = 0;
    for (const CsitMask& m : alloc.masks) total += mask_size(config, m);
    return total;
}

long complete_size(const AntennaConfig& config) {
    long direct = 0;
    for (int i = 1; i <= config.users(); ++i)
        direct += static_cast<long>(config.rx_antennas(i)) * config.tx_antennas(i);
    const long full = static_cast<long>(config.rx_total()) * config.tx_total();
    return config.users() * (full - direct);
}

long excess_antennas(const AntennaConfig& config) {
    return config.antenna_sum() - static_cast<long>(config.users()) * (config.users() + 1);
}

CsitAllocation allocate_tight(const AntennaConfig& config) {
    const FeasibilityReport report = is_feasible(config);
    if (report.classification != Classification::Tight)
        throw NotTightError("allocate_tight requires a tightly-feasible configuration (got " +
                            std::string(to_cstring(report.classification)) + ")");

    CsitAllocation alloc;
    alloc.masks.reserve(static_cast<std::size_t>(config.users()));
    for (int j = 1; j <= config.users(); ++j) {
        std::optional<SubIC> found = smallest_tight_subic(config, j);
        // A tightly-feasible configuration always yields a tight sub-IC around
        // every anchor: once all TXs are selected the remaining slack is zero.
        if (!found) throw std::logic_error("anchored scan found no tight sub-IC in a tight config");
        alloc.masks.push_back(CsitMask::of(j, std::move(*found), config.users()));
    }
    return alloc;
}

TightMembership tight_membership(const AntennaConfig& config) {
    std::set<int> rx_members, tx_members;
    auto absorb = [&](const std::optional<SubIC>& s) {
        if (!s) return;
        rx_members.insert(s->rx.begin(), s->rx.end());
        tx_members.insert(s->tx.begin(), s->tx.end());
    };

    const AntennaConfig mirrored = config.transposed();
    for (int node = 1; node <= config.users(); ++node) {
        detail::ScanOutcome tx_scan = detail::run_scan(config, node, true);
        if (tx_scan.violation) throw UsageError("tight_membership requires a feasible configuration");
        absorb(tx_scan.tight);

        detail::ScanOutcome rx_scan = detail::run_scan(mirrored, node, true);
        if (rx_scan.violation) throw UsageError("tight_membership requires a feasible configuration");
        if (rx_scan.tight) absorb(rx_scan.tight->transposed());
    }

    return {{rx_members.begin(), rx_members.end()}, {tx_members.begin(), tx_members.end()}};
}

RemovalPlan remove_antennas_heuristic(const AntennaConfig& config) {
    const FeasibilityReport report = is_feasible(config);
    if (!report.feasible || report.classification != Classification::Super)
        throw NotSuperError("antenna removal requires a feasible super-feasible configuration (got " +
                            std::string(to_cstring(report.classification)) + ")");

    AntennaConfig current = config;
    std::vector<int> rx_removals, tx_removals;
    const long surplus = excess_antennas(config);
    for (long step = 0; step < surplus; ++step) {
        const TightMembership members = tight_membership(current);
        auto pick = [&](const std::vector<int>& protected_nodes, auto count_of) -> std::optional<int> {
            std::optional<int> best;
            for (int node = 1; node <= current.users(); ++node) {
                if (std::binary_search(protected_nodes.begin(), protected_nodes.end(), node)) continue;
                if (!best || count_of(node) < count_of(*best)) best = node;  // ties: ascending index
            }
            return best;
        };

        std::optional<int> tx_pick =
            pick(members.tx_members, [&](int j) { return current.tx_antennas(j); });
        if (tx_pick) {
            current = apply_reduction(current, {}, {*tx_pick});
            tx_removals.push_back(*tx_pick);
        } else {
            std::optional<int> rx_pick =
                pick(members.rx_members, [&](int i) { return current.rx_antennas(i); });
            if (!rx_pick)
                throw std::logic_error("no removable node although surplus antennas remain");
            current = apply_reduction(current, {*rx_pick}, {});
            rx_removals.push_back(*rx_pick);
        }

        if (!is_feasible(current).feasible)
            throw std::logic_error("antenna removal broke IA feasibility");
    }

    if (is_feasible(current).classification != Classification::Tight)
        throw std::logic_error("removal heuristic did not reach a tightly-feasible configuration");

    std::sort(rx_removals.begin(), rx_removals.end());
    std::sort(tx_removals.begin(), tx_removals.end());
    return {std::move(rx_removals), std::move(tx_removals), std::move(current)};
}

namespace detail {

namespace {

struct RemovalCaps {
    std::vector<int> caps;  // per node: rx 1..K then tx 1..K, max removable antennas
    long surplus = 0;
};

RemovalCaps removal_caps(const AntennaConfig& config) {
    RemovalCaps rc;
    rc.surplus = excess_antennas(config);
    for (int i = 1; i <= config.users(); ++i) rc.caps.push_back(config.rx_antennas(i) - 1);
    for (int j = 1; j <= config.users(); ++j) rc.caps.push_back(config.tx_antennas(j) - 1);
    return rc;
}

/// Enumerates every removal-count vector (lexicographically ascending) with
/// the given per-node caps and total, appending them to `out` flattened.
void enumerate_vectors(const RemovalCaps& rc, std::vector<signed char>& out) {
    const std::size_t n = rc.caps.size();
    std::vector<signed char> cur(n, 0);
    auto rec = [&](auto&& self, std::size_t pos, long remaining) -> void {
        if (pos == n) {
            if (remaining == 0) out.insert(out.end(), cur.begin(), cur.end());
            return;
        }
        long tail_cap = 0;
        for (std::size_t q = pos; q < n; ++q) tail_cap += rc.caps[q];
        if (remaining > tail_cap) return;
        const int top = static_cast<int>(std::min<long>(rc.caps[pos], remaining));
        for (int v = 0; v <= top; ++v) {
            cur[pos] = static_cast<signed char>(v);
            self(self, pos + 1, remaining - v);
        }
        cur[pos] = 0;
    };
    rec(rec, 0, rc.surplus);
}

std::uint64_t count_vectors(const RemovalCaps& rc) {
    // Capped stars-and-bars by dynamic programming over nodes.
    std::vector<std::uint64_t> ways(static_cast<std::size_t>(rc.surplus) + 1, 0);
    ways[0] = 1;
    for (int cap : rc.caps) {
        std::vector<std::uint64_t> next(ways.size(), 0);
        for (std::size_t total = 0; total < ways.size(); ++total) {
            if (!ways[total]) continue;
            for (int take = 0; take <= cap && total + static_cast<std::size_t>(take) < next.size();
                 ++take)
                next[total + static_cast<std::size_t>(take)] += ways[total];
        }
        ways.swap(next);
    }
    return ways.back();
}

struct Candidate {
    long size = -1;
    std::size_t index = 0;  // enumeration order == lexicographic order
    bool valid() const { return size >= 0; }
    bool better_than(const Candidate& other) const {
        if (!other.valid()) return valid();
        if (!valid()) return false;
        return size != other.size ? size < other.size : index < other.index;
    }
};

RemovalPlan exhaustive_impl(const AntennaConfig& config, bool parallel) {
    const FeasibilityReport report = is_feasible(config);
    if (!report.feasible || report.classification != Classification::Super)
        throw NotSuperError("antenna removal requires a feasible super-feasible configuration (got " +
                            std::string(to_cstring(report.classification)) + ")");

    const RemovalCaps rc = removal_caps(config);
    const std::uint64_t plan_count = count_vectors(rc);
    if (plan_count > 1'000'000)
        throw GuardError("exhaustive removal guard exceeded: " + std::to_string(plan_count) +
                         " candidate plans");

    std::vector<signed char> flat;
    enumerate_vectors(rc, flat);
    const std::size_t stride = rc.caps.size();
    const std::size_t total = flat.size() / stride;

    const int users = config.users();
    auto reduced_of = [&](std::size_t idx) {
        std::vector<int> rx = config.rx_counts(), tx = config.tx_counts();
        const signed char* v = flat.data() + idx * stride;
        for (int i = 0; i < users; ++i) rx[static_cast<std::size_t>(i)] -= v[i];
        for (int j = 0; j < users; ++j) tx[static_cast<std::size_t>(j)] -= v[users + j];
        return AntennaConfig{std::move(rx), std::move(tx)};
    };

    auto evaluate = [&](std::size_t idx) -> Candidate {
        const AntennaConfig reduced = reduced_of(idx);
        if (!is_feasible(reduced).feasible) return {};
        return {allocation_size(reduced, allocate_tight(reduced)), idx};
    };

    Candidate best;
#ifdef _OPENMP
    if (parallel) {
        const int threads = omp_get_max_threads();
        std::vector<Candidate> bests(static_cast<std::size_t>(threads));
#pragma omp parallel for schedule(dynamic, 16)
        for (std::int64_t idx = 0; idx < static_cast<std::int64_t>(total); ++idx) {
            Candidate c = evaluate(static_cast<std::size_t>(idx));
            Candidate& mine = bests[static_cast<std::size_t>(omp_get_thread_num())];
            if (c.better_than(mine)) mine = c;
        }
        for (const Candidate& c : bests)
            if (c.better_than(best)) best = c;
    } else
#else
    (void)parallel;
#endif
    {
        for (std::size_t idx = 0; idx < total; ++idx) {
            Candidate c = evaluate(idx);
            if (c.better_than(best)) best = c;
        }
    }

    // Every super-feasible configuration admits at least one feasible tight
    // reduction (the heuristic constructs one), so the search cannot come up
    // empty.
    if (!best.valid()) throw std::logic_error("exhaustive removal found no feasible reduction");

    const signed char* v = flat.data() + best.index * stride;
    std::vector<int> rx_removals, tx_removals;
    for (int i = 0; i < users; ++i)
        for (int r = 0; r < v[i]; ++r) rx_removals.push_back(i + 1);
    for (int j = 0; j < users; ++j)
        for (int r = 0; r < v[users + j]; ++r) tx_removals.push_back(j + 1);
    AntennaConfig reduced = reduced_of(best.index);
    return {std::move(rx_removals), std::move(tx_removals), std::move(reduced)};
}

}  // namespace

RemovalPlan remove_exhaustive_serial(const AntennaConfig& config) { return exhaustive_impl(config, false); }
RemovalPlan remove_exhaustive_parallel(const AntennaConfig& config) { return exhaustive_impl(config, true); }

std::uint64_t count_removal_plans(const AntennaConfig& config) {
    return count_vectors(removal_caps(config));
}

}  // namespace detail

RemovalPlan remove_antennas_exhaustive(const AntennaConfig& config) {
    return detail::remove_exhaustive_parallel(config);
}

SuperAllocation allocate_super(const AntennaConfig& config, SuperMode mode) {
    const FeasibilityReport report = is_feasible(config);
    if (!report.feasible) throw UsageError("allocate requires a feasible configuration");
    if (report.classification == Classification::Tight)
        return {RemovalPlan{{}, {}, config}, allocate_tight(config)};

    RemovalPlan plan = mode == SuperMode::Heuristic ? remove_antennas_heuristic(config)
                                                    : remove_antennas_exhaustive(config);
    CsitAllocation alloc = allocate_tight(plan.reduced_config);
    return {std::move(plan), std::move(alloc)};
}

}  // namespace ia
