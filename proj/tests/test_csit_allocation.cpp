#include <doctest.h>

#include <algorithm>

#include "ia/csit_allocation.hpp"
#include "ia/rng.hpp"

using namespace ia;

namespace {

AntennaConfig cfg(const char* text) { return AntennaConfig::parse(text); }

long count_ones(const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& m) {
    long ones = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) ones += m(r, c) ? 1 : 0;
    return ones;
}

}  // namespace

TEST_CASE("mask expansion covers exactly the cross blocks") {
    const AntennaConfig c3 = cfg("[(2,2)^3]");
    CHECK(count_ones(expand_mask(c3, CsitMask::of(1, SubIC{}, 3))) == 0);
    CHECK(count_ones(expand_mask(c3, CsitMask::complete(1))) == 24);  // 36 - 3 direct 2x2 blocks

    const AntennaConfig super = cfg("[(2,2).(3,2).(2,3)]");
    const auto m = expand_mask(super, CsitMask::of(2, SubIC({3}, {1, 2}), 3));
    CHECK(count_ones(m) == 8);
    CHECK(m(super.rx_offset(3), super.tx_offset(1)));
    CHECK(m(super.rx_offset(3) + 1, super.tx_offset(2) + 1));
    CHECK_FALSE(m(super.rx_offset(1), super.tx_offset(1)));

    // Direct blocks stay clear even when both sets contain the user.
    const auto full = expand_mask(super, CsitMask::complete(1));
    for (int u = 1; u <= 3; ++u)
        for (int r = 0; r < super.rx_antennas(u); ++r)
            for (int col = 0; col < super.tx_antennas(u); ++col)
                CHECK_FALSE(full(super.rx_offset(u) + r, super.tx_offset(u) + col));
}

TEST_CASE("mask size equals the number of ones in the expansion") {
    rng::Stream stream(11);
    const AntennaConfig config = cfg("[(2,3).(2,4).(3,5).(3,2).(4,2)]");
    for (int round = 0; round < 200; ++round) {
        std::vector<int> rx, tx;
        for (int u = 1; u <= 5; ++u) {
            if (stream.next_below(2)) rx.push_back(u);
            if (stream.next_below(2)) tx.push_back(u);
        }
        const CsitMask mask = CsitMask::of(1 + stream.next_below(5), SubIC(rx, tx), 5);
        CHECK(mask_size(config, mask) == count_ones(expand_mask(config, mask)));
    }
}

TEST_CASE("allocation and complete sizes reproduce the worked numbers") {
    const AntennaConfig big = cfg("[(2,3).(2,4).(3,5).(3,2).(4,2)]");
    CsitAllocation manual;
    manual.masks = {CsitMask::of(1, SubIC({1, 2, 3}, {4, 5, 1}), 5),
                    CsitMask::of(2, SubIC({1, 2, 3, 4}, {1, 2, 4, 5}), 5),
                    CsitMask::complete(3),
                    CsitMask::of(4, SubIC({1, 2}, {4, 5}), 5),
                    CsitMask::of(5, SubIC({1, 2}, {4, 5}), 5)};
    CHECK(allocation_size(big, manual) == 346);
    CHECK(complete_size(big) == 905);

    const AntennaConfig reduced = cfg("[(2,1).(3,2).(2,2)]");
    CsitAllocation small;
    small.masks = {CsitMask::of(1, SubIC{}, 3), CsitMask::of(2, SubIC({3}, {1, 2}), 3),
                   CsitMask::of(3, SubIC({1, 3}, {1, 2, 3}), 3)};
    CHECK(allocation_size(reduced, small) == 20);
    CHECK(complete_size(cfg("[(2,2).(3,2).(2,3)]")) == 99);
    CHECK(complete_size(cfg("[(1,1)]")) == 0);

    CsitAllocation empty;
    for (int j = 1; j <= 5; ++j) empty.masks.push_back(CsitMask::of(j, SubIC{}, 5));
    CHECK(allocation_size(big, empty) == 0);
}

TEST_CASE("allocate_tight reproduces the worked allocation") {
    const CsitAllocation alloc = allocate_tight(cfg("[(2,3).(2,4).(3,5).(3,2).(4,2)]"));
    CHECK(alloc.mask_of(1).sets == SubIC({1, 2, 3}, {1, 4, 5}));
    CHECK(alloc.mask_of(2).sets == SubIC({1, 2, 3, 4}, {1, 2, 4, 5}));
    CHECK(alloc.mask_of(3).kind == CsitMask::Kind::Complete);
    CHECK(alloc.mask_of(4).sets == SubIC({1, 2}, {4, 5}));
    CHECK(alloc.mask_of(5).sets == SubIC({1, 2}, {4, 5}));
    CHECK(allocation_size(cfg("[(2,3).(2,4).(3,5).(3,2).(4,2)]"), alloc) == 346);
}

TEST_CASE("allocate_tight on homogeneous configs gives complete masks") {
    for (const CsitMask& m : allocate_tight(cfg("[(2,2)^3]")).masks)
        CHECK(m.kind == CsitMask::Kind::Complete);

    // Corollary: homogeneous tight with 1 < M < K never reduces.
    for (int users = 3; users <= 6; ++users) {
        for (int m = 2; m < users; ++m) {
            const int n = users + 1 - m;
            if (n < 1) continue;
            std::vector<int> rx(static_cast<std::size_t>(users), n);
            std::vector<int> tx(static_cast<std::size_t>(users), m);
            const AntennaConfig config(rx, tx);
            if (!is_feasible(config).feasible) continue;
            for (const CsitMask& mask : allocate_tight(config).masks)
                CHECK_MESSAGE(mask.kind == CsitMask::Kind::Complete, config.to_string());
        }
    }
}

TEST_CASE("allocate_tight masks are tight sub-ICs and dominate nothing") {
    const AntennaConfig toy = cfg("[(1,1).(2,2).(3,3)]");
    const CsitAllocation alloc = allocate_tight(toy);
    for (const CsitMask& m : alloc.masks) {
        const SubIC sets = m.effective_sets(3);
        if (!sets.empty()) CHECK(n_var(toy, sets) == n_eq(toy, sets));
    }
    CHECK(allocation_size(toy, alloc) <= complete_size(toy));

    CHECK_THROWS_AS(allocate_tight(cfg("[(2,2).(3,2).(2,3)]")), NotTightError);  // super
    CHECK_THROWS_AS(allocate_tight(cfg("[(2,2)^4]")), NotTightError);            // infeasible
}

TEST_CASE("size dominance with equality only for all-complete") {
    rng::Stream stream(5);
    int reduced_seen = 0;
    for (int round = 0; round < 300; ++round) {
        std::vector<int> rx, tx;
        for (int u = 0; u < 4; ++u) {
            rx.push_back(1 + stream.next_below(4));
            tx.push_back(1 + stream.next_below(4));
        }
        const AntennaConfig config(rx, tx);
        if (is_feasible(config).classification != Classification::Tight) continue;
        const CsitAllocation alloc = allocate_tight(config);
        const long size = allocation_size(config, alloc);
        CHECK(size <= complete_size(config));
        const bool all_complete = std::all_of(alloc.masks.begin(), alloc.masks.end(), [](const CsitMask& m) {
            return m.kind == CsitMask::Kind::Complete;
        });
        if (size == complete_size(config)) CHECK(all_complete);
        if (all_complete) CHECK(size == complete_size(config));
        if (size < complete_size(config)) ++reduced_seen;
    }
    CHECK(reduced_seen > 0);
}

TEST_CASE("excess antennas") {
    CHECK(excess_antennas(cfg("[(2,2).(3,2).(2,3)]")) == 2);
    CHECK(excess_antennas(cfg("[(2,3).(2,4).(3,5).(3,2).(4,2)]")) == 0);
    CHECK(excess_antennas(cfg("[(2,2)^4]")) == -4);
}

TEST_CASE("tight membership mirrors the worked removal steps") {
    const TightMembership none = tight_membership(cfg("[(2,2).(3,2).(2,3)]"));
    CHECK(none.rx_members.empty());
    CHECK(none.tx_members.empty());

    const TightMembership mid = tight_membership(cfg("[(2,1).(3,2).(2,3)]"));
    CHECK(mid.tx_members == std::vector<int>{1, 2});
    CHECK(mid.rx_members == std::vector<int>{1, 3});

    const TightMembership all = tight_membership(cfg("[(2,3).(2,4).(3,5).(3,2).(4,2)]"));
    CHECK(all.rx_members == std::vector<int>{1, 2, 3, 4, 5});
    CHECK(all.tx_members == std::vector<int>{1, 2, 3, 4, 5});
}

TEST_CASE("tight membership agrees with subset enumeration on small configs") {
    rng::Stream stream(31);
    for (int round = 0; round < 400; ++round) {
        const int users = 2 + stream.next_below(2);  // 2..3
        std::vector<int> rx, tx;
        for (int u = 0; u < users; ++u) {
            rx.push_back(1 + stream.next_below(3));
            tx.push_back(1 + stream.next_below(3));
        }
        const AntennaConfig config(rx, tx);
        if (!is_feasible_bruteforce(config).feasible) continue;

        std::vector<int> rx_expect, tx_expect;
        for (std::uint32_t rm = 0; rm < (1u << users); ++rm) {
            for (std::uint32_t tm = 0; tm < (1u << users); ++tm) {
                if (rm == 0 && tm == 0) continue;
                std::vector<int> rs, ts;
                for (int u = 0; u < users; ++u) {
                    if (rm & (1u << u)) rs.push_back(u + 1);
                    if (tm & (1u << u)) ts.push_back(u + 1);
                }
                const SubIC s(rs, ts);
                if (n_var(config, s) != n_eq(config, s)) continue;
                for (int u : s.rx) rx_expect.push_back(u);
                for (int u : s.tx) tx_expect.push_back(u);
            }
        }
        auto unique_sorted = [](std::vector<int>& v) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        };
        unique_sorted(rx_expect);
        unique_sorted(tx_expect);

        const TightMembership members = tight_membership(config);
        CHECK_MESSAGE(members.rx_members == rx_expect, config.to_string());
        CHECK_MESSAGE(members.tx_members == tx_expect, config.to_string());
    }
}

TEST_CASE("removal heuristic follows the worked example") {
    const RemovalPlan plan = remove_antennas_heuristic(cfg("[(2,2).(3,2).(2,3)]"));
    CHECK(plan.rx_removals.empty());
    CHECK(plan.tx_removals == std::vector<int>{1, 3});
    CHECK(plan.reduced_config == cfg("[(2,1).(3,2).(2,2)]"));

    CHECK_THROWS_AS(remove_antennas_heuristic(cfg("[(2,2)^3]")), NotSuperError);
    CHECK_THROWS_AS(remove_antennas_heuristic(cfg("[(2,2)^4]")), NotSuperError);

    // Four surplus antennas on the heavy fourth pair; reduction ends tight.
    const RemovalPlan big = remove_antennas_heuristic(cfg("[(2,2).(2,2).(2,2).(6,6)]"));
    CHECK(big.rx_removals.size() + big.tx_removals.size() == 4);
    CHECK(is_feasible(big.reduced_config).classification == Classification::Tight);
}

TEST_CASE("exhaustive removal beats or matches the heuristic") {
    const RemovalPlan plan = remove_antennas_exhaustive(cfg("[(2,2).(3,2).(2,3)]"));
    const long best = allocation_size(plan.reduced_config, allocate_tight(plan.reduced_config));
    CHECK(best <= 20);

    CHECK_THROWS_AS(remove_antennas_exhaustive(cfg("[(2,2)^3]")), NotSuperError);

    rng::Stream stream(17);
    int supers = 0;
    while (supers < 60) {
        std::vector<int> rx, tx;
        for (int u = 0; u < 3; ++u) {
            rx.push_back(1 + stream.next_below(4));
            tx.push_back(1 + stream.next_below(4));
        }
        const AntennaConfig config(rx, tx);
        if (is_feasible(config).classification != Classification::Super) continue;
        ++supers;
        const RemovalPlan heuristic = remove_antennas_heuristic(config);
        const RemovalPlan exhaustive = remove_antennas_exhaustive(config);
        const long h = allocation_size(heuristic.reduced_config, allocate_tight(heuristic.reduced_config));
        const long e = allocation_size(exhaustive.reduced_config, allocate_tight(exhaustive.reduced_config));
        CHECK_MESSAGE(e <= h, config.to_string());
        CHECK(excess_antennas(exhaustive.reduced_config) == 0);
    }
}

TEST_CASE("exhaustive serial and parallel kernels agree") {
    const char* configs[] = {"[(2,2).(3,2).(2,3)]", "[(3,3).(2,2).(3,2)]", "[(2,2).(2,2).(2,2).(6,6)]"};
    for (const char* text : configs) {
        const RemovalPlan serial = detail::remove_exhaustive_serial(cfg(text));
        const RemovalPlan parallel = detail::remove_exhaustive_parallel(cfg(text));
        CHECK(serial.rx_removals == parallel.rx_removals);
        CHECK(serial.tx_removals == parallel.tx_removals);
        CHECK(serial.reduced_config == parallel.reduced_config);
    }
}

TEST_CASE("allocate_super composes removal and tight allocation") {
    const auto [plan, alloc] = allocate_super(cfg("[(2,2).(3,2).(2,3)]"), SuperMode::Heuristic);
    CHECK(plan.tx_removals == std::vector<int>{1, 3});
    CHECK(alloc.mask_of(1).effective_sets(3).empty());
    CHECK(alloc.mask_of(2).sets == SubIC({3}, {1, 2}));
    CHECK(alloc.mask_of(3).sets == SubIC({1, 3}, {1, 2, 3}));
    CHECK(allocation_size(plan.reduced_config, alloc) == 20);

    const auto tight = allocate_super(cfg("[(2,2)^3]"), SuperMode::Exhaustive);
    CHECK(tight.plan.empty());
    CHECK(tight.plan.reduced_config == cfg("[(2,2)^3]"));
    for (const CsitMask& m : tight.alloc.masks) CHECK(m.kind == CsitMask::Kind::Complete);

    // Tight with an embedded tight sub-IC: reduction without any removal.
    const auto embedded = allocate_super(cfg("[(2,2).(2,2).(2,2).(4,4)]"), SuperMode::Heuristic);
    CHECK(embedded.plan.empty());
    CHECK(allocation_size(embedded.plan.reduced_config, embedded.alloc) <
          complete_size(cfg("[(2,2).(2,2).(2,2).(4,4)]")));

    CHECK_THROWS_AS(allocate_super(cfg("[(2,2)^4]"), SuperMode::Heuristic), UsageError);
}

TEST_CASE("reduced plans satisfy the tight bound") {
    rng::Stream stream(23);
    for (int round = 0; round < 40; ++round) {
        std::vector<int> rx, tx;
        for (int u = 0; u < 3; ++u) {
            rx.push_back(1 + stream.next_below(4));
            tx.push_back(1 + stream.next_below(4));
        }
        const AntennaConfig config(rx, tx);
        if (is_feasible(config).classification != Classification::Super) continue;
        const RemovalPlan plan = remove_antennas_heuristic(config);
        CHECK(static_cast<long>(plan.rx_removals.size() + plan.tx_removals.size()) ==
              excess_antennas(config));
        CHECK(plan.reduced_config.antenna_sum() == 12);
        CHECK(is_feasible(plan.reduced_config).classification == Classification::Tight);
    }
}
