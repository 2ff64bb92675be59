#include <doctest.h>

#include <cstring>

#include "ia/channel.hpp"
#include "ia/precoding.hpp"
#include "ia/rng.hpp"

using namespace ia;

namespace {

AntennaConfig cfg(const char* text) { return AntennaConfig::parse(text); }

bool bit_equal(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), sizeof(std::complex<double>) * static_cast<std::size_t>(a.size())) == 0;
}

Eigen::VectorXcd random_unit(int dim, std::uint64_t seed) {
    rng::Stream stream(seed);
    Eigen::VectorXcd v(dim);
    for (int r = 0; r < dim; ++r) v(r) = stream.next_cnormal();
    v.normalize();
    return v;
}

bool non_increasing(const std::vector<double>& values, double slack) {
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[i - 1] + slack) return false;
    return true;
}

}  // namespace

TEST_CASE("leakage sums over present cross links only") {
    const AntennaConfig single = cfg("[(2,2)]");
    const ChannelMatrix h1 = draw_channel(single, 1);
    BeamformerSet bf;
    bf.tx[1] = random_unit(2, 10);
    bf.rx[1] = random_unit(2, 11);
    CHECK(leakage(h1, bf) == 0.0);

    const AntennaConfig c3 = cfg("[(2,2)^3]");
    const ChannelMatrix h3 = draw_channel(c3, 2);
    BeamformerSet bf3;
    for (int u = 1; u <= 3; ++u) {
        bf3.tx[u] = random_unit(2, 20 + static_cast<std::uint64_t>(u));
        bf3.rx[u] = random_unit(2, 30 + static_cast<std::uint64_t>(u));
    }
    double by_hand = 0;
    for (int i = 1; i <= 3; ++i)
        for (int k = 1; k <= 3; ++k)
            if (i != k) by_hand += std::norm((bf3.rx[i].adjoint() * h3.block(i, k) * bf3.tx[k]).value());
    CHECK(leakage(h3, bf3) == doctest::Approx(by_hand).epsilon(1e-12));
    CHECK(leakage(h3, bf3) > 0);
}

TEST_CASE("min-leakage solve aligns the tight three-user channel") {
    const AntennaConfig c3 = cfg("[(2,2)^3]");
    const ChannelMatrix h = draw_channel(c3, 5);
    const SolverOptions opts{1e-10, 5000, 99};
    const auto [bf, trace] = min_leakage_solve(SubChannel::restriction(h, SubIC::full(3)), {}, opts);
    CHECK(trace.converged);
    CHECK(trace.final_leakage() <= 1e-10);
    CHECK(non_increasing(trace.leakage, 1e-12));
    for (int u = 1; u <= 3; ++u) {
        CHECK(std::abs(bf.tx.at(u).norm() - 1.0) < 1e-12);
        CHECK(std::abs(bf.rx.at(u).norm() - 1.0) < 1e-12);
    }
    // Per-link zero forcing follows from the sum bound.
    for (int i = 1; i <= 3; ++i)
        for (int k = 1; k <= 3; ++k)
            if (i != k)
                CHECK(std::norm((bf.rx.at(i).adjoint() * h.block(i, k) * bf.tx.at(k)).value()) <= 1e-10);
}

TEST_CASE("frozen beamformers are returned bit-identical") {
    const AntennaConfig c3 = cfg("[(2,2)^3]");
    const ChannelMatrix h = draw_channel(c3, 8);
    std::map<int, Eigen::VectorXcd> fixed;
    fixed[1] = random_unit(2, 123);
    const SolverOptions opts{1e-10, 300, 7};
    const auto [bf, trace] = min_leakage_solve(SubChannel::restriction(h, SubIC::full(3)), fixed, opts);
    CHECK(bit_equal(bf.tx.at(1), fixed.at(1)));
    CHECK(non_increasing(trace.leakage, 1e-12));
    CHECK_FALSE(bit_equal(bf.tx.at(2), bf.tx.at(3)));

    CHECK_THROWS_AS(min_leakage_solve(SubChannel::restriction(h, SubIC({1}, {2})),
                                      {{3, random_unit(2, 5)}}, opts),
                    UsageError);  // fixed TX outside the sub-IC
    std::map<int, Eigen::VectorXcd> bad;
    bad[1] = 2.0 * random_unit(2, 6);
    CHECK_THROWS_AS(min_leakage_solve(SubChannel::restriction(h, SubIC::full(3)), bad, opts), UsageError);
}

TEST_CASE("generalized sub-IC solves sum over present nodes") {
    // RXs {1,2}, TXs {1,3}: three cross links, super-feasible counting.
    const AntennaConfig c3 = cfg("[(2,2)^3]");
    const ChannelMatrix h = draw_channel(c3, 21);
    const SubIC sub({1, 2}, {1, 3});
    const SolverOptions opts{1e-10, 5000, 3};
    const auto [bf, trace] = min_leakage_solve(SubChannel::restriction(h, sub), {}, opts);
    CHECK(trace.converged);
    CHECK(bf.tx.count(1) == 1);
    CHECK(bf.tx.count(2) == 0);  // absent TX never touched
    CHECK(bf.tx.count(3) == 1);
    CHECK(bf.rx.count(3) == 0);
    const double cross = std::norm((bf.rx.at(1).adjoint() * h.block(1, 3) * bf.tx.at(3)).value()) +
                         std::norm((bf.rx.at(2).adjoint() * h.block(2, 1) * bf.tx.at(1)).value()) +
                         std::norm((bf.rx.at(2).adjoint() * h.block(2, 3) * bf.tx.at(3)).value());
    CHECK(cross <= 1e-9);
}

TEST_CASE("infeasible configurations stall above tolerance") {
    const AntennaConfig c4 = cfg("[(2,2)^4]");
    const SolverOptions opts{1e-10, 500, 0};
    int stalled = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const ChannelMatrix h = draw_channel(c4, seed);
        SolverOptions o = opts;
        o.init_seed = seed;
        const auto [bf, trace] = min_leakage_solve(SubChannel::restriction(h, SubIC::full(4)), {}, o);
        CHECK_FALSE(trace.converged);
        CHECK(non_increasing(trace.leakage, 1e-12));
        if (trace.final_leakage() > 10 * o.tolerance) ++stalled;
    }
    CHECK(stalled == 5);
}

TEST_CASE("distributed precoding on the five-user worked configuration") {
    const AntennaConfig config = cfg("[(2,3).(2,4).(3,5).(3,2).(4,2)]");
    const CsitAllocation alloc = allocate_tight(config);
    const ChannelMatrix h = draw_channel(config, 14);
    const SolverOptions opts{1e-10, 5000, 14};
    const PrecodeResult result = distributed_precode(config, alloc, nullptr, h, opts);

    CHECK(result.converged);
    CHECK(result.residual_leakage <= 1e-8);
    REQUIRE(result.solves.size() == 4);  // shared sub-IC solved once, then 1, 2, full
    CHECK(result.solves[0].sub_ic == SubIC({1, 2}, {4, 5}));
    CHECK(result.solves[1].sub_ic == SubIC({1, 2, 3}, {1, 4, 5}));
    CHECK(result.solves[2].sub_ic == SubIC({1, 2, 3, 4}, {1, 2, 4, 5}));
    CHECK(result.solves[3].sub_ic == SubIC::full(5));
    for (int u = 1; u <= 5; ++u) {
        CHECK(result.beamformers.tx.at(u).size() == config.tx_antennas(u));
        CHECK(std::abs(result.beamformers.tx.at(u).norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("all-complete allocations collapse to a single solve") {
    const AntennaConfig config = cfg("[(2,2)^3]");
    CsitAllocation alloc;
    for (int j = 1; j <= 3; ++j) alloc.masks.push_back(CsitMask::complete(j));
    const ChannelMatrix h = draw_channel(config, 33);
    const SolverOptions opts{1e-10, 5000, 33};
    const PrecodeResult result = distributed_precode(config, alloc, nullptr, h, opts);
    CHECK(result.solves.size() == 1);
    CHECK(result.solves[0].sub_ic == SubIC::full(3));
    CHECK(result.residual_leakage <= 1e-8);

    // Identical to the plain full-CSIT solve with the same seed.
    const auto [plain, trace] = min_leakage_solve(SubChannel::restriction(h, SubIC::full(3)), {}, opts);
    for (int u = 1; u <= 3; ++u) CHECK(bit_equal(result.beamformers.tx.at(u), plain.tx.at(u)));
}

TEST_CASE("replicas are bit-identical across transmitters") {
    const AntennaConfig config = cfg("[(2,3).(2,4).(3,5).(3,2).(4,2)]");
    const CsitAllocation alloc = allocate_tight(config);
    const ChannelMatrix h = draw_channel(config, 77);
    const SolverOptions opts{1e-10, 5000, 77};

    std::map<int, std::map<int, Eigen::VectorXcd>> replicas;
    for (int j = 1; j <= 5; ++j) replicas[j] = replica_beamformers(config, alloc, nullptr, h, opts, j);

    int pairs_checked = 0;
    for (int j = 1; j <= 5; ++j) {
        const SubIC own = alloc.mask_of(j).effective_sets(5);
        for (int k = 1; k <= 5; ++k) {
            if (k == j) continue;
            if (!alloc.mask_of(k).effective_sets(5).strictly_inside(own)) continue;
            REQUIRE(replicas[j].count(k) == 1);
            CHECK(bit_equal(replicas[j].at(k), replicas[k].at(k)));
            ++pairs_checked;
        }
    }
    CHECK(pairs_checked >= 5);  // C_1 = {4,5}, C_2 = {1,4,5}, C_3 = {1,2,4,5}
}

TEST_CASE("reduction pipeline aligns a super-feasible channel") {
    const AntennaConfig config = cfg("[(2,2).(3,2).(2,3)]");
    const auto [plan, alloc] = allocate_super(config, SuperMode::Heuristic);
    const ChannelMatrix h = draw_channel(config, 4);
    const SolverOptions opts{1e-10, 5000, 4};
    const PrecodeResult result = distributed_precode(config, alloc, &plan, h, opts);

    CHECK(result.converged);
    CHECK(result.residual_leakage <= 1e-8);
    for (int u = 1; u <= 3; ++u) {
        CHECK(result.beamformers.tx.at(u).size() == config.tx_antennas(u));  // full dimension
        CHECK(std::abs(result.beamformers.tx.at(u).norm() - 1.0) < 1e-12);
    }

    // Replication holds through the reduction too.
    const auto at2 = replica_beamformers(config, alloc, &plan, h, opts, 2);
    const auto at3 = replica_beamformers(config, alloc, &plan, h, opts, 3);
    REQUIRE(at3.count(2) == 1);
    CHECK(bit_equal(at3.at(2), at2.at(2)));
}

TEST_CASE("exhaustive removal plans also preserve alignment") {
    const AntennaConfig config = cfg("[(2,2).(3,2).(2,3)]");
    const auto [plan, alloc] = allocate_super(config, SuperMode::Exhaustive);
    CHECK(allocation_size(plan.reduced_config, alloc) <= 20);  // at least as good as the greedy plan
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const ChannelMatrix h = draw_channel(config, seed);
        const SolverOptions opts{1e-10, 5000, seed};
        const PrecodeResult result = distributed_precode(config, alloc, &plan, h, opts);
        CHECK(result.converged);
        CHECK(result.residual_leakage <= 1e-8);
    }
}

TEST_CASE("single-antenna-total reductions fall back to receiver removals") {
    const auto [plan, alloc] = allocate_super(cfg("[(5,5)]"), SuperMode::Heuristic);
    CHECK(plan.rx_removals == std::vector<int>{1, 1, 1, 1});
    CHECK(plan.tx_removals == std::vector<int>{1, 1, 1, 1});
    CHECK(plan.reduced_config == cfg("[(1,1)]"));
    CHECK(allocation_size(plan.reduced_config, alloc) == 0);

    const ChannelMatrix h = draw_channel(cfg("[(5,5)]"), 2);
    const SolverOptions opts{1e-10, 100, 2};
    const PrecodeResult result = distributed_precode(cfg("[(5,5)]"), alloc, &plan, h, opts);
    CHECK(result.converged);
    CHECK(result.residual_leakage == 0.0);  // single user never interferes
    CHECK(result.beamformers.tx.at(1).size() == 5);
    // The kept direction is the strongest right-singular vector of the
    // direct channel, so the beamforming gain beats any random direction.
    const double gain = (h.block(1, 1) * result.beamformers.tx.at(1)).squaredNorm();
    rng::Stream probe_stream(3);
    for (int probe = 0; probe < 200; ++probe) {
        const Eigen::VectorXcd q = random_unit(5, probe_stream.next_u64());
        CHECK(gain + 1e-9 >= (h.block(1, 1) * q).squaredNorm());
    }
}

TEST_CASE("rx filters minimize the interference quotient") {
    const AntennaConfig single = cfg("[(3,3)]");
    const ChannelMatrix h1 = draw_channel(single, 6);
    const auto g1 = rx_filters(h1, {{1, random_unit(3, 9)}});
    CHECK(g1.at(1) == Eigen::VectorXcd::Unit(3, 0));  // zero covariance, first axis

    const AntennaConfig c3 = cfg("[(2,2)^3]");
    const ChannelMatrix h = draw_channel(c3, 61);
    std::map<int, Eigen::VectorXcd> tx;
    for (int u = 1; u <= 3; ++u) tx[u] = random_unit(2, 100 + static_cast<std::uint64_t>(u));
    const auto filters = rx_filters(h, tx);
    for (int i = 1; i <= 3; ++i) {
        double best = 0;
        for (int k = 1; k <= 3; ++k)
            if (k != i) best += std::norm((filters.at(i).adjoint() * h.block(i, k) * tx.at(k)).value());
        for (int probe = 0; probe < 1000; ++probe) {
            const Eigen::VectorXcd g = random_unit(2, 5000 + static_cast<std::uint64_t>(probe));
            double value = 0;
            for (int k = 1; k <= 3; ++k)
                if (k != i) value += std::norm((g.adjoint() * h.block(i, k) * tx.at(k)).value());
            CHECK(best <= value + 1e-9);
        }
    }
}

TEST_CASE("user rates follow the residual-interference formula") {
    const AntennaConfig single = cfg("[(1,1)]");
    ChannelMatrix unit{Eigen::MatrixXcd::Identity(1, 1), single, 0};
    BeamformerSet bf;
    bf.tx[1] = Eigen::VectorXcd::Ones(1);
    bf.rx[1] = Eigen::VectorXcd::Ones(1);
    CHECK(user_rates(unit, bf, 1.0)[0] == doctest::Approx(1.0));   // log2(1 + 1)
    CHECK(user_rates(unit, bf, 0.0)[0] == doctest::Approx(0.0));

    // Aligned beamformers gain ~log2(10) bits per 10 dB at high SNR.
    const AntennaConfig c3 = cfg("[(2,2)^3]");
    const ChannelMatrix h = draw_channel(c3, 3);
    const SolverOptions opts{1e-10, 5000, 12};
    auto [solved, trace] = min_leakage_solve(SubChannel::restriction(h, SubIC::full(3)), {}, opts);
    REQUIRE(trace.converged);
    BeamformerSet aligned;
    aligned.tx = solved.tx;
    aligned.rx = rx_filters(h, solved.tx);
    double previous = 0;
    for (double db : {30.0, 40.0, 50.0}) {
        const std::vector<double> rates = user_rates(h, aligned, std::pow(10.0, db / 10.0));
        double mean = 0;
        for (double r : rates) mean += r / 3.0;
        if (db > 30.0) CHECK(mean - previous == doctest::Approx(std::log2(10.0)).epsilon(0.03));
        previous = mean;
    }
}
