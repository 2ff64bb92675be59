#include "ia/precoding.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <unordered_set>

#include "ia/linalg.hpp"
#include "ia/rng.hpp"

namespace ia {

namespace {

bool includes_sorted(const std::vector<int>& outer, const std::vector<int>& inner) {
    return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

/// Non-strict componentwise inclusion of sub-ICs.
bool subic_inside(const SubIC& inner, const SubIC& outer) {
    return includes_sorted(outer.rx, inner.rx) && includes_sorted(outer.tx, inner.tx);
}

Eigen::VectorXcd random_unit_vector(std::uint64_t seed, int dim) {
    rng::Stream stream(seed);
    Eigen::VectorXcd v(dim);
    for (int r = 0; r < dim; ++r) v(r) = stream.next_cnormal();
    v.normalize();
    return v;
}

Eigen::VectorXcd first_axis(int dim) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
    v(0) = 1.0;
    return v;
}

}  // namespace

SubChannel SubChannel::restriction(const ChannelMatrix& channel, const SubIC& sub) {
    SubChannel out;
    out.rx_ids = sub.rx;
    out.tx_ids = sub.tx;
    for (int i : sub.rx) out.rx_dims.push_back(channel.config.rx_antennas(i));
    for (int j : sub.tx) out.tx_dims.push_back(channel.config.tx_antennas(j));
    out.blocks.resize(sub.rx.size());
    for (std::size_t a = 0; a < sub.rx.size(); ++a) {
        out.blocks[a].resize(sub.tx.size());
        for (std::size_t b = 0; b < sub.tx.size(); ++b)
            out.blocks[a][b] = channel.block(sub.rx[a], sub.tx[b]);
    }
    return out;
}

SubChannel SubChannel::masked_restriction(const ChannelMatrix& channel, const CsitMask& owner_mask,
                                          const SubIC& sub) {
    const SubIC known = owner_mask.effective_sets(channel.config.users());
    SubChannel out = restriction(channel, sub);
    for (std::size_t a = 0; a < out.rx_ids.size(); ++a) {
        for (std::size_t b = 0; b < out.tx_ids.size(); ++b) {
            const int x = out.rx_ids[a], y = out.tx_ids[b];
            const bool covered = x != y && known.rx_contains(x) && known.tx_contains(y);
            if (!covered) out.blocks[a][b].setZero();
        }
    }
    return out;
}

double leakage(const SubChannel& channel, const BeamformerSet& beamformers) {
    double total = 0;
    for (std::size_t a = 0; a < channel.rx_ids.size(); ++a) {
        auto g = beamformers.rx.find(channel.rx_ids[a]);
        if (g == beamformers.rx.end()) throw UsageError("missing RX filter in leakage evaluation");
        for (std::size_t b = 0; b < channel.tx_ids.size(); ++b) {
            if (channel.tx_ids[b] == channel.rx_ids[a]) continue;
            auto t = beamformers.tx.find(channel.tx_ids[b]);
            if (t == beamformers.tx.end()) throw UsageError("missing TX beamformer in leakage evaluation");
            total += std::norm((g->second.adjoint() * channel.blocks[a][b] * t->second).value());
        }
    }
    return total;
}

double leakage(const ChannelMatrix& channel, const BeamformerSet& beamformers) {
    return leakage(SubChannel::restriction(channel, SubIC::full(channel.config.users())), beamformers);
}

std::pair<BeamformerSet, LeakageTrace> min_leakage_solve(const SubChannel& channel,
                                                         const std::map<int, Eigen::VectorXcd>& fixed_tx,
                                                         const SolverOptions& opts) {
    if (channel.tx_ids.empty()) throw UsageError("min_leakage_solve needs at least one TX");
    if (opts.max_iterations < 1) throw UsageError("max_iterations must be >= 1");

    const std::size_t n_rx = channel.rx_ids.size();
    const std::size_t n_tx = channel.tx_ids.size();
    const std::uint64_t key_tag = rng::tag(channel.key());

    std::vector<char> is_fixed(n_tx, 0);
    for (const auto& [id, vec] : fixed_tx) {
        auto it = std::find(channel.tx_ids.begin(), channel.tx_ids.end(), id);
        if (it == channel.tx_ids.end()) throw UsageError("fixed TX is not present in the sub-IC");
        const std::size_t b = static_cast<std::size_t>(it - channel.tx_ids.begin());
        if (vec.size() != channel.tx_dims[b]) throw UsageError("fixed beamformer dimension mismatch");
        if (std::abs(vec.norm() - 1.0) > 1e-6) throw UsageError("fixed beamformers must be unit norm");
        is_fixed[b] = 1;
    }

    BeamformerSet bf;
    for (std::size_t b = 0; b < n_tx; ++b) {
        const int id = channel.tx_ids[b];
        if (is_fixed[b]) {
            bf.tx[id] = fixed_tx.at(id);  // kept bit-identical
        } else {
            bf.tx[id] = random_unit_vector(rng::derive(opts.init_seed, rng::tag("tx-init"), key_tag,
                                                       static_cast<std::uint64_t>(id)),
                                           channel.tx_dims[b]);
        }
    }
    for (std::size_t a = 0; a < n_rx; ++a) bf.rx[channel.rx_ids[a]] = first_axis(channel.rx_dims[a]);

    LeakageTrace trace;
    trace.leakage.push_back(leakage(channel, bf));
    if (trace.leakage.back() <= opts.tolerance) {
        trace.converged = true;
        return {std::move(bf), std::move(trace)};
    }

    for (int iter = 1; iter <= opts.max_iterations; ++iter) {
        // RX filters: smallest eigenvector of the received interference covariance.
        for (std::size_t a = 0; a < n_rx; ++a) {
            const int rx_id = channel.rx_ids[a];
            Eigen::MatrixXcd cov = Eigen::MatrixXcd::Zero(channel.rx_dims[a], channel.rx_dims[a]);
            for (std::size_t b = 0; b < n_tx; ++b) {
                if (channel.tx_ids[b] == rx_id) continue;
                const Eigen::VectorXcd received = channel.blocks[a][b] * bf.tx[channel.tx_ids[b]];
                cov.noalias() += received * received.adjoint();
            }
            bf.rx[rx_id] = linalg::eig_min(cov);
        }
        // Free TX beamformers: smallest eigenvector of the caused interference.
        for (std::size_t b = 0; b < n_tx; ++b) {
            if (is_fixed[b]) continue;
            const int tx_id = channel.tx_ids[b];
            Eigen::MatrixXcd cov = Eigen::MatrixXcd::Zero(channel.tx_dims[b], channel.tx_dims[b]);
            for (std::size_t a = 0; a < n_rx; ++a) {
                if (channel.rx_ids[a] == tx_id) continue;
                const Eigen::RowVectorXcd sensed = bf.rx[channel.rx_ids[a]].adjoint() * channel.blocks[a][b];
                cov.noalias() += sensed.adjoint() * sensed;
            }
            bf.tx[tx_id] = linalg::eig_min(cov);
        }

        trace.leakage.push_back(leakage(channel, bf));
        trace.iterations_used = iter;
        if (trace.leakage.back() <= opts.tolerance) {
            trace.converged = true;
            break;
        }
    }
    return {std::move(bf), std::move(trace)};
}

namespace {

/// Shared engine behind distributed_precode and replica_beamformers: solves
/// the sub-ICs of the requested TXs bottom-up (smaller masks first), freezing
/// every already-finalized beamformer of the enclosing sub-IC. TXs with the
/// same mask are solved jointly in one cached solve.
struct AllocationRecursion {
    const AntennaConfig& cfg;
    const CsitAllocation& alloc;
    const ChannelMatrix& channel;  // working channel, values possibly masked
    SolverOptions opts;

    std::map<int, Eigen::VectorXcd> finalized;
    std::vector<SolveLog> logs;
    bool converged = true;

    SubIC eff(int j) const { return alloc.mask_of(j).effective_sets(cfg.users()); }

    void run(std::vector<int> targets) {
        std::sort(targets.begin(), targets.end(), [&](int a, int b) {
            const SubIC sa = eff(a), sb = eff(b);
            const std::size_t za = sa.rx.size() + sa.tx.size(), zb = sb.rx.size() + sb.tx.size();
            return za != zb ? za < zb : a < b;
        });
        std::unordered_set<std::string> solved;
        for (int j : targets) {
            if (finalized.count(j)) continue;
            const SubIC sub = eff(j);
            if (sub.empty()) {
                // No CSIT: nothing to align against, canonical first-axis beamformer.
                finalized[j] = first_axis(cfg.tx_antennas(j));
                continue;
            }
            if (!sub.tx_contains(j))
                throw UsageError("CSIT mask of TX " + std::to_string(j) + " does not cover the TX itself");
            if (!solved.insert(sub.key()).second)
                throw std::logic_error("sub-IC solved twice despite finalization");

            std::map<int, Eigen::VectorXcd> frozen;
            for (int k : sub.tx)
                if (auto it = finalized.find(k); it != finalized.end()) frozen.emplace(k, it->second);

            auto [bf, trace] = min_leakage_solve(SubChannel::restriction(channel, sub), frozen, opts);
            converged = converged && trace.converged;
            logs.push_back({sub, std::move(trace)});

            // Everything solved jointly in this sub-IC whose own mask equals it
            // is now final; TX j is always among them.
            for (int k : sub.tx)
                if (!finalized.count(k) && eff(k) == sub) finalized[k] = bf.tx.at(k);
            if (!finalized.count(j)) throw std::logic_error("recursion failed to finalize its own TX");
        }
    }
};

ChannelMatrix apply_mask(const ChannelMatrix& channel, const CsitMask& mask) {
    const AntennaConfig& cfg = channel.config;
    ChannelMatrix out{Eigen::MatrixXcd::Zero(cfg.rx_total(), cfg.tx_total()), cfg, channel.seed};
    const SubIC known = mask.effective_sets(cfg.users());
    for (int x : known.rx)
        for (int y : known.tx)
            if (x != y)
                out.h.block(cfg.rx_offset(x), cfg.tx_offset(y), cfg.rx_antennas(x), cfg.tx_antennas(y)) =
                    channel.block(x, y);
    return out;
}

void validate_allocation(const AntennaConfig& cfg, const CsitAllocation& alloc) {
    if (static_cast<int>(alloc.masks.size()) != cfg.users())
        throw UsageError("allocation must hold one mask per TX");
    for (int j = 1; j <= cfg.users(); ++j) {
        if (alloc.mask_of(j).owner_tx != j) throw UsageError("allocation masks out of order");
        const SubIC sub = alloc.mask_of(j).effective_sets(cfg.users());
        if (!sub.empty() && (sub.rx.back() > cfg.users() || sub.tx.back() > cfg.users()))
            throw UsageError("mask indices exceed the user count");
    }
}

}  // namespace

PrecodeResult distributed_precode(const AntennaConfig& config, const CsitAllocation& alloc,
                                  const RemovalPlan* plan, const ChannelMatrix& channel,
                                  const SolverOptions& opts) {
    if (channel.config != config) throw UsageError("channel was drawn for a different configuration");
    const bool reduce = plan != nullptr && !(plan->reduced_config == config);

    std::optional<ReducedChannel> reduced;
    if (reduce) reduced = reduce_channel(channel, *plan);
    const AntennaConfig& work_cfg = reduce ? plan->reduced_config : config;
    const ChannelMatrix& work_channel = reduce ? reduced->channel : channel;
    validate_allocation(work_cfg, alloc);

    AllocationRecursion recursion{work_cfg, alloc, work_channel, opts, {}, {}, true};
    std::vector<int> all(static_cast<std::size_t>(work_cfg.users()));
    std::iota(all.begin(), all.end(), 1);
    recursion.run(all);

    PrecodeResult result;
    for (int j = 1; j <= config.users(); ++j) {
        const Eigen::VectorXcd& t = recursion.finalized.at(j);
        result.beamformers.tx[j] =
            reduce ? (reduced->tx_bases[static_cast<std::size_t>(j - 1)] * t).eval() : t;
    }
    result.beamformers.rx = rx_filters(channel, result.beamformers.tx);
    result.converged = recursion.converged;
    result.residual_leakage = leakage(channel, result.beamformers);
    result.solves = std::move(recursion.logs);
    return result;
}

std::map<int, Eigen::VectorXcd> replica_beamformers(const AntennaConfig& config,
                                                    const CsitAllocation& alloc,
                                                    const RemovalPlan* plan,
                                                    const ChannelMatrix& channel,
                                                    const SolverOptions& opts, int at_tx) {
    if (at_tx < 1 || at_tx > config.users()) throw UsageError("TX index out of range");
    if (channel.config != config) throw UsageError("channel was drawn for a different configuration");
    const bool reduce = plan != nullptr && !(plan->reduced_config == config);

    std::optional<ReducedChannel> reduced;
    if (reduce) reduced = reduce_channel(channel, *plan);
    const AntennaConfig& work_cfg = reduce ? plan->reduced_config : config;
    const ChannelMatrix& work_channel = reduce ? reduced->channel : channel;
    validate_allocation(work_cfg, alloc);

    // TX at_tx sees only the coefficients its own mask covers.
    const ChannelMatrix local_view = apply_mask(work_channel, alloc.mask_of(at_tx));

    const SubIC own = alloc.mask_of(at_tx).effective_sets(work_cfg.users());
    std::vector<int> targets;
    for (int k = 1; k <= work_cfg.users(); ++k) {
        const SubIC other = alloc.mask_of(k).effective_sets(work_cfg.users());
        if (k == at_tx || subic_inside(other, own)) targets.push_back(k);
    }

    AllocationRecursion recursion{work_cfg, alloc, local_view, opts, {}, {}, true};
    recursion.run(targets);
    return std::move(recursion.finalized);
}

std::map<int, Eigen::VectorXcd> rx_filters(const ChannelMatrix& channel,
                                           const std::map<int, Eigen::VectorXcd>& tx) {
    const AntennaConfig& cfg = channel.config;
    if (static_cast<int>(tx.size()) != cfg.users())
        throw UsageError("rx_filters needs every TX beamformer");
    std::map<int, Eigen::VectorXcd> out;
    for (int i = 1; i <= cfg.users(); ++i) {
        Eigen::MatrixXcd cov = Eigen::MatrixXcd::Zero(cfg.rx_antennas(i), cfg.rx_antennas(i));
        for (const auto& [j, t] : tx) {
            if (j == i) continue;
            if (t.size() != cfg.tx_antennas(j)) throw UsageError("beamformer dimension mismatch");
            const Eigen::VectorXcd received = channel.block(i, j) * t;
            cov.noalias() += received * received.adjoint();
        }
        out[i] = linalg::eig_min(cov);
    }
    return out;
}

std::vector<double> user_rates(const ChannelMatrix& channel, const BeamformerSet& beamformers,
                               double power) {
    const AntennaConfig& cfg = channel.config;
    if (power < 0) throw UsageError("transmit power must be non-negative");
    std::vector<double> rates;
    for (int i = 1; i <= cfg.users(); ++i) {
        const Eigen::VectorXcd& g = beamformers.rx.at(i);
        double interference = 0;
        for (int j = 1; j <= cfg.users(); ++j) {
            if (j == i) continue;
            interference += std::norm((g.adjoint() * channel.block(i, j) * beamformers.tx.at(j)).value());
        }
        const double signal = std::norm((g.adjoint() * channel.block(i, i) * beamformers.tx.at(i)).value());
        rates.push_back(std::log2(1.0 + power * signal / (1.0 + power * interference)));
    }
    return rates;
}

}  // namespace ia
