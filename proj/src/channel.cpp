#include "ia/channel.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cassert>

#include "ia/linalg.hpp"
#include "ia/rng.hpp"

namespace ia {

Eigen::MatrixXcd ChannelMatrix::block(int rx, int tx) const {
    return h.block(config.rx_offset(rx), config.tx_offset(tx), config.rx_antennas(rx),
                   config.tx_antennas(tx));
}

ChannelMatrix draw_channel(const AntennaConfig& config, std::uint64_t seed) {
    Eigen::MatrixXcd h(config.rx_total(), config.tx_total());
    for (int i = 1; i <= config.users(); ++i) {
        for (int j = 1; j <= config.users(); ++j) {
            rng::Stream stream(rng::derive(seed, rng::tag("channel-block"), i, j));
            for (int r = 0; r < config.rx_antennas(i); ++r)
                for (int c = 0; c < config.tx_antennas(j); ++c)
                    h(config.rx_offset(i) + r, config.tx_offset(j) + c) = stream.next_cnormal();
        }
    }
    return {std::move(h), config, seed};
}

SubspaceBasis max_power_subspace(const Eigen::MatrixXcd& a, int n) {
    if (n < 1 || n >= a.cols()) throw UsageError("subspace dimension out of range");
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinU | Eigen::ComputeFullV);
    Eigen::MatrixXcd basis = svd.matrixV().leftCols(n);
    for (int c = 0; c < n; ++c) linalg::canonicalize_phase(basis.col(c));
    return {std::move(basis), static_cast<int>(a.cols()), n};
}

ReducedChannel reduce_channel(const ChannelMatrix& full, const RemovalPlan& plan) {
    const AntennaConfig& from = full.config;
    const AntennaConfig& to = plan.reduced_config;
    if (from.users() != to.users()) throw UsageError("removal plan does not match the channel");

    ReducedChannel out{{Eigen::MatrixXcd(to.rx_total(), to.tx_total()), to, full.seed}, {}, {}};
    for (int u = 1; u <= from.users(); ++u) {
        const Eigen::MatrixXcd direct = full.block(u, u);
        const int keep_rx = to.rx_antennas(u);
        const int keep_tx = to.tx_antennas(u);
        // RX side: left singular vectors of H_uu = right singular vectors of H_uu^H.
        out.rx_bases.push_back(keep_rx == from.rx_antennas(u)
                                   ? Eigen::MatrixXcd::Identity(keep_rx, keep_rx)
                                   : max_power_subspace(direct.adjoint(), keep_rx).columns);
        out.tx_bases.push_back(keep_tx == from.tx_antennas(u)
                                   ? Eigen::MatrixXcd::Identity(keep_tx, keep_tx)
                                   : max_power_subspace(direct, keep_tx).columns);
    }

    for (int i = 1; i <= to.users(); ++i) {
        for (int j = 1; j <= to.users(); ++j) {
            out.channel.h.block(to.rx_offset(i), to.tx_offset(j), to.rx_antennas(i),
                                to.tx_antennas(j)) =
                out.rx_bases[static_cast<std::size_t>(i - 1)].adjoint() * full.block(i, j) *
                out.tx_bases[static_cast<std::size_t>(j - 1)];
        }
    }
    return out;
}

}  // namespace ia
