#include "gfsim/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace gfsim {

double RxGrid::energy() const {
    double e = data_block.squaredNorm();
    for (const auto& b : pilot_blocks) e += b.squaredNorm();
    return e;
}

cplx complex_gaussian(Rng& rng, double variance) {
    std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
    const double re = normal(rng);
    const double im = normal(rng);
    return {re, im};
}

ChannelRealization draw_channel(int n_ue, const ResourceConfig& config, ChannelMode mode, Rng& rng) {
    if (n_ue < 0) throw std::invalid_argument("draw_channel: negative UE count");
    const int n_blocks = config.layout.w + 1;
    ChannelRealization out;
    out.mode = mode;
    out.gains.reserve(static_cast<std::size_t>(n_ue));
    for (int k = 0; k < n_ue; ++k) {
        CMatrix g(config.n_rx, n_blocks);
        for (int a = 0; a < config.n_rx; ++a) {
            if (mode == ChannelMode::Flat) {
                g.row(a).setConstant(complex_gaussian(rng, 1.0));
            } else {
                for (int b = 0; b < n_blocks; ++b) g(a, b) = complex_gaussian(rng, 1.0);
            }
        }
        out.gains.push_back(std::move(g));
    }
    return out;
}

double noise_variance_for_snr(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

RxGrid make_empty_grid(const ResourceConfig& config, double noise_var) {
    RxGrid grid;
    grid.pilot_blocks.assign(static_cast<std::size_t>(config.layout.w), CMatrix::Zero(config.block_length(), config.n_rx));
    grid.data_block = CMatrix::Zero(config.n_data_re, config.n_rx);
    grid.noise_var = noise_var;
    return grid;
}

RxGrid apply_channel(std::span<const UeTransmission> transmissions, const ChannelRealization& realization,
                     const ResourceConfig& config, double snr_db, Rng& rng) {
    if (realization.gains.size() < transmissions.size())
        throw std::invalid_argument("apply_channel: realization does not cover every UE");
    const int w = config.layout.w;
    RxGrid grid = make_empty_grid(config, noise_variance_for_snr(snr_db));

    for (std::size_t k = 0; k < transmissions.size(); ++k) {
        const auto& tx = transmissions[k];
        const auto& g = realization.gains[k];
        if (g.rows() != config.n_rx || g.cols() != w + 1) throw std::invalid_argument("apply_channel: gain shape");
        if (static_cast<int>(tx.pilot_symbols.size()) != w || tx.data_symbols.size() != config.n_data_re)
            throw std::invalid_argument("apply_channel: transmission shape does not match the config");
        for (int b = 0; b < w; ++b) {
            const auto& z = tx.pilot_symbols[static_cast<std::size_t>(b)];
            if (z.size() != config.block_length()) throw std::invalid_argument("apply_channel: pilot block length");
            grid.pilot_blocks[static_cast<std::size_t>(b)].noalias() += z * g.col(b).transpose();
        }
        grid.data_block.noalias() += tx.data_symbols * g.col(w).transpose();
    }

    if (grid.noise_var > 0.0) {
        std::normal_distribution<double> normal(0.0, std::sqrt(grid.noise_var / 2.0));
        for (int b = 0; b <= w; ++b) {
            auto& blk = grid.block(b);
            for (Eigen::Index c = 0; c < blk.cols(); ++c) {
                for (Eigen::Index r = 0; r < blk.rows(); ++r) {
                    const double re = normal(rng);
                    const double im = normal(rng);
                    blk(r, c) += cplx{re, im};
                }
            }
        }
    }
    return grid;
}

} // namespace gfsim
