#pragma once

#include <span>

#include "gfsim/tx.hpp"
#include "gfsim/types.hpp"

namespace gfsim {

enum class ChannelMode { Flat, PerBlock };

/// Per-UE gain matrices, n_rx x (w + 1): columns 0..w-1 are the pilot
/// blocks, column w the data block.
struct ChannelRealization {
    ChannelMode mode = ChannelMode::Flat;
    std::vector<CMatrix> gains;
};

/// Received grid; every block is REs x antennas.
struct RxGrid {
    std::vector<CMatrix> pilot_blocks;
    CMatrix data_block;
    double noise_var = 0.0; ///< E|n|^2 per element

    [[nodiscard]] int n_rx() const { return static_cast<int>(data_block.cols()); }
    [[nodiscard]] int w() const { return static_cast<int>(pilot_blocks.size()); }
    /// Block b in [0, w]; b == w is the data block.
    [[nodiscard]] CMatrix& block(int b) { return b == w() ? data_block : pilot_blocks[static_cast<std::size_t>(b)]; }
    [[nodiscard]] const CMatrix& block(int b) const {
        return b == w() ? data_block : pilot_blocks[static_cast<std::size_t>(b)];
    }
    [[nodiscard]] double energy() const;
};

/// Circular complex Gaussian with E|x|^2 = variance.
cplx complex_gaussian(Rng& rng, double variance);

ChannelRealization draw_channel(int n_ue, const ResourceConfig& config, ChannelMode mode, Rng& rng);

double noise_variance_for_snr(double snr_db);

/// Superposition of every UE through its gains plus AWGN with variance
/// 10^(-snr_db/10) (unit data symbol power). snr_db = +inf gives a noiseless grid.
RxGrid apply_channel(std::span<const UeTransmission> transmissions, const ChannelRealization& realization,
                     const ResourceConfig& config, double snr_db, Rng& rng);

/// Empty (all-zero) grid shaped by the config.
RxGrid make_empty_grid(const ResourceConfig& config, double noise_var);

} // namespace gfsim
