#pragma once

#include <span>

#include "gfsim/pilots.hpp"
#include "gfsim/types.hpp"

namespace gfsim {

struct ResourceConfig {
    int n_pilot_re = 24;
    int n_data_re = 720;
    int n_rx = 2;
    PilotLayout layout = make_tsp_layout(24);
    double pilot_boost_db = 0.0;
    int transport_block_size = 160;

    [[nodiscard]] int n_info_bits() const;  // transport block + CRC
    [[nodiscard]] int n_coded_bits() const { return 2 * n_data_re; }
    [[nodiscard]] double pilot_power() const; // linear per-element pilot power
    [[nodiscard]] int block_length() const { return layout.pool_size; }

    /// Throws std::invalid_argument when the fields are inconsistent.
    void validate() const;
};

struct UeTransmission {
    int ue_id = 0;
    Bits payload;
    Bits codeword;
    PilotSelection pilot_selection;
    std::vector<CVector> pilot_symbols; ///< one block per pilot position
    CVector data_symbols;
};

/// Reads the first w*m codeword bits, MSB first per index, and maps each
/// value v to v mod pool_size.
PilotSelection select_pilots_from_codeword(std::span<const std::uint8_t> codeword, const PilotLayout& layout);

UeTransmission build_ue_transmission(int ue_id, std::span<const std::uint8_t> payload, const ResourceConfig& config,
                                     const PilotPool& pool);

Bits random_payload(int n_bits, Rng& rng);

} // namespace gfsim
