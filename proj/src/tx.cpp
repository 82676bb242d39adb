#include "gfsim/tx.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gfsim/codec.hpp"

namespace gfsim {

int ResourceConfig::n_info_bits() const { return transport_block_size + static_cast<int>(codec::kCrcBits); }

double ResourceConfig::pilot_power() const { return std::pow(10.0, pilot_boost_db / 10.0); }

void ResourceConfig::validate() const {
    if (n_pilot_re < 1 || n_data_re < 1 || n_rx < 1) throw std::invalid_argument("resource sizes must be positive");
    if (transport_block_size < 1) throw std::invalid_argument("transport block size must be positive");
    if (layout.total_pilot_re != n_pilot_re)
        throw std::invalid_argument("layout covers " + std::to_string(layout.total_pilot_re) + " pilot REs, config has " +
                                    std::to_string(n_pilot_re));
    if (layout.pool_size * layout.w != layout.total_pilot_re) throw std::invalid_argument("layout pool/w mismatch");
    if (n_coded_bits() < n_info_bits())
        throw std::invalid_argument("data REs cannot carry the transport block at rate <= 1");
    if (n_coded_bits() < layout.w * layout.bits_per_index)
        throw std::invalid_argument("codeword shorter than the pilot-index prefix");
}

PilotSelection select_pilots_from_codeword(std::span<const std::uint8_t> codeword, const PilotLayout& layout) {
    const auto m = static_cast<std::size_t>(layout.bits_per_index);
    const auto w = static_cast<std::size_t>(layout.w);
    if (codeword.size() < w * m) throw std::invalid_argument("select_pilots_from_codeword: codeword too short");
    PilotSelection sel;
    sel.indices.reserve(w);
    for (std::size_t p = 0; p < w; ++p) {
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < m; ++i) v = (v << 1) | (codeword[p * m + i] & 1U);
        sel.indices.push_back(static_cast<int>(v % static_cast<std::uint64_t>(layout.pool_size)));
    }
    return sel;
}

UeTransmission build_ue_transmission(int ue_id, std::span<const std::uint8_t> payload, const ResourceConfig& config,
                                     const PilotPool& pool) {
    if (static_cast<int>(payload.size()) != config.transport_block_size)
        throw std::invalid_argument("payload length " + std::to_string(payload.size()) + " != transport block size " +
                                    std::to_string(config.transport_block_size));
    if (static_cast<int>(pool.length) != config.layout.pool_size)
        throw std::invalid_argument("pilot pool length does not match the layout pool size");

    UeTransmission tx;
    tx.ue_id = ue_id;
    tx.payload.assign(payload.begin(), payload.end());
    tx.codeword = codec::fec_encode(codec::crc16_attach(payload), static_cast<std::size_t>(config.n_coded_bits()));
    tx.pilot_selection = select_pilots_from_codeword(tx.codeword, config.layout);

    const double amplitude = std::sqrt(config.pilot_power());
    tx.pilot_symbols.reserve(tx.pilot_selection.indices.size());
    for (int idx : tx.pilot_selection.indices)
        tx.pilot_symbols.emplace_back(amplitude * pool.sequence(static_cast<std::size_t>(idx)));

    const auto symbols = codec::qpsk_modulate(tx.codeword);
    tx.data_symbols = Eigen::Map<const CVector>(symbols.data(), static_cast<Eigen::Index>(symbols.size()));
    return tx;
}

Bits random_payload(int n_bits, Rng& rng) {
    Bits bits(static_cast<std::size_t>(n_bits));
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (i % 64 == 0) word = rng();
        bits[i] = static_cast<std::uint8_t>((word >> (i % 64)) & 1U);
    }
    return bits;
}

} // namespace gfsim
