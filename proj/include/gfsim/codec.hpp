#pragma once

#include <cstdint>
#include <span>
#include <utility>

#include "gfsim/types.hpp"

namespace gfsim::codec {

inline constexpr std::size_t kCrcBits = 16;
inline constexpr double kLlrClip = 30.0;

// Convolutional mother code: K=7, zero tail, generators 133/171 (octal)
// extended by up to six more for rates down to 1/8.
inline constexpr int kConstraintLength = 7;
inline constexpr std::size_t kTailBits = kConstraintLength - 1;
inline constexpr std::size_t kMaxMotherStreams = 8;

/// CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF, no reflection, no final xor)
/// over a bit sequence, MSB-first.
std::uint16_t crc16(std::span<const std::uint8_t> bits);

Bits crc16_attach(std::span<const std::uint8_t> bits);
bool crc16_check(std::span<const std::uint8_t> bits_with_crc);

/// Generator streams used for a given code size: ceil(n_coded / (n_info + 6)),
/// clamped to [2, 8].
std::size_t mother_streams(std::size_t n_info_bits, std::size_t n_coded_bits);

/// Length of the mother codeword (all generator streams incl. tail).
std::size_t mother_length(std::size_t n_info_bits, std::size_t n_coded_bits);

/// Encodes and rate-matches to exactly `n_coded_bits`.
///
/// The mother rate follows the target size, so repetition only happens
/// beyond rate 1/8. The mother codeword is laid out stream by stream (all
/// outputs of the first generator, then the second, ...), so the codeword
/// prefix consists of independent bits whenever the information bits are.
/// Longer outputs repeat the mother codeword circularly; shorter ones keep
/// an evenly spaced subset of its positions.
Bits fec_encode(std::span<const std::uint8_t> info_bits, std::size_t n_coded_bits);

struct FecDecodeResult {
    Bits bits; ///< hard decisions on the information bits (CRC included)
    bool crc_ok = false;
};

/// Soft-input Viterbi decoding. LLR convention everywhere: positive means
/// bit 0 is more likely. Repeated positions are combined before decoding.
FecDecodeResult fec_decode(std::span<const double> llrs, std::size_t n_info_bits);

/// Gray QPSK, (b0,b1) -> ((1-2b0) + j(1-2b1)) / sqrt(2).
std::vector<cplx> qpsk_modulate(std::span<const std::uint8_t> bits);

/// Gaussian-approximation demapper for `soft = gain * s + n`, E|n|^2 = noise_var.
/// Output clipped to +-kLlrClip.
std::pair<double, double> qpsk_llr(cplx soft_symbol, double effective_gain, double noise_var);

} // namespace gfsim::codec
