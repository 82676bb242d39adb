#include <algorithm>
#include <array>
#include <bit>
#include <limits>
#include <stdexcept>

#include "gfsim/codec.hpp"

namespace gfsim::codec {

namespace {

// Nested K=7 generator family: the first two form the 133/171 code, each
// further entry lowers the mother rate by one step down to 1/8.
constexpr std::array<unsigned, kMaxMotherStreams> kPolys = {0133, 0171, 0165, 0117, 0127, 0155, 0135, 0147};
constexpr int kStates = 1 << (kConstraintLength - 1);

// Register layout: bit 6 is the current input, bit 0 the oldest.
struct OutputTable {
    // bit s of out[reg] is the output of generator s
    std::array<std::uint8_t, 2 * kStates> out{};
    constexpr OutputTable() {
        for (unsigned reg = 0; reg < 2 * kStates; ++reg)
            for (std::size_t s = 0; s < kPolys.size(); ++s)
                out[reg] |= static_cast<std::uint8_t>((std::popcount(reg & kPolys[s]) & 1) << s);
    }
};
constexpr OutputTable kOut{};

std::size_t rate_match_position(std::size_t i, std::size_t n_coded, std::size_t mother) {
    if (n_coded >= mother) return i % mother;
    return (i * mother) / n_coded;
}

} // namespace

std::size_t mother_streams(std::size_t n_info_bits, std::size_t n_coded_bits) {
    const std::size_t steps = n_info_bits + kTailBits;
    const std::size_t wanted = (n_coded_bits + steps - 1) / steps;
    return std::clamp<std::size_t>(wanted, 2, kMaxMotherStreams);
}

std::size_t mother_length(std::size_t n_info_bits, std::size_t n_coded_bits) {
    return mother_streams(n_info_bits, n_coded_bits) * (n_info_bits + kTailBits);
}

Bits fec_encode(std::span<const std::uint8_t> info_bits, std::size_t n_coded_bits) {
    if (info_bits.empty()) throw std::invalid_argument("fec_encode: empty input");
    if (n_coded_bits < info_bits.size())
        throw std::invalid_argument("fec_encode: n_coded_bits below information length (rate > 1)");

    const std::size_t steps = info_bits.size() + kTailBits;
    const std::size_t streams = mother_streams(info_bits.size(), n_coded_bits);
    Bits mother(streams * steps);
    unsigned state = 0;
    for (std::size_t t = 0; t < steps; ++t) {
        const unsigned u = t < info_bits.size() ? (info_bits[t] & 1U) : 0U;
        const unsigned reg = (u << (kConstraintLength - 1)) | state;
        for (std::size_t s = 0; s < streams; ++s) mother[s * steps + t] = (kOut.out[reg] >> s) & 1U;
        state = reg >> 1;
    }

    Bits coded(n_coded_bits);
    for (std::size_t i = 0; i < n_coded_bits; ++i) coded[i] = mother[rate_match_position(i, n_coded_bits, mother.size())];
    return coded;
}

FecDecodeResult fec_decode(std::span<const double> llrs, std::size_t n_info_bits) {
    if (n_info_bits == 0) throw std::invalid_argument("fec_decode: n_info_bits must be positive");
    if (llrs.size() < n_info_bits) throw std::invalid_argument("fec_decode: fewer LLRs than information bits");

    const std::size_t steps = n_info_bits + kTailBits;
    const std::size_t streams = mother_streams(n_info_bits, llrs.size());
    const std::size_t m_len = streams * steps;
    std::vector<double> combined(m_len, 0.0);
    for (std::size_t i = 0; i < llrs.size(); ++i) combined[rate_match_position(i, llrs.size(), m_len)] += llrs[i];

    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    std::array<double, kStates> metric;
    std::array<double, kStates> next;
    metric.fill(kNegInf);
    metric[0] = 0.0;
    std::vector<std::uint64_t> decisions(steps, 0);

    std::array<double, kMaxMotherStreams> step_llr{};
    // branch metric of each output pattern, indexed by the generator bits
    std::vector<double> pattern(std::size_t{1} << streams);
    for (std::size_t t = 0; t < steps; ++t) {
        for (std::size_t s = 0; s < streams; ++s) step_llr[s] = combined[s * steps + t];
        pattern[0] = 0.0;
        for (std::size_t s = 0; s < streams; ++s) pattern[0] += step_llr[s];
        for (std::size_t p = 1; p < pattern.size(); ++p) {
            const auto low = static_cast<std::size_t>(std::countr_zero(p));
            pattern[p] = pattern[p & (p - 1)] - 2.0 * step_llr[low];
        }
        const unsigned mask = static_cast<unsigned>(pattern.size() - 1);
        for (unsigned ns = 0; ns < kStates; ++ns) {
            const unsigned u = ns >> (kConstraintLength - 2);
            const unsigned base = (ns & (kStates / 2 - 1)) << 1;
            const unsigned reg0 = (u << (kConstraintLength - 1)) | base;
            const unsigned reg1 = reg0 | 1U;
            const double m0 = metric[base] + pattern[kOut.out[reg0] & mask];
            const double m1 = metric[base | 1U] + pattern[kOut.out[reg1] & mask];
            if (m1 > m0) {
                next[ns] = m1;
                decisions[t] |= std::uint64_t{1} << ns;
            } else {
                next[ns] = m0;
            }
        }
        metric = next;
    }

    // zero tail: the survivor ending in state 0 is the decoded path
    FecDecodeResult out;
    out.bits.resize(n_info_bits);
    unsigned state = 0;
    for (std::size_t t = steps; t-- > 0;) {
        const unsigned u = state >> (kConstraintLength - 2);
        if (t < n_info_bits) out.bits[t] = static_cast<std::uint8_t>(u);
        const unsigned x = static_cast<unsigned>((decisions[t] >> state) & 1U);
        state = ((state & (kStates / 2 - 1)) << 1) | x;
    }
    out.crc_ok = n_info_bits > kCrcBits && crc16_check(out.bits);
    return out;
}

} // namespace gfsim::codec
