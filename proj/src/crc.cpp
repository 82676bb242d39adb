#include <stdexcept>

#include "gfsim/codec.hpp"

namespace gfsim::codec {

std::uint16_t crc16(std::span<const std::uint8_t> bits) {
    std::uint16_t reg = 0xFFFF;
    for (auto b : bits) {
        const bool feedback = ((reg >> 15) & 1U) != (b & 1U);
        reg = static_cast<std::uint16_t>(reg << 1);
        if (feedback) reg ^= 0x1021;
    }
    return reg;
}

Bits crc16_attach(std::span<const std::uint8_t> bits) {
    if (bits.empty()) throw std::invalid_argument("crc16_attach: empty input");
    Bits out(bits.begin(), bits.end());
    const auto crc = crc16(bits);
    for (int i = 15; i >= 0; --i) out.push_back(static_cast<std::uint8_t>((crc >> i) & 1U));
    return out;
}

bool crc16_check(std::span<const std::uint8_t> bits_with_crc) {
    if (bits_with_crc.size() <= kCrcBits) throw std::invalid_argument("crc16_check: need more than 16 bits");
    const auto data = bits_with_crc.first(bits_with_crc.size() - kCrcBits);
    const auto crc = crc16(data);
    const auto tail = bits_with_crc.last(kCrcBits);
    for (std::size_t i = 0; i < kCrcBits; ++i)
        if (((crc >> (15 - i)) & 1U) != (tail[i] & 1U)) return false;
    return true;
}

} // namespace gfsim::codec
