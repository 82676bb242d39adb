#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gfsim/codec.hpp"

namespace gfsim::codec {

std::vector<cplx> qpsk_modulate(std::span<const std::uint8_t> bits) {
    if (bits.size() % 2 != 0) throw std::invalid_argument("qpsk_modulate: odd number of bits");
    constexpr double a = std::numbers::sqrt2 / 2.0;
    std::vector<cplx> symbols(bits.size() / 2);
    for (std::size_t k = 0; k < symbols.size(); ++k)
        symbols[k] = {(bits[2 * k] & 1U) ? -a : a, (bits[2 * k + 1] & 1U) ? -a : a};
    return symbols;
}

std::pair<double, double> qpsk_llr(cplx soft_symbol, double effective_gain, double noise_var) {
    if (!(noise_var > 0.0)) throw std::invalid_argument("qpsk_llr: noise variance must be positive");
    const double scale = 2.0 * std::numbers::sqrt2 * effective_gain / noise_var;
    auto clip = [](double v) { return std::clamp(v, -kLlrClip, kLlrClip); };
    return {clip(scale * soft_symbol.real()), clip(scale * soft_symbol.imag())};
}

} // namespace gfsim::codec
