#include "doctest.h"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "gfsim/channel.hpp"

using namespace gfsim;

namespace {

ResourceConfig imp2() {
    ResourceConfig c;
    c.layout = make_imp_layout(24, 2);
    return c;
}

} // namespace

TEST_CASE("complex Gaussian moments") {
    Rng rng(20);
    const int n = 200000;
    double power = 0.0, re2 = 0.0;
    cplx mean = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto x = complex_gaussian(rng, 2.0);
        power += std::norm(x);
        re2 += x.real() * x.real();
        mean += x;
    }
    CHECK(power / n == doctest::Approx(2.0).epsilon(0.02));
    CHECK(re2 / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(std::abs(mean / double(n)) < 0.02);
}

TEST_CASE("channel gain shapes and fading modes") {
    const auto cfg = imp2();
    Rng rng(21);
    const auto flat = draw_channel(3, cfg, ChannelMode::Flat, rng);
    REQUIRE(flat.gains.size() == 3);
    for (const auto& g : flat.gains) {
        CHECK(g.rows() == 2);
        CHECK(g.cols() == 3);
        for (int b = 1; b < 3; ++b) CHECK((g.col(b) - g.col(0)).norm() == 0.0);
    }
    const auto blocks = draw_channel(2, cfg, ChannelMode::PerBlock, rng);
    for (const auto& g : blocks.gains) CHECK((g.col(1) - g.col(0)).norm() > 0.0);
    CHECK(draw_channel(0, cfg, ChannelMode::Flat, rng).gains.empty());
    CHECK_THROWS_AS(draw_channel(-1, cfg, ChannelMode::Flat, rng), std::invalid_argument);

    double power = 0.0;
    int n = 0;
    for (int t = 0; t < 20000; ++t)
        for (const auto& g : draw_channel(1, cfg, ChannelMode::PerBlock, rng).gains) {
            power += g.cwiseAbs2().sum();
            n += static_cast<int>(g.size());
        }
    CHECK(power / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("noise-only grid has the configured variance") {
    const auto cfg = imp2();
    Rng rng(22);
    const auto grid = apply_channel({}, ChannelRealization{}, cfg, 7.0, rng);
    CHECK(grid.noise_var == doctest::Approx(std::pow(10.0, -0.7)));
    CHECK(grid.w() == 2);
    CHECK(grid.n_rx() == 2);
    const double elems = 2.0 * (12 + 12 + 720);
    CHECK(grid.energy() / elems == doctest::Approx(grid.noise_var).epsilon(0.1));
    CHECK(noise_variance_for_snr(0.0) == 1.0);
    CHECK(noise_variance_for_snr(20.0) == doctest::Approx(0.01));
}

TEST_CASE("noiseless grid is the exact superposition") {
    const auto cfg = imp2();
    const auto pool = make_pilot_pool(12);
    Rng rng(23);
    std::vector<UeTransmission> txs;
    for (int k = 0; k < 3; ++k) txs.push_back(build_ue_transmission(k, random_payload(160, rng), cfg, pool));
    const auto real = draw_channel(3, cfg, ChannelMode::PerBlock, rng);
    const auto grid = apply_channel(txs, real, cfg, std::numeric_limits<double>::infinity(), rng);
    CHECK(grid.noise_var == 0.0);

    CMatrix data = CMatrix::Zero(720, 2);
    for (int k = 0; k < 3; ++k)
        for (int a = 0; a < 2; ++a) data.col(a) += txs[static_cast<std::size_t>(k)].data_symbols * real.gains[static_cast<std::size_t>(k)](a, 2);
    CHECK((grid.data_block - data).norm() < 1e-10);
    for (int b = 0; b < 2; ++b) {
        CMatrix pilots = CMatrix::Zero(12, 2);
        for (int k = 0; k < 3; ++k)
            for (int a = 0; a < 2; ++a)
                pilots.col(a) += txs[static_cast<std::size_t>(k)].pilot_symbols[static_cast<std::size_t>(b)] * real.gains[static_cast<std::size_t>(k)](a, b);
        CHECK((grid.pilot_blocks[static_cast<std::size_t>(b)] - pilots).norm() < 1e-10);
    }
}

TEST_CASE("average receive SNR matches the setting") {
    const auto cfg = imp2();
    const auto pool = make_pilot_pool(12);
    Rng rng(24);
    const double snr_db = 10.0;
    double signal = 0.0, noise = 0.0;
    const auto tx = build_ue_transmission(0, random_payload(160, rng), cfg, pool);
    const std::vector<UeTransmission> txs = {tx};
    for (int t = 0; t < 4000; ++t) {
        const auto real = draw_channel(1, cfg, ChannelMode::Flat, rng);
        const auto noisy = apply_channel(txs, real, cfg, snr_db, rng);
        const auto clean = apply_channel(txs, real, cfg, std::numeric_limits<double>::infinity(), rng);
        signal += clean.data_block.squaredNorm();
        noise += (noisy.data_block - clean.data_block).squaredNorm();
    }
    CHECK(std::abs(10.0 * std::log10(signal / noise) - snr_db) < 0.1);
}

TEST_CASE("channel error paths") {
    const auto cfg = imp2();
    const auto pool = make_pilot_pool(12);
    Rng rng(25);
    const std::vector<UeTransmission> txs = {build_ue_transmission(0, random_payload(160, rng), cfg, pool)};
    CHECK_THROWS_AS(apply_channel(txs, ChannelRealization{}, cfg, 0.0, rng), std::invalid_argument);
    auto real = draw_channel(1, cfg, ChannelMode::Flat, rng);
    real.gains[0] = CMatrix::Ones(2, 2);
    CHECK_THROWS_AS(apply_channel(txs, real, cfg, 0.0, rng), std::invalid_argument);
    auto wrong = cfg;
    wrong.layout = make_imp_layout(24, 3);
    CHECK_THROWS_AS(apply_channel(txs, draw_channel(1, wrong, ChannelMode::Flat, rng), wrong, 0.0, rng),
                    std::invalid_argument);
}
