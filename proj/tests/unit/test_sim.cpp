#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include "gfsim/config.hpp"
#include "gfsim/results.hpp"
#include "gfsim/sim.hpp"
#include "oracles.hpp"

using namespace gfsim;

namespace {

SimConfig small_config() {
    SimConfig c = desk_preset();
    c.snr_db_list = {5.0, 15.0};
    c.n_ue_list = {0, 1, 3};
    c.n_drops = 12;
    c.base_seed = 77;
    return c;
}

DropResult fake_drop(int n_ue, int decoded, int attempts, bool collision) {
    DropResult d;
    d.n_ue = n_ue;
    d.ue_decoded.assign(static_cast<std::size_t>(n_ue), false);
    for (int i = 0; i < decoded; ++i) d.ue_decoded[static_cast<std::size_t>(i)] = true;
    d.decode_attempts = attempts;
    d.all_pilot_collision = collision;
    return d;
}

} // namespace

TEST_CASE("desk preset") {
    const auto c = desk_preset();
    CHECK(c.resource.n_pilot_re == 24);
    CHECK(c.resource.n_data_re == 720);
    CHECK(c.resource.n_rx == 2);
    CHECK(c.resource.transport_block_size == 160);
    REQUIRE(c.schemes.size() == 2);
    CHECK(c.schemes[0].scheme == Scheme::Tsp);
    CHECK(c.schemes[1].w == 2);
    CHECK_NOTHROW(c.validate());
    CHECK(c.resource_for(c.schemes[1]).layout.pool_size == 12);
}

TEST_CASE("sim config validation") {
    auto c = desk_preset();
    c.schemes.clear();
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = desk_preset();
    c.snr_db_list.clear();
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = desk_preset();
    c.n_ue_list = {-1};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = desk_preset();
    c.n_drops = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = desk_preset();
    c.rx_options.max_rounds = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("drop seeds differ across every coordinate") {
    const auto tsp = make_tsp_layout(24);
    const auto imp = make_imp_layout(24, 2);
    std::set<std::uint64_t> seeds;
    for (std::uint64_t base : {1ULL, 2ULL})
        for (const auto& l : {tsp, imp})
            for (std::size_t s = 0; s < 3; ++s)
                for (int k : {1, 2, 6})
                    for (std::int64_t d = 0; d < 50; ++d) seeds.insert(drop_seed(base, l, s, k, d));
    CHECK(seeds.size() == 2 * 2 * 3 * 3 * 50);
    CHECK(drop_seed(5, imp, 1, 3, 9) == drop_seed(5, imp, 1, 3, 9));
}

TEST_CASE("drops are deterministic and well formed") {
    const auto c = small_config();
    const auto layout = c.schemes[1];
    const auto a = run_drop(c, layout, 1, 3, 4);
    const auto b = run_drop(c, layout, 1, 3, 4);
    CHECK(a.ue_decoded == b.ue_decoded);
    CHECK(a.decode_attempts == b.decode_attempts);
    CHECK(a.selections == b.selections);
    CHECK(a.n_ue == 3);
    CHECK(a.selections.size() == 3);
    CHECK(a.per_pilot_collision.size() == 2);
    CHECK(a.aud_active + a.aud_inactive == 2 * 12);
    CHECK(a.aud_missed <= a.aud_active);
    CHECK(a.decode_attempts >= a.n_decoded());
    CHECK(run_drop(c, layout, 0, 0, 0).n_ue == 0);
    CHECK_THROWS_AS(run_drop(c, layout, 5, 3, 0), std::invalid_argument);
}

TEST_CASE("aggregation arithmetic") {
    const auto layout = make_imp_layout(24, 2);
    std::vector<DropResult> drops = {fake_drop(4, 4, 5, false), fake_drop(4, 2, 6, true), fake_drop(4, 3, 3, false)};
    drops[0].aud_active = 8;
    drops[0].aud_missed = 1;
    drops[0].aud_inactive = 16;
    drops[0].aud_false_alarms = 2;
    const auto row = aggregate_row(layout, 10.0, 4, drops);
    CHECK(row.scheme == "imp");
    CHECK(row.w == 2);
    CHECK(row.n_drops == 3);
    CHECK(row.bler == doctest::Approx(3.0 / 12.0));
    CHECK(row.bler_ci95 == doctest::Approx(1.96 * std::sqrt(0.25 * 0.75 / 12.0)));
    CHECK(row.avg_attempts_per_ue == doctest::Approx(14.0 / 12.0));
    CHECK(row.collision_rate == doctest::Approx(1.0 / 3.0));
    CHECK(row.miss_rate == doctest::Approx(1.0 / 8.0));
    CHECK(row.false_alarm_rate == doctest::Approx(2.0 / 16.0));
    CHECK(row.error_events == 3);
    CHECK(row.low_confidence());
}

TEST_CASE("campaign output is independent of the thread count") {
    const auto c = small_config();
    const auto one = run_campaign(c, 1);
    const auto four = run_campaign(c, 4);
    REQUIRE(one.size() == 2 * 2 * 2); // K = 0 skipped
    CHECK(format_results(one) == format_results(four));
    CHECK(one[0].scheme == "tsp");
    CHECK(one[0].snr_db == 5.0);
    CHECK(one[0].n_ue == 1);
    CHECK(one[1].n_ue == 3);
    CHECK(one.back().scheme == "imp");
    for (const auto& r : one) {
        CHECK(r.n_drops == 12);
        CHECK((r.bler >= 0.0 && r.bler <= 1.0));
        CHECK(r.avg_attempts_per_ue >= 1.0 - r.bler - 1e-12);
    }
    auto other = c;
    other.base_seed = 78;
    CHECK(format_results(run_campaign(other, 1)) != format_results(one));
}

TEST_CASE("drop-level collision rate matches the codeword-induced probability") {
    auto c = desk_preset();
    c.snr_db_list = {30.0};
    c.n_ue_list = {3};
    c.n_drops = 3000;
    c.schemes = {make_imp_layout(24, 2)};
    const auto rows = run_campaign(c, 0);
    REQUIRE(rows.size() == 1);
    const double exact = all_pilot_collision_probability(codeword_index_pmf(c.schemes[0]), 2, 3);
    CHECK(std::abs(rows[0].collision_rate - exact) < 4.0 * oracle::binomial_sigma(exact, 3000));
}

TEST_CASE("single user at 20 dB is almost always decoded") {
    auto c = desk_preset();
    c.schemes = {make_tsp_layout(24)};
    c.snr_db_list = {20.0};
    c.n_ue_list = {1};
    c.n_drops = 1000;
    const auto rows = run_campaign(c, 0);
    REQUIRE(rows.size() == 1);
    CHECK(1.0 - rows[0].bler >= 0.999);
    CHECK(rows[0].avg_attempts_per_ue >= 1.0 - rows[0].bler);
}

TEST_CASE("BLER does not rise with SNR beyond statistical slack") {
    auto c = desk_preset();
    c.snr_db_list = {-4.0, 0.0, 4.0, 8.0};
    c.n_ue_list = {4};
    c.n_drops = 150;
    const auto rows = run_campaign(c, 0);
    REQUIRE(rows.size() == 8);
    for (std::size_t s = 0; s < 2; ++s) {
        for (std::size_t i = 1; i < 4; ++i) {
            const auto& lo = rows[s * 4 + i - 1];
            const auto& hi = rows[s * 4 + i];
            CHECK(hi.bler <= lo.bler + 2.0 * std::max(lo.bler_ci95, hi.bler_ci95));
            CHECK(hi.avg_attempts_per_ue >= 1.0 - hi.bler - 1e-12);
        }
    }
}

TEST_CASE("results round trip") {
    const auto rows = run_campaign(small_config(), 1);
    const auto text = format_results(rows);
    CHECK(text.rfind(kResultsHeader, 0) == 0);
    const auto parsed = parse_results(text);
    REQUIRE(parsed.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(parsed[i] == rows[i]);
    CHECK(format_results(parsed) == text);
    CHECK(format_results({}) == std::string(kResultsHeader) + "\n");

    CHECK_THROWS_AS(parse_results("bogus\n"), std::runtime_error);
    CHECK_THROWS_AS(parse_results(std::string(kResultsHeader) + "\ntsp,1,0\n"), std::runtime_error);
    CHECK_THROWS_AS(parse_results(std::string(kResultsHeader) + "\ntsp,x,0,1,0,0,0,0,0,0,1\n"), std::runtime_error);

    const auto dir = std::filesystem::temp_directory_path() / "gfsim_unit_results";
    std::filesystem::create_directories(dir);
    const auto path = dir / "out.csv";
    write_results(rows, path);
    std::ifstream in(path, std::ios::binary);
    const std::string back((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(back == text);
    std::filesystem::remove_all(dir);

    try {
        write_results(rows, "/nonexistent-dir/x.csv");
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("/nonexistent-dir/x.csv") != std::string::npos);
    }
}

TEST_CASE("config parsing") {
    const std::string text = R"(# campaign
n_pilot_re = 24
n_data_re = 720
n_rx = 2
snr_db = -5, 0, 12.5
n_ue = 1, 4
n_drops = 50
rx_procedure = parallel
ic_ce_mode = data_aided
duplicate_policy = average
ic_pilot_choice = detecting
aud_gamma = 12
max_rounds = 4
channel_mode = per_block
pilot_boost_db = 3
transport_block_size = 160
base_seed = 99

[scheme]
scheme = tsp
[scheme]
scheme = imp   # default w
[scheme]
scheme = imp
w = 3
)";
    const auto c = parse_config(text);
    CHECK(c.snr_db_list == std::vector<double>{-5.0, 0.0, 12.5});
    CHECK(c.n_ue_list == std::vector<int>{1, 4});
    CHECK(c.n_drops == 50);
    CHECK(c.rx_options.procedure == RxProcedure::Parallel);
    CHECK(c.rx_options.ic_ce_mode == IcEstimation::DataAided);
    CHECK(c.rx_options.duplicate_policy == DuplicatePolicy::Average);
    CHECK(c.rx_options.ic_pilot_choice == IcPilotChoice::Detecting);
    CHECK(c.rx_options.aud_gamma == 12.0);
    CHECK(c.rx_options.max_rounds == 4);
    CHECK(c.channel_mode == ChannelMode::PerBlock);
    CHECK(c.resource.pilot_boost_db == 3.0);
    CHECK(c.base_seed == 99);
    REQUIRE(c.schemes.size() == 3);
    CHECK(c.schemes[0].scheme == Scheme::Tsp);
    CHECK(c.schemes[1].w == 2);
    CHECK(c.schemes[2].w == 3);

    const auto g = parse_config("snr_db = 10\nn_ue = 2\nscheme = imp\nw = 3\n");
    REQUIRE(g.schemes.size() == 1);
    CHECK(g.schemes[0].w == 3);
}

TEST_CASE("config errors carry line numbers") {
    auto line_of = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return e.line();
        }
        return -1;
    };
    const std::string base = "snr_db = 0\nn_ue = 2\n";
    CHECK(line_of(base + "bogus = 1\n[scheme]\nscheme = tsp\n") == 3);
    CHECK(line_of(base + "n_drops = ten\n[scheme]\nscheme = tsp\n") == 3);
    CHECK(line_of(base + "n_drops = 1.5\n[scheme]\nscheme = tsp\n") == 3);
    CHECK(line_of(base + "n_drops\n[scheme]\nscheme = tsp\n") == 3);
    CHECK(line_of(base + "n_rx = \n[scheme]\nscheme = tsp\n") == 3);
    CHECK(line_of(base + "n_rx = 2\nn_rx = 3\n[scheme]\nscheme = tsp\n") == 4);
    CHECK(line_of(base + "[schemes]\n") == 3);
    CHECK(line_of(base + "[scheme]\nscheme = imp\nw = 5\n") == 3);
    CHECK(line_of(base + "[scheme]\nscheme = tsp\nw = 2\n") == 3);
    CHECK(line_of(base + "[scheme]\nscheme = foo\n") == 4);
    CHECK(line_of(base + "[scheme]\nscheme = tsp\nn_rx = 2\n") == 5);
    CHECK(line_of(base + "[scheme]\nw = 2\n") == 3);
    CHECK(line_of(base + "rx_procedure = both\n[scheme]\nscheme = tsp\n") == 3);
    CHECK(line_of("n_ue = 2\n[scheme]\nscheme = tsp\n") == 0);
    CHECK(line_of(base) == 0);
    CHECK(line_of(base + "n_drops = 0\n[scheme]\nscheme = tsp\n") == 0);

    CHECK_THROWS_WITH_AS(load_config("/nonexistent/gfsim.cfg"), doctest::Contains("/nonexistent/gfsim.cfg"),
                         std::runtime_error);
}
