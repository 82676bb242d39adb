#include "gfsim/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "gfsim/channel.hpp"
#include "gfsim/config.hpp"
#include "gfsim/pilots.hpp"
#include "gfsim/results.hpp"
#include "gfsim/rx.hpp"
#include "gfsim/sim.hpp"

namespace gfsim::acceptance {

namespace {

// Pinned targets and tolerances.
constexpr double kTspTarget = 0.121528;
constexpr double kImpTarget = 0.020833;
constexpr double kClosedFormTol = 1e-6;
constexpr double kRatioTol = 1e-12;
constexpr std::int64_t kCollisionTrials = 1000000;
constexpr double kSigmaSlack = 4.0;
constexpr int kEstimationDrops = 100000;
constexpr double kEstimationNoise = 0.1;
constexpr double kEstimationRelTol = 0.05;
constexpr double kRatioW2Tol = 0.1;
constexpr double kRatioW3Tol = 0.15;
constexpr double kResidualTol = 1e-9;
constexpr double kLsExactTol = 1e-9;
constexpr int kLsTrials = 1000;
constexpr double kLsRelTol = 0.20;
constexpr int kFig4Drops = 1000;
constexpr double kFig4AllDecoded = 0.99;
constexpr double kFig4Late = 0.95;
constexpr int kAudTrials = 100000;
constexpr double kMaxFalseAlarm = 1.5e-3;
constexpr double kMaxMiss = 1e-3;
constexpr std::int64_t kFloorDrops = 20000;
constexpr double kFloorRatio = 3.0;
constexpr double kFloorPersistence = 0.5;
constexpr std::int64_t kTrendDrops = 4000;
constexpr double kAttemptSnrDb = 10.0;
constexpr double kAttemptRatioLo = 1.1;
constexpr double kAttemptRatioHi = 2.2;
constexpr double kDataAidedSnrDb = 10.0;
constexpr double kAttemptSlack = 0.02; // relative

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

CriterionResult make(int id, std::string title, bool passed, std::string detail) {
    return {id, std::move(title), passed, std::move(detail)};
}

SimConfig trend_config(std::vector<PilotLayout> schemes, std::vector<double> snrs, std::vector<int> ks,
                       std::int64_t drops) {
    SimConfig c = desk_preset();
    c.schemes = std::move(schemes);
    c.snr_db_list = std::move(snrs);
    c.n_ue_list = std::move(ks);
    c.n_drops = drops;
    c.base_seed = 20240601;
    return c;
}

CriterionResult closed_form_tsp() {
    const double p = tsp_collision_probability(24, 3);
    return make(1, "TSP collision N=24 K=3", std::abs(p - kTspTarget) <= kClosedFormTol,
                fmt("%.9f vs %.6f (tol %.0e)", p, kTspTarget, kClosedFormTol));
}

CriterionResult closed_form_imp() {
    const double p = imp_pairwise_collision_probability(12, 2, 3);
    return make(2, "IMP pairwise collision N=12 w=2 K=3", std::abs(p - kImpTarget) <= kClosedFormTol,
                fmt("%.9f vs %.6f (tol %.0e)", p, kImpTarget, kClosedFormTol));
}

CriterionResult ratio_identity() {
    bool ok = true;
    std::string detail;
    for (int n : {8, 16, 24, 48}) {
        const double ratio = imp_pairwise_collision_probability(n / 2, 2, 2) / tsp_collision_probability(n, 2);
        const double err = std::abs(ratio - 4.0 / n);
        ok = ok && err <= kRatioTol;
        detail += fmt("%sN=%d err %.1e", detail.empty() ? "" : "; ", n, err);
    }
    return make(3, "IMP/TSP ratio 4/N for K=2 w=2", ok, detail + fmt(" (tol %.0e)", kRatioTol));
}

CriterionResult monte_carlo_collisions() {
    bool ok = true;
    double worst = 0.0;
    std::uint64_t seed = 4000;
    for (int n : {12, 24}) {
        for (int k : {2, 3, 4}) {
            const auto tsp = simulate_collision_probability(make_tsp_layout(n), k, CollisionEvent::AnyPairAllPilots,
                                                            kCollisionTrials, ++seed);
            const double p_tsp = tsp_collision_probability(n, k);
            const double z_tsp = std::abs(tsp.estimate - p_tsp) / tsp.std_error;

            const auto imp = simulate_collision_probability(make_imp_layout(2 * n, 2), k,
                                                            CollisionEvent::AnyPairAllPilots, kCollisionTrials, ++seed);
            const double p_imp = all_pilot_collision_probability(n, 2, k);
            const double z_imp = std::abs(imp.estimate - p_imp) / imp.std_error;
            // the pairwise form neglects multi-pair overlaps; it is tight up to K=3
            const double z_pair = k <= 3 ? std::abs(imp.estimate - imp_pairwise_collision_probability(n, 2, k)) /
                                               imp.std_error
                                         : 0.0;
            worst = std::max({worst, z_tsp, z_imp, z_pair});
            ok = ok && z_tsp <= kSigmaSlack && z_imp <= kSigmaSlack && z_pair <= kSigmaSlack;
        }
    }
    return make(4, "Monte Carlo vs closed forms, N in {12,24}, K in {2,3,4}", ok,
                fmt("worst deviation %.2f sigma (limit %.0f), %lld trials each", worst, kSigmaSlack,
                    static_cast<long long>(kCollisionTrials)));
}

double estimation_error_variance(int w, std::uint64_t seed) {
    const int pool_size = 24 / w;
    const auto pool = make_pilot_pool(static_cast<std::size_t>(pool_size));
    Rng rng(seed);
    std::uniform_int_distribution<int> pick(0, pool_size - 1);
    double err = 0.0;
    for (int t = 0; t < kEstimationDrops; ++t) {
        const int idx = pick(rng);
        CVector h(2);
        for (auto& g : h) g = complex_gaussian(rng, 1.0);
        CMatrix y = pool.sequence(static_cast<std::size_t>(idx)) * h.transpose();
        for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += complex_gaussian(rng, kEstimationNoise);
        const auto round = detect_active_pilots(y, pool, kEstimationNoise, 0.0);
        const auto it = std::find_if(round.detected.begin(), round.detected.end(),
                                     [&](const Detection& d) { return d.pilot_index == idx; });
        if (it == round.detected.end()) throw std::logic_error("estimation: transmitted pilot missing");
        err += (it->estimate.gains - h).squaredNorm();
    }
    return err / (2.0 * kEstimationDrops);
}

CriterionResult estimation_variance() {
    const double v1 = estimation_error_variance(1, 5001);
    const double v2 = estimation_error_variance(2, 5002);
    const double v3 = estimation_error_variance(3, 5003);
    const double target = kEstimationNoise / 24.0;
    const bool ok = std::abs(v1 / target - 1.0) <= kEstimationRelTol &&
                    std::abs(v2 / (2.0 * target) - 1.0) <= kEstimationRelTol &&
                    std::abs(v3 / (3.0 * target) - 1.0) <= kEstimationRelTol &&
                    std::abs(v2 / v1 - 2.0) <= kRatioW2Tol && std::abs(v3 / v1 - 3.0) <= kRatioW3Tol;
    return make(5, "pilot estimation error variance", ok,
                fmt("TSP %.3e vs %.3e; w=2 ratio %.3f (2.0+-%.2f); w=3 ratio %.3f (3.0+-%.2f)", v1, target, v2 / v1,
                    kRatioW2Tol, v3 / v1, kRatioW3Tol));
}

CriterionResult cancellation_exactness() {
    ResourceConfig cfg;
    cfg.layout = make_imp_layout(24, 2);
    const auto pool = make_pilot_pool(12);
    Rng rng(6001);
    std::vector<UeTransmission> txs;
    for (int k = 0; k < 6; ++k) txs.push_back(build_ue_transmission(k, random_payload(160, rng), cfg, pool));
    double worst = 0.0;
    for (auto mode : {ChannelMode::Flat, ChannelMode::PerBlock}) {
        const auto ch = draw_channel(6, cfg, mode, rng);
        auto grid = apply_channel(txs, ch, cfg, std::numeric_limits<double>::infinity(), rng);
        const double before = grid.energy();
        for (std::size_t k = 0; k < txs.size(); ++k) cancel_user(grid, txs[k], ch.gains[k]);
        worst = std::max(worst, grid.energy() / before);
    }
    return make(6, "noiseless cancellation residual", worst <= kResidualTol,
                fmt("residual/energy %.2e (limit %.0e)", worst, kResidualTol));
}

CriterionResult data_aided_ls() {
    ResourceConfig cfg;
    cfg.layout = make_imp_layout(24, 2);
    const auto pool = make_pilot_pool(12);
    Rng rng(7001);
    const auto a = build_ue_transmission(0, random_payload(160, rng), cfg, pool);
    UeTransmission b;
    do b = build_ue_transmission(1, random_payload(160, rng), cfg, pool);
    while (b.pilot_selection != a.pilot_selection);
    const std::vector<UeTransmission> txs = {a, b};
    const auto ch = draw_channel(2, cfg, ChannelMode::Flat, rng);

    const auto clean = apply_channel(txs, ch, cfg, std::numeric_limits<double>::infinity(), rng);
    const auto exact = data_aided_ce(clean, txs);
    double exact_err = std::numeric_limits<double>::infinity();
    if (exact) exact_err = std::max(((*exact)[0] - ch.gains[0]).cwiseAbs().maxCoeff(),
                                    ((*exact)[1] - ch.gains[1]).cwiseAbs().maxCoeff());

    // LS covariance noise_var (D^H D)^{-1}, D stacking both users' full symbol vectors
    const Eigen::Index rows = 12 + 12 + 720;
    CMatrix d(rows, 2);
    for (int q = 0; q < 2; ++q) {
        const auto& t = txs[static_cast<std::size_t>(q)];
        d.col(q) << t.pilot_symbols[0], t.pilot_symbols[1], t.data_symbols;
    }
    const double snr_db = 0.0;
    const double nv = noise_variance_for_snr(snr_db);
    const CMatrix cov = nv * (d.adjoint() * d).inverse();
    double mse[2] = {0.0, 0.0};
    for (int t = 0; t < kLsTrials; ++t) {
        const auto noisy = apply_channel(txs, ch, cfg, snr_db, rng);
        const auto est = data_aided_ce(noisy, txs);
        if (!est) return make(7, "data-aided least squares", false, "rank deficient on a noisy trial");
        for (int q = 0; q < 2; ++q)
            mse[q] += ((*est)[static_cast<std::size_t>(q)].col(0) - ch.gains[static_cast<std::size_t>(q)].col(0))
                          .squaredNorm() / 2.0;
    }
    const double r0 = mse[0] / kLsTrials / cov(0, 0).real();
    const double r1 = mse[1] / kLsTrials / cov(1, 1).real();
    const bool ok = exact_err <= kLsExactTol && std::abs(r0 - 1.0) <= kLsRelTol && std::abs(r1 - 1.0) <= kLsRelTol;
    return make(7, "data-aided least squares", ok,
                fmt("noiseless max err %.1e (limit %.0e); MSE/LS-variance %.3f, %.3f (1+-%.2f)", exact_err,
                    kLsExactTol, r0, r1, kLsRelTol));
}

CriterionResult fig4_scenario() {
    ResourceConfig cfg;
    cfg.layout = make_imp_layout(24, 2);
    const auto pool = make_pilot_pool(12);
    const std::vector<std::vector<int>> wanted = {{3, 7}, {3, 5}, {4, 5}};
    const RxOptions options; // serial, pilot-only
    int all = 0;
    int late = 0;
    for (int drop = 0; drop < kFig4Drops; ++drop) {
        Rng rng(8000 + static_cast<std::uint64_t>(drop));
        std::vector<UeTransmission> txs;
        for (int k = 0; k < 3; ++k) {
            while (true) {
                auto t = build_ue_transmission(k, random_payload(160, rng), cfg, pool);
                if (t.pilot_selection.indices == wanted[static_cast<std::size_t>(k)]) {
                    txs.push_back(std::move(t));
                    break;
                }
            }
        }
        const auto ch = draw_channel(3, cfg, ChannelMode::Flat, rng);
        const auto grid = apply_channel(txs, ch, cfg, 30.0, rng);
        const auto scored = score_drop(txs, run_receiver(grid, cfg, pool, options), cfg);
        if (scored.n_decoded() == 3) {
            ++all;
            if (scored.decoded_pass[1] > 1) ++late;
        }
    }
    const double all_rate = static_cast<double>(all) / kFig4Drops;
    const double late_rate = all > 0 ? static_cast<double>(late) / all : 0.0;
    const bool ok = all_rate >= kFig4AllDecoded && late_rate >= kFig4Late;
    return make(8, "three-user collision example, 30 dB", ok,
                fmt("all decoded %.3f (>= %.2f); UE2 after the first pass %.3f (>= %.2f)", all_rate, kFig4AllDecoded,
                    late_rate, kFig4Late));
}

CriterionResult aud_calibration() {
    const auto pool = make_pilot_pool(24);
    Rng rng(9001);
    std::int64_t alarms = 0;
    for (int t = 0; t < kAudTrials; ++t) {
        CMatrix y(24, 2);
        for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = complex_gaussian(rng, 1.0);
        alarms += static_cast<std::int64_t>(detect_active_pilots(y, pool, 1.0, kDefaultAudGamma).detected.size());
    }
    const double fa = static_cast<double>(alarms) / (24.0 * kAudTrials);

    const double nv = noise_variance_for_snr(10.0);
    std::uniform_int_distribution<int> pick(0, 23);
    int misses = 0;
    for (int t = 0; t < kAudTrials; ++t) {
        const int idx = pick(rng);
        CVector h(2);
        for (auto& g : h) g = complex_gaussian(rng, 1.0);
        CMatrix y = pool.sequence(static_cast<std::size_t>(idx)) * h.transpose();
        for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += complex_gaussian(rng, nv);
        const auto round = detect_active_pilots(y, pool, nv, kDefaultAudGamma);
        misses += std::none_of(round.detected.begin(), round.detected.end(),
                               [&](const Detection& d) { return d.pilot_index == idx; });
    }
    const double miss = static_cast<double>(misses) / kAudTrials;
    return make(9, "activity detection calibration", fa <= kMaxFalseAlarm && miss <= kMaxMiss,
                fmt("false alarm %.2e (<= %.1e); miss at 10 dB %.2e (<= %.0e)", fa, kMaxFalseAlarm, miss, kMaxMiss));
}

const MetricsRow& find_row(const std::vector<MetricsRow>& rows, Scheme scheme, int w, double snr, int k) {
    for (const auto& r : rows)
        if ((r.scheme == "tsp") == (scheme == Scheme::Tsp) && r.w == w && r.snr_db == snr && r.n_ue == k) return r;
    throw std::logic_error("missing campaign row");
}

CriterionResult error_floor(const Options& options) {
    const auto tsp = run_campaign(
        trend_config({make_tsp_layout(24)}, {20.0, 30.0}, {6}, kFloorDrops), options.threads);
    const auto imp = run_campaign(
        trend_config({make_imp_layout(24, 2)}, {30.0}, {6}, kFloorDrops), options.threads);
    const double t20 = find_row(tsp, Scheme::Tsp, 1, 20.0, 6).bler;
    const double t30 = find_row(tsp, Scheme::Tsp, 1, 30.0, 6).bler;
    const double i30 = find_row(imp, Scheme::Imp, 2, 30.0, 6).bler;
    const bool ok = t30 > kFloorRatio * i30 && t30 >= kFloorPersistence * t20;
    return make(10, "error floor ordering, K=6", ok,
                fmt("TSP 30 dB %.4f > %.0f x IMP %.4f; TSP 30 dB / 20 dB %.3f (>= %.1f)", t30, kFloorRatio, i30,
                    t20 > 0.0 ? t30 / t20 : 0.0, kFloorPersistence));
}

CriterionResult low_snr_direction(const Options& options) {
    for (double snr = -10.0; snr <= 10.0; snr += 2.0) {
        const auto rows = run_campaign(trend_config({make_tsp_layout(24), make_imp_layout(24, 2)}, {snr},
                                                    {6}, kTrendDrops),
                                       options.threads);
        const auto& t = find_row(rows, Scheme::Tsp, 1, snr, 6);
        const auto& i = find_row(rows, Scheme::Imp, 2, snr, 6);
        if (t.bler > 0.5 && i.bler > 0.5) {
            return make(11, "low-SNR ordering, K=6", t.bler <= i.bler + 2.0 * i.bler_ci95,
                        fmt("at %.0f dB TSP %.4f <= IMP %.4f + 2 x %.4f", snr, t.bler, i.bler, i.bler_ci95));
        }
    }
    return make(11, "low-SNR ordering, K=6", false, "no SNR point with both BLERs above 0.5");
}

CriterionResult attempt_ratio(const Options& options) {
    const auto rows = run_campaign(trend_config({make_tsp_layout(24), make_imp_layout(24, 2),
                                                          make_imp_layout(24, 3)},
                                                {kAttemptSnrDb}, {6}, kTrendDrops),
                                   options.threads);
    const double t = find_row(rows, Scheme::Tsp, 1, kAttemptSnrDb, 6).avg_attempts_per_ue;
    const double i2 = find_row(rows, Scheme::Imp, 2, kAttemptSnrDb, 6).avg_attempts_per_ue;
    const double i3 = find_row(rows, Scheme::Imp, 3, kAttemptSnrDb, 6).avg_attempts_per_ue;
    const double r2 = i2 / t;
    const double r3 = i3 / t;
    const bool ok = r2 >= kAttemptRatioLo && r2 <= kAttemptRatioHi && r3 >= r2;
    return make(12, "decoding attempt ratio, K=6", ok,
                fmt("attempts TSP %.3f, w=2 %.3f, w=3 %.3f; ratio w=2 %.3f in [%.1f, %.1f], w=3 %.3f >= w=2", t, i2,
                    i3, r2, kAttemptRatioLo, kAttemptRatioHi, r3));
}

CriterionResult data_aided_gain(const Options& options) {
    auto cfg = trend_config({make_imp_layout(24, 2)}, {kDataAidedSnrDb}, {6, 8}, kTrendDrops);
    const auto pilot = run_campaign(cfg, options.threads);
    cfg.rx_options.ic_ce_mode = IcEstimation::DataAided;
    const auto aided = run_campaign(cfg, options.threads);
    bool ok = true;
    std::string detail;
    for (int k : {6, 8}) {
        const auto& p = find_row(pilot, Scheme::Imp, 2, kDataAidedSnrDb, k);
        const auto& a = find_row(aided, Scheme::Imp, 2, kDataAidedSnrDb, k);
        const bool bler_ok = a.bler <= p.bler + p.bler_ci95;
        const bool att_ok = a.avg_attempts_per_ue <= p.avg_attempts_per_ue * (1.0 + kAttemptSlack);
        ok = ok && bler_ok && att_ok;
        if (k == 8) ok = ok && a.bler + a.bler_ci95 < p.bler - p.bler_ci95 && a.avg_attempts_per_ue < p.avg_attempts_per_ue;
        detail += fmt("K=%d BLER %.4f vs %.4f, attempts %.3f vs %.3f; ", k, a.bler, p.bler, a.avg_attempts_per_ue,
                      p.avg_attempts_per_ue);
    }
    return make(13, "data-aided vs pilot-only estimation, IMP w=2", ok, detail + "strict at K=8");
}

CriterionResult determinism() {
    const std::string text = "n_pilot_re = 24\nn_data_re = 720\nn_rx = 2\nsnr_db = 0, 10\nn_ue = 2, 5\n"
                             "n_drops = 16\nbase_seed = 7\n[scheme]\nscheme = tsp\n[scheme]\nscheme = imp\nw = 2\n";
    const auto cfg = parse_config(text);
    const auto dir = std::filesystem::temp_directory_path() / "gfsim_acceptance";
    std::filesystem::create_directories(dir);
    const auto one = dir / "threads1.csv";
    const auto eight = dir / "threads8.csv";
    write_results(run_campaign(cfg, 1), one);
    write_results(run_campaign(cfg, 8), eight);
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const auto a = slurp(one);
    const auto b = slurp(eight);
    std::filesystem::remove_all(dir);
    return make(14, "CSV identical for 1 and 8 threads", !a.empty() && a == b,
                fmt("%zu bytes, %s", a.size(), a == b ? "identical" : "different"));
}

} // namespace

CriterionResult run_criterion(int id, const Options& options) {
    switch (id) {
    case 1: return closed_form_tsp();
    case 2: return closed_form_imp();
    case 3: return ratio_identity();
    case 4: return monte_carlo_collisions();
    case 5: return estimation_variance();
    case 6: return cancellation_exactness();
    case 7: return data_aided_ls();
    case 8: return fig4_scenario();
    case 9: return aud_calibration();
    case 10: return error_floor(options);
    case 11: return low_snr_direction(options);
    case 12: return attempt_ratio(options);
    case 13: return data_aided_gain(options);
    case 14: return determinism();
    default: throw std::invalid_argument("no acceptance criterion " + std::to_string(id));
    }
}

std::vector<CriterionResult> run_all(const Options& options, const Reporter& report) {
    std::vector<CriterionResult> out;
    for (int id = 1; id <= kCriterionCount; ++id) {
        if (!options.only.empty() && !options.only.count(id)) continue;
        out.push_back(run_criterion(id, options));
        if (report) report(out.back());
    }
    return out;
}

std::string format_line(const CriterionResult& r) {
    return fmt("%s  C%02d  %s | ", r.passed ? "PASS" : "FAIL", r.id, r.title.c_str()) + r.detail;
}

} // namespace gfsim::acceptance
