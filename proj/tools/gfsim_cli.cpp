// gfsim command line: simulate, collision, validate.
// Exit codes: 0 success, 1 failed validation or run-time failure, 2 bad arguments.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "gfsim/acceptance.hpp"
#include "gfsim/config.hpp"
#include "gfsim/pilots.hpp"
#include "gfsim/results.hpp"
#include "gfsim/sim.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

int simulate(const std::string& config_path, const std::string& out_path, int threads,
             std::optional<std::uint64_t> seed) {
    gfsim::SimConfig config;
    try {
        config = gfsim::load_config(config_path);
        if (seed) config.base_seed = *seed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << config_path << ": " << e.what() << "\n";
        return kExitUsage;
    }
    try {
        const auto rows = gfsim::run_campaign(config, threads);
        gfsim::write_results(rows, out_path);
        for (const auto& r : rows)
            if (r.low_confidence())
                std::cerr << "note: " << r.scheme << " w=" << r.w << " snr=" << r.snr_db << " K=" << r.n_ue
                          << " has fewer than 20 block errors\n";
        std::cout << "wrote " << rows.size() << " rows to " << out_path << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return 0;
}

int collision(const std::vector<int>& ns, const std::vector<int>& ws, const std::vector<int>& ks, std::int64_t trials,
              std::uint64_t seed) {
    std::printf("%6s %3s %4s %12s %12s %12s %12s\n", "N", "w", "K", "closed_form", "exact", "monte_carlo", "std_error");
    for (int n : ns) {
        for (int w : ws) {
            const auto layout = w == 1 ? gfsim::make_tsp_layout(n) : gfsim::make_imp_layout(n * w, w);
            for (int k : ks) {
                const double closed = w == 1 ? gfsim::tsp_collision_probability(n, k)
                                             : gfsim::imp_pairwise_collision_probability(n, w, k);
                const double exact = gfsim::all_pilot_collision_probability(n, w, k);
                std::printf("%6d %3d %4d %12.6f %12.6f", n, w, k, closed, exact);
                if (trials > 0) {
                    const auto mc = gfsim::simulate_collision_probability(
                        layout, k, gfsim::CollisionEvent::AnyPairAllPilots, trials, seed);
                    std::printf(" %12.6f %12.6f", mc.estimate, mc.std_error);
                }
                std::printf("\n");
            }
        }
    }
    return 0;
}

int validate(const gfsim::acceptance::Options& options) {
    bool all = true;
    gfsim::acceptance::run_all(options, [&](const gfsim::acceptance::CriterionResult& r) {
        std::printf("%s\n", gfsim::acceptance::format_line(r).c_str());
        std::fflush(stdout);
        all = all && r.passed;
    });
    return all ? 0 : kExitFailure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"grant-free multi-pilot link simulator"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("simulate", "run a campaign from a config file and write CSV");
    std::string config_path, out_path;
    int threads = 0;
    std::optional<std::uint64_t> seed;
    sim->add_option("--config", config_path, "config file")->required();
    sim->add_option("--out", out_path, "output CSV")->required();
    sim->add_option("--threads", threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    sim->add_option("--seed", seed, "override base_seed");

    auto* col = app.add_subcommand("collision", "closed-form vs Monte Carlo collision probabilities");
    std::vector<int> ns, ws = {1}, ks;
    std::int64_t trials = 100000;
    std::uint64_t col_seed = 1;
    col->add_option("--n", ns, "pool sizes per pilot position")->required()->delimiter(',')->check(CLI::PositiveNumber);
    col->add_option("--w", ws, "pilots per user")->delimiter(',')->check(CLI::PositiveNumber);
    col->add_option("--k", ks, "user counts")->required()->delimiter(',')->check(CLI::NonNegativeNumber);
    col->add_option("--trials", trials, "Monte Carlo trials (0 skips)")->check(CLI::NonNegativeNumber);
    col->add_option("--seed", col_seed, "Monte Carlo seed");

    auto* val = app.add_subcommand("validate", "run the acceptance suite");
    gfsim::acceptance::Options options;
    std::vector<int> only;
    val->add_option("--threads", options.threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    val->add_option("--only", only, "criteria to run")
        ->delimiter(',')
        ->check(CLI::Range(1, gfsim::acceptance::kCriterionCount));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }

    try {
        if (*sim) return simulate(config_path, out_path, threads, seed);
        if (*col) return collision(ns, ws, ks, trials, col_seed);
        options.only.insert(only.begin(), only.end());
        return validate(options);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}
