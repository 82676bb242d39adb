#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gfsim/types.hpp"

namespace gfsim {

/// Mutually orthogonal pilot sequences with unit per-element power.
/// Column n of `matrix` is sequence n; the pool size equals the sequence length.
struct PilotPool {
    std::size_t length = 0;
    CMatrix matrix;

    [[nodiscard]] auto sequence(std::size_t n) const { return matrix.col(static_cast<Eigen::Index>(n)); }
    [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(matrix.cols()); }
};

enum class Scheme { Tsp, Imp };

/// Pilot resource split: `w` independent pilots of `pool_size` REs each.
struct PilotLayout {
    Scheme scheme = Scheme::Tsp;
    int total_pilot_re = 0;
    int w = 1;
    int pool_size = 0;
    int bits_per_index = 0; ///< m = ceil(log2(pool_size)), at least 1

    [[nodiscard]] const char* tag() const { return scheme == Scheme::Tsp ? "tsp" : "imp"; }
};

PilotLayout make_tsp_layout(int total_pilot_re);
PilotLayout make_imp_layout(int total_pilot_re, int w);

/// One index in [0, pool_size) per pilot position.
struct PilotSelection {
    std::vector<int> indices;
    friend bool operator==(const PilotSelection&, const PilotSelection&) = default;
};

enum class CollisionEvent {
    AnyPairAllPilots, ///< some UE pair shares the sequence on every pilot position
    AnyTspCollision,  ///< some UE pair shares a sequence on at least one pilot position
};

struct CollisionEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

// Columns of the length x length DFT matrix, unit modulus entries.
PilotPool make_pilot_pool(std::size_t length);

/// P = 1 - A_N^K / N^K, exact.
double tsp_collision_probability(int pool_size, int n_users);

/// C(K,2) / N^w, clamped to [0,1]. Approximation for small K.
double imp_pairwise_collision_probability(int pool_size, int w, int n_users);

/// Exact probability that at least two of K UEs pick the same index on all
/// w positions when every position is uniform over the pool. Each UE's
/// selection is one of N^w equally likely tuples, so this is the TSP
/// formula over a pool of N^w.
double all_pilot_collision_probability(int pool_size, int w, int n_users);

/// Same event for an arbitrary per-position index distribution (positions
/// independent and identically distributed).
double all_pilot_collision_probability(std::span<const double> index_pmf, int w, int n_users);

/// Distribution of `v mod pool_size` for v uniform over m = bits_per_index bits,
/// i.e. the index law induced by reading uniformly random codeword bits.
std::vector<double> codeword_index_pmf(const PilotLayout& layout);

PilotSelection random_pilot_selection(const PilotLayout& layout, Rng& rng);

/// Monte Carlo frequency of `event` with binomial standard error.
CollisionEstimate simulate_collision_probability(const PilotLayout& layout, int n_users, CollisionEvent event,
                                                 std::int64_t n_trials, std::uint64_t seed);

/// Like above but indices drawn from `index_pmf` instead of uniformly.
CollisionEstimate simulate_collision_probability(const PilotLayout& layout, std::span<const double> index_pmf,
                                                 int n_users, CollisionEvent event, std::int64_t n_trials,
                                                 std::uint64_t seed);

bool has_collision(std::span<const PilotSelection> selections, CollisionEvent event);

} // namespace gfsim
