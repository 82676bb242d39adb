#include "gfsim/pilots.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gfsim {

namespace {

int index_bits(int pool_size) {
    return std::max(1, static_cast<int>(std::bit_width(static_cast<unsigned>(pool_size - 1))));
}

// 1 - prod_{i<K} (M - i) / M
double birthday_probability(double pool, int n_users) {
    if (n_users <= 1) return 0.0;
    if (static_cast<double>(n_users) > pool) return 1.0;
    double no_collision = 1.0;
    for (int i = 0; i < n_users; ++i) no_collision *= (pool - i) / pool;
    return std::clamp(1.0 - no_collision, 0.0, 1.0);
}

bool pair_collides_all(const int* a, const int* b, int w) {
    for (int p = 0; p < w; ++p)
        if (a[p] != b[p]) return false;
    return true;
}

bool pair_collides_any(const int* a, const int* b, int w) {
    for (int p = 0; p < w; ++p)
        if (a[p] == b[p]) return true;
    return false;
}

bool flat_has_collision(const std::vector<int>& flat, int n_users, int w, CollisionEvent event) {
    for (int i = 0; i < n_users; ++i) {
        for (int j = i + 1; j < n_users; ++j) {
            const int* a = &flat[static_cast<std::size_t>(i * w)];
            const int* b = &flat[static_cast<std::size_t>(j * w)];
            if (event == CollisionEvent::AnyPairAllPilots ? pair_collides_all(a, b, w) : pair_collides_any(a, b, w))
                return true;
        }
    }
    return false;
}

template <typename Draw>
CollisionEstimate run_trials(const PilotLayout& layout, int n_users, CollisionEvent event, std::int64_t n_trials,
                             Draw&& draw) {
    if (n_trials < 1) throw std::invalid_argument("simulate_collision_probability: n_trials must be >= 1");
    if (n_users < 2) return {0.0, 0.0};
    const int w = layout.w;
    std::vector<int> flat(static_cast<std::size_t>(n_users * w));
    std::int64_t hits = 0;
    for (std::int64_t t = 0; t < n_trials; ++t) {
        for (auto& v : flat) v = draw();
        if (flat_has_collision(flat, n_users, w, event)) ++hits;
    }
    const double n = static_cast<double>(n_trials);
    const double p = static_cast<double>(hits) / n;
    return {p, std::sqrt(p * (1.0 - p) / n)};
}

} // namespace

PilotLayout make_tsp_layout(int total_pilot_re) {
    if (total_pilot_re < 1) throw std::invalid_argument("TSP layout needs at least one pilot RE");
    return {Scheme::Tsp, total_pilot_re, 1, total_pilot_re, index_bits(total_pilot_re)};
}

PilotLayout make_imp_layout(int total_pilot_re, int w) {
    if (w < 2) throw std::invalid_argument("IMP layout needs w >= 2");
    if (total_pilot_re < w || total_pilot_re % w != 0)
        throw std::invalid_argument("IMP layout: w=" + std::to_string(w) + " does not divide " +
                                    std::to_string(total_pilot_re) + " pilot REs");
    const int pool = total_pilot_re / w;
    return {Scheme::Imp, total_pilot_re, w, pool, index_bits(pool)};
}

PilotPool make_pilot_pool(std::size_t length) {
    if (length == 0) throw std::invalid_argument("make_pilot_pool: length must be >= 1");
    const auto n = static_cast<Eigen::Index>(length);
    PilotPool pool{length, CMatrix(n, n)};
    for (Eigen::Index col = 0; col < n; ++col) {
        for (Eigen::Index row = 0; row < n; ++row) {
            // reduce the phase index first so large lengths keep full precision
            const auto k = static_cast<double>((row * col) % n);
            pool.matrix(row, col) = std::polar(1.0, -2.0 * std::numbers::pi * k / static_cast<double>(n));
        }
    }
    return pool;
}

double tsp_collision_probability(int pool_size, int n_users) {
    if (pool_size < 1) throw std::invalid_argument("tsp_collision_probability: pool size must be >= 1");
    if (n_users < 0) throw std::invalid_argument("tsp_collision_probability: negative user count");
    return birthday_probability(pool_size, n_users);
}

double imp_pairwise_collision_probability(int pool_size, int w, int n_users) {
    if (pool_size < 1 || w < 1) throw std::invalid_argument("imp_pairwise_collision_probability: bad pool/w");
    if (n_users < 2) return 0.0;
    const double pairs = 0.5 * n_users * (n_users - 1);
    return std::clamp(pairs * std::pow(1.0 / pool_size, w), 0.0, 1.0);
}

double all_pilot_collision_probability(int pool_size, int w, int n_users) {
    if (pool_size < 1 || w < 1) throw std::invalid_argument("all_pilot_collision_probability: bad pool/w");
    return birthday_probability(std::pow(static_cast<double>(pool_size), w), n_users);
}

double all_pilot_collision_probability(std::span<const double> index_pmf, int w, int n_users) {
    if (index_pmf.empty() || w < 1) throw std::invalid_argument("all_pilot_collision_probability: bad pmf/w");
    if (n_users <= 1) return 0.0;

    // pmf over w-tuples
    std::vector<double> tuples{1.0};
    for (int p = 0; p < w; ++p) {
        std::vector<double> next;
        next.reserve(tuples.size() * index_pmf.size());
        for (double t : tuples)
            for (double q : index_pmf) next.push_back(t * q);
        tuples.swap(next);
    }

    // P(all distinct) = K! * e_K(q), e_K the elementary symmetric polynomial
    const auto k_max = static_cast<std::size_t>(n_users);
    std::vector<double> e(k_max + 1, 0.0);
    e[0] = 1.0;
    for (double q : tuples)
        for (std::size_t k = k_max; k >= 1; --k) e[k] += e[k - 1] * q;
    double distinct = e[k_max];
    for (int k = 2; k <= n_users; ++k) distinct *= k;
    return std::clamp(1.0 - distinct, 0.0, 1.0);
}

std::vector<double> codeword_index_pmf(const PilotLayout& layout) {
    const std::uint64_t values = std::uint64_t{1} << layout.bits_per_index;
    std::vector<double> pmf(static_cast<std::size_t>(layout.pool_size), 0.0);
    for (std::uint64_t v = 0; v < values; ++v) pmf[v % static_cast<std::uint64_t>(layout.pool_size)] += 1.0;
    for (auto& p : pmf) p /= static_cast<double>(values);
    return pmf;
}

PilotSelection random_pilot_selection(const PilotLayout& layout, Rng& rng) {
    std::uniform_int_distribution<int> pick(0, layout.pool_size - 1);
    PilotSelection sel;
    sel.indices.resize(static_cast<std::size_t>(layout.w));
    for (auto& idx : sel.indices) idx = pick(rng);
    return sel;
}

CollisionEstimate simulate_collision_probability(const PilotLayout& layout, int n_users, CollisionEvent event,
                                                 std::int64_t n_trials, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_int_distribution<int> pick(0, layout.pool_size - 1);
    return run_trials(layout, n_users, event, n_trials, [&] { return pick(rng); });
}

CollisionEstimate simulate_collision_probability(const PilotLayout& layout, std::span<const double> index_pmf,
                                                 int n_users, CollisionEvent event, std::int64_t n_trials,
                                                 std::uint64_t seed) {
    if (static_cast<int>(index_pmf.size()) != layout.pool_size)
        throw std::invalid_argument("simulate_collision_probability: pmf size differs from pool size");
    Rng rng(seed);
    std::discrete_distribution<int> pick(index_pmf.begin(), index_pmf.end());
    return run_trials(layout, n_users, event, n_trials, [&] { return pick(rng); });
}

bool has_collision(std::span<const PilotSelection> selections, CollisionEvent event) {
    if (selections.size() < 2) return false;
    const int w = static_cast<int>(selections.front().indices.size());
    std::vector<int> flat;
    flat.reserve(selections.size() * static_cast<std::size_t>(w));
    for (const auto& s : selections) flat.insert(flat.end(), s.indices.begin(), s.indices.end());
    return flat_has_collision(flat, static_cast<int>(selections.size()), w, event);
}

} // namespace gfsim
