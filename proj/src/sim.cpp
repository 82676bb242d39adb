#include "gfsim/sim.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace gfsim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) { return splitmix64(h ^ splitmix64(v)); }

// Integer tallies of one sweep cell; summing them is order independent.
struct Tally {
    std::int64_t drops = 0;
    std::int64_t transmissions = 0;
    std::int64_t failures = 0;
    std::int64_t attempts = 0;
    std::int64_t collision_drops = 0;
    std::int64_t aud_active = 0;
    std::int64_t aud_missed = 0;
    std::int64_t aud_inactive = 0;
    std::int64_t aud_false_alarms = 0;
    std::int64_t false_payloads = 0;

    void add(const DropResult& d) {
        ++drops;
        transmissions += d.n_ue;
        failures += d.n_ue - d.n_decoded();
        attempts += d.decode_attempts;
        collision_drops += d.all_pilot_collision ? 1 : 0;
        aud_active += d.aud_active;
        aud_missed += d.aud_missed;
        aud_inactive += d.aud_inactive;
        aud_false_alarms += d.aud_false_alarms;
        false_payloads += d.false_payloads;
    }
    void add(const Tally& t) {
        drops += t.drops;
        transmissions += t.transmissions;
        failures += t.failures;
        attempts += t.attempts;
        collision_drops += t.collision_drops;
        aud_active += t.aud_active;
        aud_missed += t.aud_missed;
        aud_inactive += t.aud_inactive;
        aud_false_alarms += t.aud_false_alarms;
        false_payloads += t.false_payloads;
    }
};

double ratio(std::int64_t num, std::int64_t den) {
    return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

MetricsRow row_from_tally(const PilotLayout& layout, double snr_db, int n_ue, const Tally& t) {
    MetricsRow row;
    row.scheme = layout.tag();
    row.w = layout.w;
    row.snr_db = snr_db;
    row.n_ue = n_ue;
    row.n_drops = t.drops;
    row.bler = ratio(t.failures, t.transmissions);
    row.bler_ci95 =
        t.transmissions > 0 ? 1.96 * std::sqrt(row.bler * (1.0 - row.bler) / static_cast<double>(t.transmissions)) : 0.0;
    row.avg_attempts_per_ue = ratio(t.attempts, t.transmissions);
    row.collision_rate = ratio(t.collision_drops, t.drops);
    row.miss_rate = ratio(t.aud_missed, t.aud_active);
    row.false_alarm_rate = ratio(t.aud_false_alarms, t.aud_inactive);
    row.error_events = t.failures;
    row.false_payloads = t.false_payloads;
    return row;
}

} // namespace

int DropResult::n_decoded() const {
    return static_cast<int>(std::count(ue_decoded.begin(), ue_decoded.end(), true));
}

ResourceConfig SimConfig::resource_for(const PilotLayout& layout) const {
    ResourceConfig r = resource;
    r.layout = layout;
    return r;
}

void SimConfig::validate() const {
    if (schemes.empty()) throw std::invalid_argument("no schemes configured");
    if (snr_db_list.empty()) throw std::invalid_argument("snr_db list is empty");
    if (n_ue_list.empty()) throw std::invalid_argument("n_ue list is empty");
    if (n_drops < 1) throw std::invalid_argument("n_drops must be >= 1");
    for (int k : n_ue_list)
        if (k < 0) throw std::invalid_argument("n_ue values must be non-negative");
    for (const auto& layout : schemes) resource_for(layout).validate();
    rx_options.validate();
}

SimConfig desk_preset() {
    SimConfig c;
    c.resource.n_pilot_re = 24;
    c.resource.n_data_re = 720;
    c.resource.n_rx = 2;
    c.resource.transport_block_size = 160;
    c.resource.pilot_boost_db = 0.0;
    c.resource.layout = make_tsp_layout(24);
    c.schemes = {make_tsp_layout(24), make_imp_layout(24, 2)};
    c.snr_db_list = {0.0, 10.0, 20.0};
    c.n_ue_list = {6};
    c.n_drops = 1000;
    return c;
}

std::uint64_t drop_seed(std::uint64_t base_seed, const PilotLayout& layout, std::size_t snr_index, int n_ue,
                        std::int64_t drop_index) {
    const std::uint64_t tag = (static_cast<std::uint64_t>(layout.scheme) << 48) |
                              (static_cast<std::uint64_t>(layout.w) << 32) |
                              static_cast<std::uint64_t>(layout.total_pilot_re);
    std::uint64_t h = splitmix64(base_seed);
    h = mix(h, tag);
    h = mix(h, snr_index);
    h = mix(h, static_cast<std::uint64_t>(n_ue));
    h = mix(h, static_cast<std::uint64_t>(drop_index));
    return h;
}

DropResult score_drop(const std::vector<UeTransmission>& transmissions, const DecodeReport& report,
                      const ResourceConfig& config) {
    DropResult out;
    const int k_count = static_cast<int>(transmissions.size());
    const int w = config.layout.w;
    out.n_ue = k_count;
    out.ue_decoded.assign(transmissions.size(), false);
    out.decoded_pass.assign(transmissions.size(), 0);
    out.decode_attempts = report.decode_attempts;
    out.rounds_run = report.rounds_run;

    for (const auto& tx : transmissions) out.selections.push_back(tx.pilot_selection);
    out.all_pilot_collision = has_collision(out.selections, CollisionEvent::AnyPairAllPilots);
    out.per_pilot_collision.assign(static_cast<std::size_t>(w), false);
    for (int p = 0; p < w; ++p) {
        for (int i = 0; i < k_count; ++i)
            for (int j = i + 1; j < k_count; ++j)
                if (out.selections[i].indices[p] == out.selections[j].indices[p]) out.per_pilot_collision[p] = true;
    }

    for (const auto& user : report.decoded) {
        bool matched = false;
        for (int k = 0; k < k_count; ++k) {
            if (transmissions[k].payload == user.payload) {
                out.ue_decoded[k] = true;
                out.decoded_pass[k] = user.pass;
                matched = true;
            }
        }
        if (!matched) ++out.false_payloads;
    }

    for (int p = 0; p < w; ++p) {
        std::vector<bool> active(static_cast<std::size_t>(config.layout.pool_size), false);
        for (const auto& s : out.selections) active[s.indices[p]] = true;
        std::vector<bool> detected(active.size(), false);
        if (p < static_cast<int>(report.initial_detections.size()))
            for (int idx : report.initial_detections[p]) detected[idx] = true;
        for (std::size_t x = 0; x < active.size(); ++x) {
            if (active[x]) {
                ++out.aud_active;
                if (!detected[x]) ++out.aud_missed;
            } else {
                ++out.aud_inactive;
                if (detected[x]) ++out.aud_false_alarms;
            }
        }
    }
    return out;
}

DropResult run_drop(const SimConfig& config, const PilotLayout& layout, std::size_t snr_index, int n_ue,
                    std::int64_t drop_index) {
    if (snr_index >= config.snr_db_list.size()) throw std::invalid_argument("run_drop: snr index out of range");
    if (n_ue <= 0) return {};
    const ResourceConfig resource = config.resource_for(layout);
    const PilotPool pool = make_pilot_pool(static_cast<std::size_t>(layout.pool_size));
    Rng rng(drop_seed(config.base_seed, layout, snr_index, n_ue, drop_index));

    std::vector<UeTransmission> transmissions;
    transmissions.reserve(static_cast<std::size_t>(n_ue));
    for (int k = 0; k < n_ue; ++k)
        transmissions.push_back(
            build_ue_transmission(k, random_payload(resource.transport_block_size, rng), resource, pool));

    const auto channel = draw_channel(n_ue, resource, config.channel_mode, rng);
    const auto grid = apply_channel(transmissions, channel, resource, config.snr_db_list[snr_index], rng);
    RxOptions options = config.rx_options;
    options.channel_mode = config.channel_mode;
    const auto report = run_receiver(grid, resource, pool, options);
    return score_drop(transmissions, report, resource);
}

MetricsRow aggregate_row(const PilotLayout& layout, double snr_db, int n_ue, const std::vector<DropResult>& drops) {
    Tally t;
    for (const auto& d : drops) t.add(d);
    return row_from_tally(layout, snr_db, n_ue, t);
}

std::vector<MetricsRow> run_campaign(const SimConfig& config, int threads) {
    config.validate();

    struct Cell {
        std::size_t scheme;
        std::size_t snr;
        int n_ue;
    };
    std::vector<Cell> cells;
    for (std::size_t s = 0; s < config.schemes.size(); ++s)
        for (std::size_t i = 0; i < config.snr_db_list.size(); ++i)
            for (int k : config.n_ue_list)
                if (k > 0) cells.push_back({s, i, k});

    constexpr std::int64_t kChunk = 32;
    struct Task {
        std::size_t cell;
        std::int64_t first;
        std::int64_t last;
        Tally tally;
    };
    std::vector<Task> tasks;
    for (std::size_t c = 0; c < cells.size(); ++c)
        for (std::int64_t first = 0; first < config.n_drops; first += kChunk)
            tasks.push_back({c, first, std::min(first + kChunk, config.n_drops), {}});

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next++; t < tasks.size(); t = next++) {
            auto& task = tasks[t];
            const auto& cell = cells[task.cell];
            for (std::int64_t d = task.first; d < task.last; ++d)
                task.tally.add(run_drop(config, config.schemes[cell.scheme], cell.snr, cell.n_ue, d));
        }
    };

    unsigned n_threads = threads > 0 ? static_cast<unsigned>(threads) : std::max(1U, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(std::max<std::size_t>(1, tasks.size())));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    }

    std::vector<Tally> per_cell(cells.size());
    for (const auto& task : tasks) per_cell[task.cell].add(task.tally);

    std::vector<MetricsRow> rows;
    rows.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto& cell = cells[c];
        rows.push_back(
            row_from_tally(config.schemes[cell.scheme], config.snr_db_list[cell.snr], cell.n_ue, per_cell[c]));
    }
    return rows;
}

} // namespace gfsim
