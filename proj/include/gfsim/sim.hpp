#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gfsim/channel.hpp"
#include "gfsim/pilots.hpp"
#include "gfsim/rx.hpp"
#include "gfsim/tx.hpp"

namespace gfsim {

struct SimConfig {
    /// Shared resource grid; its layout is replaced by each scheme in turn.
    ResourceConfig resource;
    std::vector<PilotLayout> schemes;
    std::vector<double> snr_db_list;
    std::vector<int> n_ue_list;
    std::int64_t n_drops = 1000;
    RxOptions rx_options;
    ChannelMode channel_mode = ChannelMode::Flat;
    std::uint64_t base_seed = 1;

    [[nodiscard]] ResourceConfig resource_for(const PilotLayout& layout) const;
    void validate() const;
};

/// Desk-scale grid: 24 pilot REs, 720 data REs, 2 Rx, 160-bit blocks.
SimConfig desk_preset();

struct DropResult {
    int n_ue = 0;
    std::vector<bool> ue_decoded;
    std::vector<int> decoded_pass; ///< blind detection pass that decoded each UE, 0 if never
    int decode_attempts = 0;
    int rounds_run = 0;
    bool all_pilot_collision = false;   ///< some pair shares every pilot
    std::vector<bool> per_pilot_collision; ///< some pair shares pilot position p
    int aud_active = 0;   ///< (position, index) pairs in use
    int aud_missed = 0;
    int aud_inactive = 0;
    int aud_false_alarms = 0;
    int false_payloads = 0; ///< CRC-valid decodes matching no transmitted payload
    std::vector<PilotSelection> selections;

    [[nodiscard]] int n_decoded() const;
};

struct MetricsRow {
    std::string scheme;
    int w = 1;
    double snr_db = 0.0;
    int n_ue = 0;
    double bler = 0.0;
    double bler_ci95 = 0.0;
    double avg_attempts_per_ue = 0.0;
    double collision_rate = 0.0; ///< fraction of drops with an all-pilot pair collision
    double miss_rate = 0.0;
    double false_alarm_rate = 0.0;
    std::int64_t n_drops = 0;

    // not part of the CSV
    std::int64_t error_events = 0;
    std::int64_t false_payloads = 0;
    [[nodiscard]] bool low_confidence() const { return error_events < 20; }

    friend bool operator==(const MetricsRow& a, const MetricsRow& b) {
        return a.scheme == b.scheme && a.w == b.w && a.snr_db == b.snr_db && a.n_ue == b.n_ue && a.bler == b.bler &&
               a.bler_ci95 == b.bler_ci95 && a.avg_attempts_per_ue == b.avg_attempts_per_ue &&
               a.collision_rate == b.collision_rate && a.miss_rate == b.miss_rate &&
               a.false_alarm_rate == b.false_alarm_rate && a.n_drops == b.n_drops;
    }
};

/// Seed of one drop, a hash of the base seed and every sweep coordinate.
std::uint64_t drop_seed(std::uint64_t base_seed, const PilotLayout& layout, std::size_t snr_index, int n_ue,
                        std::int64_t drop_index);

DropResult run_drop(const SimConfig& config, const PilotLayout& layout, std::size_t snr_index, int n_ue,
                    std::int64_t drop_index);

/// Runs one drop from explicit transmissions (payloads already chosen).
DropResult score_drop(const std::vector<UeTransmission>& transmissions, const DecodeReport& report,
                      const ResourceConfig& config);

/// Full scheme x SNR x K sweep. Rows come out in that order; K = 0 is skipped.
/// threads <= 0 uses every hardware thread. Output does not depend on it.
std::vector<MetricsRow> run_campaign(const SimConfig& config, int threads = 0);

/// Aggregates drops of a single cell into a row.
MetricsRow aggregate_row(const PilotLayout& layout, double snr_db, int n_ue, const std::vector<DropResult>& drops);

} // namespace gfsim
