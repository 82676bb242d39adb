#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gfsim/sim.hpp"

namespace gfsim {

inline constexpr const char* kResultsHeader =
    "scheme,w,snr_db,n_ue,bler,bler_ci95,avg_attempts_per_ue,collision_rate,miss_rate,false_alarm_rate,n_drops";

std::string format_results(const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> parse_results(const std::string& csv);

/// Throws std::runtime_error naming the path on I/O failure.
void write_results(const std::vector<MetricsRow>& rows, const std::filesystem::path& path);

} // namespace gfsim
