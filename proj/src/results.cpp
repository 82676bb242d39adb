#include "gfsim/results.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gfsim {

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

} // namespace

std::string format_results(const std::vector<MetricsRow>& rows) {
    std::string out = kResultsHeader;
    out += '\n';
    for (const auto& r : rows) {
        out += r.scheme + ',' + std::to_string(r.w) + ',' + num(r.snr_db) + ',' + std::to_string(r.n_ue) + ',' +
               num(r.bler) + ',' + num(r.bler_ci95) + ',' + num(r.avg_attempts_per_ue) + ',' + num(r.collision_rate) +
               ',' + num(r.miss_rate) + ',' + num(r.false_alarm_rate) + ',' + std::to_string(r.n_drops) + '\n';
    }
    return out;
}

std::vector<MetricsRow> parse_results(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line != kResultsHeader) throw std::runtime_error("results: missing or wrong header");
    std::vector<MetricsRow> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != 11) throw std::runtime_error("results line " + std::to_string(line_no) + ": expected 11 fields");
        try {
            MetricsRow r;
            r.scheme = f[0];
            r.w = std::stoi(f[1]);
            r.snr_db = std::stod(f[2]);
            r.n_ue = std::stoi(f[3]);
            r.bler = std::stod(f[4]);
            r.bler_ci95 = std::stod(f[5]);
            r.avg_attempts_per_ue = std::stod(f[6]);
            r.collision_rate = std::stod(f[7]);
            r.miss_rate = std::stod(f[8]);
            r.false_alarm_rate = std::stod(f[9]);
            r.n_drops = std::stoll(f[10]);
            rows.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw std::runtime_error("results line " + std::to_string(line_no) + ": bad number");
        }
    }
    return rows;
}

void write_results(const std::vector<MetricsRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << format_results(rows);
    out.flush();
    if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

} // namespace gfsim
