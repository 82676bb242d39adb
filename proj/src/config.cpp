#include "gfsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace gfsim {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

template <typename T>
T parse_number(const std::string& text, int line, const std::string& key) {
    T value{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if constexpr (std::is_floating_point_v<T>) {
        char* end = nullptr;
        const std::string copy(text);
        value = std::strtod(copy.c_str(), &end);
        if (copy.empty() || end != copy.c_str() + copy.size())
            throw ConfigError(line, "bad number for '" + key + "': " + text);
    } else {
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr != last) throw ConfigError(line, "bad integer for '" + key + "': " + text);
    }
    return value;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, int line, const std::string& key) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number<T>(trim(item), line, key));
    if (out.empty()) throw ConfigError(line, "empty list for '" + key + "'");
    return out;
}

struct SchemeBlock {
    int line = 0;
    std::optional<std::string> scheme;
    std::optional<int> w;
};

} // namespace

SimConfig parse_config(const std::string& text) {
    SimConfig cfg;
    cfg.schemes.clear();
    cfg.snr_db_list.clear();
    cfg.n_ue_list.clear();

    std::vector<SchemeBlock> blocks;
    SchemeBlock global;
    std::map<std::string, int> seen;

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (lower(line) != "[scheme]") throw ConfigError(line_no, "unknown section " + line);
            blocks.push_back({line_no, {}, {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(line_no, "expected 'key = value'");
        const std::string key = lower(trim(std::string_view(line).substr(0, eq)));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw ConfigError(line_no, "missing key");
        if (value.empty()) throw ConfigError(line_no, "missing value for '" + key + "'");

        SchemeBlock& target = blocks.empty() ? global : blocks.back();
        if (key == "scheme" || key == "w") {
            if (key == "scheme") {
                const auto v = lower(value);
                if (v != "tsp" && v != "imp") throw ConfigError(line_no, "scheme must be tsp or imp");
                if (target.scheme) throw ConfigError(line_no, "duplicate key 'scheme'");
                target.scheme = v;
            } else {
                if (target.w) throw ConfigError(line_no, "duplicate key 'w'");
                target.w = parse_number<int>(value, line_no, key);
            }
            if (target.line == 0) target.line = line_no;
            continue;
        }
        if (!blocks.empty()) throw ConfigError(line_no, "key '" + key + "' is not allowed inside [scheme]");
        if (seen.count(key)) throw ConfigError(line_no, "duplicate key '" + key + "'");
        seen[key] = line_no;

        if (key == "n_pilot_re") {
            cfg.resource.n_pilot_re = parse_number<int>(value, line_no, key);
        } else if (key == "n_data_re") {
            cfg.resource.n_data_re = parse_number<int>(value, line_no, key);
        } else if (key == "n_rx") {
            cfg.resource.n_rx = parse_number<int>(value, line_no, key);
        } else if (key == "snr_db") {
            cfg.snr_db_list = parse_list<double>(value, line_no, key);
        } else if (key == "n_ue") {
            cfg.n_ue_list = parse_list<int>(value, line_no, key);
        } else if (key == "n_drops") {
            cfg.n_drops = parse_number<std::int64_t>(value, line_no, key);
        } else if (key == "rx_procedure") {
            const auto v = lower(value);
            if (v == "serial") cfg.rx_options.procedure = RxProcedure::Serial;
            else if (v == "parallel") cfg.rx_options.procedure = RxProcedure::Parallel;
            else throw ConfigError(line_no, "rx_procedure must be serial or parallel");
        } else if (key == "ic_ce_mode") {
            const auto v = lower(value);
            if (v == "pilot") cfg.rx_options.ic_ce_mode = IcEstimation::PilotOnly;
            else if (v == "data_aided") cfg.rx_options.ic_ce_mode = IcEstimation::DataAided;
            else throw ConfigError(line_no, "ic_ce_mode must be pilot or data_aided");
        } else if (key == "duplicate_policy") {
            const auto v = lower(value);
            if (v == "stronger_pilot") cfg.rx_options.duplicate_policy = DuplicatePolicy::StrongerPilot;
            else if (v == "average") cfg.rx_options.duplicate_policy = DuplicatePolicy::Average;
            else throw ConfigError(line_no, "duplicate_policy must be stronger_pilot or average");
        } else if (key == "ic_pilot_choice") {
            const auto v = lower(value);
            if (v == "detecting") cfg.rx_options.ic_pilot_choice = IcPilotChoice::Detecting;
            else if (v == "best_fit") cfg.rx_options.ic_pilot_choice = IcPilotChoice::BestFit;
            else throw ConfigError(line_no, "ic_pilot_choice must be detecting or best_fit");
        } else if (key == "aud_gamma") {
            cfg.rx_options.aud_gamma = parse_number<double>(value, line_no, key);
        } else if (key == "max_rounds") {
            cfg.rx_options.max_rounds = parse_number<int>(value, line_no, key);
        } else if (key == "channel_mode") {
            const auto v = lower(value);
            if (v == "flat") cfg.channel_mode = ChannelMode::Flat;
            else if (v == "per_block") cfg.channel_mode = ChannelMode::PerBlock;
            else throw ConfigError(line_no, "channel_mode must be flat or per_block");
        } else if (key == "pilot_boost_db") {
            cfg.resource.pilot_boost_db = parse_number<double>(value, line_no, key);
        } else if (key == "transport_block_size") {
            cfg.resource.transport_block_size = parse_number<int>(value, line_no, key);
        } else if (key == "base_seed") {
            cfg.base_seed = parse_number<std::uint64_t>(value, line_no, key);
        } else {
            throw ConfigError(line_no, "unknown key '" + key + "'");
        }
    }

    if (blocks.empty()) {
        if (!global.scheme && !global.w) throw ConfigError(0, "no scheme configured");
        blocks.push_back(global);
    } else if (global.scheme || global.w) {
        throw ConfigError(global.line, "scheme keys must be inside a [scheme] section when sections are used");
    }

    for (const auto& b : blocks) {
        if (!b.scheme) throw ConfigError(b.line, "[scheme] block without 'scheme'");
        try {
            if (*b.scheme == "tsp") {
                if (b.w && *b.w != 1) throw ConfigError(b.line, "tsp requires w = 1");
                cfg.schemes.push_back(make_tsp_layout(cfg.resource.n_pilot_re));
            } else {
                cfg.schemes.push_back(make_imp_layout(cfg.resource.n_pilot_re, b.w.value_or(2)));
            }
        } catch (const std::invalid_argument& e) {
            throw ConfigError(b.line, e.what());
        }
    }
    cfg.resource.layout = cfg.schemes.front();
    if (cfg.snr_db_list.empty()) throw ConfigError(0, "missing key 'snr_db'");
    if (cfg.n_ue_list.empty()) throw ConfigError(0, "missing key 'n_ue'");
    cfg.rx_options.channel_mode = cfg.channel_mode;

    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(0, e.what());
    }
    return cfg;
}

SimConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace gfsim
