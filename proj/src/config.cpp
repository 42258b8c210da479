#include "bwlan/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace bwlan {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
struct Field {
    const char* key;
    T ScenarioParams::*member;
};

constexpr Field<int> kIntFields[] = {
    {"n_nodes", &ScenarioParams::n_nodes},
    {"w_min", &ScenarioParams::w_min},
    {"w_max", &ScenarioParams::w_max},
    {"m_stages", &ScenarioParams::m_stages},
    {"n_tx_per_block", &ScenarioParams::n_tx_per_block},
};

constexpr Field<double> kDoubleFields[] = {
    {"lambda_bkps", &ScenarioParams::lambda_bkps},
    {"slot_sigma_s", &ScenarioParams::slot_sigma_s},
    {"header_bits", &ScenarioParams::header_bits},
    {"ack_bits", &ScenarioParams::ack_bits},
    {"bitrate_bps", &ScenarioParams::bitrate_bps},
    {"delta_s", &ScenarioParams::delta_s},
    {"sifs_s", &ScenarioParams::sifs_s},
    {"difs_s", &ScenarioParams::difs_s},
    {"block_header_bits", &ScenarioParams::block_header_bits},
    {"tx_bits", &ScenarioParams::tx_bits},
};

}  // namespace

double parse_double(const std::string& key, const std::string& value)
{
    const std::string v = trim(value);
    char* end = nullptr;
    errno = 0;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(d)) {
        throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
    }
    return d;
}

int parse_int(const std::string& key, const std::string& value)
{
    const std::string v = trim(value);
    char* end = nullptr;
    errno = 0;
    const long n = std::strtol(v.c_str(), &end, 10);
    if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || n < INT32_MIN ||
        n > INT32_MAX) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
    }
    return static_cast<int>(n);
}

std::vector<std::string> split_list(const std::string& value)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

KeyValues parse_key_values(std::istream& in)
{
    KeyValues kv;
    std::set<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (!seen.insert(key).second) {
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
        kv.emplace_back(std::move(key), std::move(value));
    }
    return kv;
}

KeyValues parse_key_values_text(const std::string& text)
{
    std::istringstream in(text);
    return parse_key_values(in);
}

KeyValues read_key_values_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    try {
        return parse_key_values(in);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

const std::vector<std::string>& scenario_keys()
{
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& f : kIntFields) k.emplace_back(f.key);
        for (const auto& f : kDoubleFields) k.emplace_back(f.key);
        return k;
    }();
    return keys;
}

bool apply_scenario_key(ScenarioParams& params, const std::string& key, const std::string& value)
{
    for (const auto& f : kIntFields) {
        if (key == f.key) {
            params.*f.member = parse_int(key, value);
            return true;
        }
    }
    for (const auto& f : kDoubleFields) {
        if (key == f.key) {
            params.*f.member = parse_double(key, value);
            return true;
        }
    }
    return false;
}

ScenarioParams scenario_from(const KeyValues& kv)
{
    ScenarioParams p;
    for (const auto& [key, value] : kv) {
        if (!apply_scenario_key(p, key, value)) throw ConfigError("unknown key '" + key + "'");
    }
    validate(p);
    return p;
}

std::string to_config_text(const ScenarioParams& params)
{
    std::string out;
    char buf[96];
    for (const auto& f : kIntFields) {
        std::snprintf(buf, sizeof buf, "%s = %d\n", f.key, params.*f.member);
        out += buf;
    }
    for (const auto& f : kDoubleFields) {
        std::snprintf(buf, sizeof buf, "%s = %.17g\n", f.key, params.*f.member);
        out += buf;
    }
    return out;
}

}  // namespace bwlan
