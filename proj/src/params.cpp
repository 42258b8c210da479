#include "bwlan/params.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace bwlan {

std::string_view to_string(BacVariant v)
{
    switch (v) {
    case BacVariant::BAC1: return "BAC1";
    case BacVariant::BAC2: return "BAC2";
    case BacVariant::BAC3: return "BAC3";
    case BacVariant::BAC4: return "BAC4";
    }
    return "?";
}

BacVariant parse_variant(std::string_view text)
{
    std::string t;
    for (char c : text) {
        if (c == '-' || c == '_') continue;
        t.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    if (t == "BAC1" || t == "1") return BacVariant::BAC1;
    if (t == "BAC2" || t == "2") return BacVariant::BAC2;
    if (t == "BAC3" || t == "3") return BacVariant::BAC3;
    if (t == "BAC4" || t == "4") return BacVariant::BAC4;
    throw ConfigError("unknown BAC variant '" + std::string(text) + "'");
}

namespace {

void require(bool ok, const std::string& what)
{
    if (!ok) throw ConfigError("invalid scenario: " + what);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void validate(const ScenarioParams& p)
{
    require(p.n_nodes >= 2, "n_nodes must be >= 2");
    require(positive(p.lambda_bkps), "lambda_bkps must be > 0");
    require(p.w_min >= 1, "w_min must be >= 1");
    require(p.w_max >= p.w_min, "w_max must be >= w_min");
    require(p.m_stages >= 0 && p.m_stages < 31, "m_stages must be in [0, 30]");
    require((static_cast<long long>(p.w_min) << p.m_stages) <= p.w_max,
            "w_min * 2^m_stages exceeds w_max");
    require(positive(p.slot_sigma_s), "slot_sigma_s must be > 0");
    require(positive(p.header_bits), "header_bits must be > 0");
    require(positive(p.ack_bits), "ack_bits must be > 0");
    require(positive(p.bitrate_bps), "bitrate_bps must be > 0");
    require(positive(p.delta_s), "delta_s must be > 0");
    require(positive(p.sifs_s), "sifs_s must be > 0");
    require(positive(p.difs_s), "difs_s must be > 0");
    require(positive(p.block_header_bits), "block_header_bits must be > 0");
    require(positive(p.tx_bits), "tx_bits must be > 0");
    require(p.n_tx_per_block >= 1, "n_tx_per_block must be >= 1");
}

std::vector<int> window_schedule(const ScenarioParams& p)
{
    std::vector<int> w;
    w.reserve(static_cast<std::size_t>(p.m_stages) + 1);
    long long cur = p.w_min;
    for (int i = 0; i <= p.m_stages; ++i) {
        w.push_back(static_cast<int>(std::min<long long>(cur, p.w_max)));
        cur *= 2;
    }
    return w;
}

ChannelTimes channel_times(const ScenarioParams& p)
{
    const double payload_s = (p.header_bits + p.block_bits()) / p.bitrate_bps;
    const double ack_s = p.ack_bits / p.bitrate_bps;
    ChannelTimes t;
    t.t_collision_s = payload_s + p.difs_s + p.delta_s;
    t.t_success_s = payload_s + p.sifs_s + p.delta_s + ack_s + p.difs_s + p.delta_s;
    return t;
}

}  // namespace bwlan
