#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bwlan {

/// Raised for any scenario, sweep or CLI input that fails validation.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Block access control approach. Every variant runs the discard strategy;
/// mining strategy I pauses on detected transmissions, strategy II pauses
/// while the node holds an unresolved block of its own.
enum class BacVariant { BAC1, BAC2, BAC3, BAC4 };

inline constexpr BacVariant kAllVariants[] = {BacVariant::BAC1, BacVariant::BAC2,
                                              BacVariant::BAC3, BacVariant::BAC4};

constexpr bool has_mining_strategy_1(BacVariant v)
{
    return v == BacVariant::BAC2 || v == BacVariant::BAC4;
}

constexpr bool has_mining_strategy_2(BacVariant v)
{
    return v == BacVariant::BAC3 || v == BacVariant::BAC4;
}

/// BAC-1/2 keep mining while a block is pending and therefore queue blocks.
constexpr bool has_block_queue(BacVariant v) { return !has_mining_strategy_2(v); }

std::string_view to_string(BacVariant v);
BacVariant parse_variant(std::string_view text);

/// Full network / MAC / PHY / blockchain parameterization. Sizes are bits,
/// durations are seconds. Defaults are the evaluation settings used
/// throughout the project (1 Mbit/s DCF, 16..1024 windows, 10 full nodes).
struct ScenarioParams {
    int n_nodes = 10;
    double lambda_bkps = 10.0;
    int w_min = 16;
    int w_max = 1024;
    int m_stages = 6;
    double slot_sigma_s = 50e-6;
    double header_bits = 400.0;
    double ack_bits = 240.0;
    double bitrate_bps = 1e6;
    double delta_s = 1e-6;
    double sifs_s = 28e-6;
    double difs_s = 128e-6;
    double block_header_bits = 640.0;
    double tx_bits = 2000.0;
    int n_tx_per_block = 10;

    double block_bits() const { return block_header_bits + n_tx_per_block * tx_bits; }

    bool operator==(const ScenarioParams&) const = default;
};

/// Throws ConfigError naming the first violated constraint.
void validate(const ScenarioParams& params);

/// W_i = min(2^i * w_min, w_max) for i in [0, m_stages].
std::vector<int> window_schedule(const ScenarioParams& params);

struct ChannelTimes {
    double t_success_s = 0.0;
    double t_collision_s = 0.0;
};

/// Busy time of a successful transmission (T_s) and of a collision (T_c).
/// Bit counts are converted to airtime here and nowhere else.
ChannelTimes channel_times(const ScenarioParams& params);

}  // namespace bwlan
