#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "bwlan/params.hpp"

namespace bwlan {

enum class NodeMode { NoBlock, Backoff, Transmitting };

/// Externally visible state of one full node. `backoff_counter` is the
/// number of idle slots left before the node transmits.
struct NodeState {
    NodeMode mode = NodeMode::NoBlock;
    int backoff_stage = 0;
    int backoff_counter = 0;
    int queue_len = 0;
    bool mining_active = false;
    double next_block_time = 0.0;
};

/// Replaces the N-1 peers of node 0 with an i.i.d. per-step channel draw:
/// another node succeeds with p_s, the others collide with p_c.
struct ExogenousChannel {
    double p_s = 0.0;
    double p_c = 0.0;
};

struct SimOptions {
    double horizon_s = 2000.0;
    std::uint64_t seed = 1;
    double warmup_fraction = 0.05;
    /// No discard strategy and no mining pauses. Exploratory only.
    bool baseline = false;
    /// Per-node lambda; empty means every node uses params.lambda_bkps.
    std::vector<double> lambda_override;
    std::optional<ExogenousChannel> exogenous;
    /// Count node 0's (stage, counter) state at every step boundary.
    bool record_states = false;
    /// One line per event: time_s node_id event_kind detail.
    std::ostream* trace = nullptr;
};

struct SimReport {
    double sim_time_s = 0.0;  ///< measured window, warm-up excluded
    std::uint64_t blocks_generated = 0;
    std::uint64_t blocks_success = 0;
    std::uint64_t blocks_discarded = 0;
    std::uint64_t tx_confirmed = 0;
    std::uint64_t collision_count = 0;
    std::uint64_t transmissions = 0;
    std::uint64_t steps = 0;
    /// Blocks held by nodes when the window opened / closed, so that
    /// generated + in_flight_start == success + discarded + in_flight_end.
    std::uint64_t in_flight_start = 0;
    std::uint64_t in_flight_end = 0;
    std::uint64_t max_queue_len = 0;
    double empirical_tau = 0.0;
    double empirical_theta_t = 0.0;
    double empirical_theta_s = 0.0;
    double empirical_theta_d = 0.0;
    double empirical_eta = 0.0;  ///< NaN when nothing was generated
    double empirical_p_m = 0.0;
    double idle_time_s = 0.0;
    double success_time_s = 0.0;
    double collision_time_s = 0.0;
    std::uint64_t seed = 0;
    /// (stage, counter) -> visits; stage -1 is the no-block state.
    std::map<std::pair<int, int>, std::uint64_t> state_visits;
};

/// Runs one seeded simulation. Deterministic in (params, variant, options).
/// Throws ConfigError on invalid input.
SimReport run_simulation(const ScenarioParams& params, BacVariant variant,
                         const SimOptions& options);

}  // namespace bwlan
