#include "bwlan/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <queue>
#include <random>
#include <string>

namespace bwlan {
namespace {

constexpr double kNever = std::numeric_limits<double>::infinity();
constexpr long long kNoTarget = std::numeric_limits<long long>::max();

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// mt19937_64 output is fixed by the standard; the distributions below are
// written out so results do not depend on the standard library vendor.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    int below(int n)
    {
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return static_cast<int>(x % bound);
    }

private:
    std::mt19937_64 engine_;
};

struct Node {
    NodeMode mode = NodeMode::NoBlock;
    bool armed = false;  // holds a block whose counter is drawn at the next boundary
    int stage = 0;
    long long target = kNoTarget;  // idle-slot count at which it transmits
    long long hol_height = 0;
    std::deque<long long> queue;  // heights of blocks queued behind the head
    bool mining = false;
    std::uint64_t epoch = 0;
    double lambda = 0.0;
    Rng rng{0};

    bool has_block() const { return mode != NodeMode::NoBlock; }
    std::uint64_t held() const { return has_block() ? 1 + queue.size() : 0; }
};

struct MintEvent {
    double time;
    int node;
    std::uint64_t epoch;
};

// Earliest time first; equal times resolve by ascending node index.
struct LaterMint {
    bool operator()(const MintEvent& a, const MintEvent& b) const
    {
        if (a.time != b.time) return a.time > b.time;
        return a.node > b.node;
    }
};

struct Counters {
    std::uint64_t generated = 0;
    std::uint64_t success = 0;
    std::uint64_t discarded = 0;
    std::uint64_t tx_confirmed = 0;
    std::uint64_t collisions = 0;
    std::uint64_t transmissions = 0;
    std::uint64_t steps = 0;
    double paused_time = 0.0;
    double idle_time = 0.0;
    double success_time = 0.0;
    double collision_time = 0.0;
};

enum class Others { None, Success, Collision };

class Simulator {
public:
    Simulator(const ScenarioParams& params, BacVariant variant, const SimOptions& options)
        : p_(params), variant_(variant), opt_(options), windows_(window_schedule(params)),
          times_(channel_times(params)), exo_rng_(splitmix64(options.seed ^ 0xE70Dull))
    {
        const int n_real = opt_.exogenous ? 1 : p_.n_nodes;
        nodes_.resize(static_cast<std::size_t>(n_real));
        for (int i = 0; i < n_real; ++i) {
            Node& node = nodes_[static_cast<std::size_t>(i)];
            node.lambda = opt_.lambda_override.empty()
                              ? p_.lambda_bkps
                              : opt_.lambda_override[static_cast<std::size_t>(i)];
            node.rng = Rng(splitmix64(opt_.seed + 0x1000ull * static_cast<std::uint64_t>(i + 1)));
            if (node.lambda > 0.0) ++potential_miners_;
        }
        step_by_slot_ = opt_.exogenous.has_value() || opt_.record_states;
    }

    SimReport run();

private:
    bool discard_strategy() const { return !opt_.baseline; }
    bool strategy1() const { return !opt_.baseline && has_mining_strategy_1(variant_); }
    bool strategy2() const { return !opt_.baseline && has_mining_strategy_2(variant_); }

    bool wants_to_mine(const Node& n, bool transmitting) const
    {
        if (n.lambda <= 0.0) return false;
        if (strategy2() && n.has_block()) return false;
        // Strategy I: while the channel is busy only the transmitters mine.
        if (strategy1() && busy_ && !transmitting) return false;
        return true;
    }

    void account(double t)
    {
        c_.paused_time += (potential_miners_ - active_miners_) * (t - accounted_until_);
        accounted_until_ = t;
    }

    void set_mining(int idx, bool want, double t)
    {
        Node& n = nodes_[static_cast<std::size_t>(idx)];
        if (want == n.mining) return;
        account(t);
        ++n.epoch;
        n.mining = want;
        if (want) {
            ++active_miners_;
            mints_.push({t + n.rng.exponential(n.lambda), idx, n.epoch});
        } else {
            --active_miners_;
        }
        trace(t, idx, want ? "resume" : "pause", "");
    }

    void refresh_mining(double t)
    {
        for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
            const Node& n = nodes_[static_cast<std::size_t>(i)];
            set_mining(i, wants_to_mine(n, n.mode == NodeMode::Transmitting), t);
        }
    }

    double next_mint_time()
    {
        while (!mints_.empty()) {
            const MintEvent& e = mints_.top();
            if (nodes_[static_cast<std::size_t>(e.node)].epoch == e.epoch) return e.time;
            mints_.pop();
        }
        return kNever;
    }

    void process_mints_before(double end)
    {
        while (next_mint_time() < end) {
            const MintEvent e = mints_.top();
            mints_.pop();
            on_mint(e.node, e.time);
        }
    }

    void on_mint(int idx, double t)
    {
        Node& n = nodes_[static_cast<std::size_t>(idx)];
        ++c_.generated;
        if (!n.has_block()) {
            n.mode = NodeMode::Backoff;
            n.armed = true;
            n.stage = 0;
            n.hol_height = tip_height_ + 1;
            trace(t, idx, "mint", "head");
        } else {
            const long long parent = n.queue.empty() ? n.hol_height : n.queue.back();
            n.queue.push_back(parent + 1);
            max_queue_ = std::max<std::uint64_t>(max_queue_, n.queue.size());
            trace(t, idx, "mint", "queued=" + std::to_string(n.queue.size()));
        }
        // Reschedule from the mint instant; strategy II stops here instead.
        ++n.epoch;
        if (wants_to_mine(n, n.mode == NodeMode::Transmitting)) {
            mints_.push({t + n.rng.exponential(n.lambda), idx, n.epoch});
        } else {
            account(t);
            n.mining = false;
            --active_miners_;
            trace(t, idx, "pause", "own block");
        }
    }

    void drop_blocks(int idx, double t, const char* reason)
    {
        Node& n = nodes_[static_cast<std::size_t>(idx)];
        if (!n.has_block()) return;
        const std::uint64_t lost = n.held();
        c_.discarded += lost;
        n.queue.clear();
        n.mode = NodeMode::NoBlock;
        n.armed = false;
        n.stage = 0;
        n.target = kNoTarget;
        trace(t, idx, "discard", std::string(reason) + " blocks=" + std::to_string(lost));
    }

    void arm_pending(double t)
    {
        for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
            Node& n = nodes_[static_cast<std::size_t>(i)];
            if (!n.armed) continue;
            const int k = n.rng.below(windows_[static_cast<std::size_t>(n.stage)]);
            n.armed = false;
            n.target = idle_count_ + k;
            trace(t, i, "backoff",
                  "stage=" + std::to_string(n.stage) + " counter=" + std::to_string(k));
        }
    }

    void on_success(int idx, double t)
    {
        Node& n = nodes_[static_cast<std::size_t>(idx)];
        if (n.hol_height == tip_height_ + 1) {
            ++tip_height_;
            ++c_.success;
            c_.tx_confirmed += static_cast<std::uint64_t>(p_.n_tx_per_block);
            trace(t, idx, "success", "height=" + std::to_string(tip_height_));
        } else {
            ++c_.discarded;  // stale fork, only reachable without the discard strategy
            trace(t, idx, "discard", "stale");
        }
        if (!n.queue.empty()) {
            n.hol_height = n.queue.front();
            n.queue.pop_front();
            n.mode = NodeMode::Backoff;
            n.armed = true;
            n.stage = 0;
        } else {
            n.mode = NodeMode::NoBlock;
            n.target = kNoTarget;
        }
    }

    void on_collision(int idx, double t)
    {
        Node& n = nodes_[static_cast<std::size_t>(idx)];
        if (n.stage >= p_.m_stages) {
            n.mode = NodeMode::Transmitting;
            drop_blocks(idx, t, "retry-limit");
            return;
        }
        ++n.stage;
        n.mode = NodeMode::Backoff;
        n.armed = true;
    }

    void record_state()
    {
        const Node& n = nodes_[0];
        if (!n.has_block()) {
            ++visits_[{-1, 0}];
        } else {
            ++visits_[{n.stage, static_cast<int>(n.target - idle_count_)}];
        }
    }

    std::uint64_t held_blocks() const
    {
        std::uint64_t h = 0;
        for (const Node& n : nodes_) h += n.held();
        return h;
    }

    void trace(double t, int node, const char* kind, const std::string& detail)
    {
        if (!opt_.trace) return;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.9f %d ", t, node);
        *opt_.trace << buf << kind;
        if (!detail.empty()) *opt_.trace << ' ' << detail;
        *opt_.trace << '\n';
    }

    void idle_run(long long next_target);
    void busy_step(std::vector<int>& transmitters, Others others);

    const ScenarioParams& p_;
    BacVariant variant_;
    const SimOptions& opt_;
    std::vector<int> windows_;
    ChannelTimes times_;
    std::vector<Node> nodes_;
    std::priority_queue<MintEvent, std::vector<MintEvent>, LaterMint> mints_;
    Rng exo_rng_;
    Counters c_;
    int potential_miners_ = 0;
    int active_miners_ = 0;
    double accounted_until_ = 0.0;
    bool busy_ = false;
    bool step_by_slot_ = false;
    bool window_open_ = false;
    double now_ = 0.0;
    double origin_ = 0.0;          // end of the last busy period
    long long slots_since_origin_ = 0;
    long long idle_count_ = 0;
    long long tip_height_ = 0;
    std::uint64_t max_queue_ = 0;
    std::map<std::pair<int, int>, std::uint64_t> visits_;
};

void Simulator::idle_run(long long next_target)
{
    const double sigma = p_.slot_sigma_s;
    const double stop = window_open_ ? opt_.horizon_s : opt_.warmup_fraction * opt_.horizon_s;
    long long run = next_target == kNoTarget ? std::numeric_limits<long long>::max() / 4
                                             : next_target - idle_count_;
    const long long to_stop =
        static_cast<long long>(std::ceil((stop - origin_) / sigma)) - slots_since_origin_;
    run = std::clamp(std::min(run, to_stop), 1LL, run);
    if (step_by_slot_) run = 1;

    // A mint inside the run ends it at the following boundary so the new
    // block can draw its counter there.
    const double t_mint = next_mint_time();
    const double run_end = origin_ + static_cast<double>(slots_since_origin_ + run) * sigma;
    if (t_mint < run_end) {
        const long long slot =
            static_cast<long long>(std::floor((t_mint - origin_) / sigma)) - slots_since_origin_;
        run = std::clamp(slot, 0LL, run - 1) + 1;
    }
    const double end = origin_ + static_cast<double>(slots_since_origin_ + run) * sigma;
    process_mints_before(end);
    idle_count_ += run;
    slots_since_origin_ += run;
    c_.steps += static_cast<std::uint64_t>(run);
    c_.idle_time += end - now_;
    now_ = end;
}

void Simulator::busy_step(std::vector<int>& transmitters, Others others)
{
    const std::size_t virtual_tx =
        others == Others::None ? 0 : (others == Others::Success ? 1 : 2);
    const bool success = transmitters.size() + virtual_tx == 1;
    const double dur = success ? times_.t_success_s : times_.t_collision_s;

    for (int idx : transmitters) {
        nodes_[static_cast<std::size_t>(idx)].mode = NodeMode::Transmitting;
        ++c_.transmissions;
        trace(now_, idx, "transmit",
              "stage=" + std::to_string(nodes_[static_cast<std::size_t>(idx)].stage));
    }
    busy_ = true;
    refresh_mining(now_);
    const double end = now_ + dur;
    process_mints_before(end);

    if (success) {
        const int winner = transmitters.empty() ? -1 : transmitters.front();
        if (winner >= 0) on_success(winner, end);
        if (discard_strategy()) {
            for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
                if (i != winner) drop_blocks(i, end, "fork");
            }
        }
        c_.success_time += dur;
    } else {
        ++c_.collisions;
        for (int idx : transmitters) on_collision(idx, end);
        if (!transmitters.empty()) {
            std::string who;
            for (int idx : transmitters) who += (who.empty() ? "" : ",") + std::to_string(idx);
            trace(end, -1, "collision", who);
        }
        c_.collision_time += dur;
    }
    for (int idx : transmitters) {
        Node& n = nodes_[static_cast<std::size_t>(idx)];
        if (n.mode == NodeMode::Transmitting) n.mode = NodeMode::Backoff;
    }
    busy_ = false;
    refresh_mining(end);
    ++c_.steps;
    now_ = end;
    origin_ = end;
    slots_since_origin_ = 0;
}

SimReport Simulator::run()
{
    refresh_mining(0.0);
    const double warmup = opt_.warmup_fraction * opt_.horizon_s;
    Counters start;
    double window_start = 0.0;
    std::uint64_t in_flight_start = 0;
    std::vector<int> transmitters;

    while (true) {
        if (!window_open_ && now_ >= warmup) {
            account(now_);
            window_open_ = true;
            start = c_;
            window_start = now_;
            in_flight_start = held_blocks();
            visits_.clear();
            max_queue_ = 0;
        }
        if (now_ >= opt_.horizon_s) break;

        arm_pending(now_);
        if (opt_.record_states) record_state();

        transmitters.clear();
        long long next_target = kNoTarget;
        for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
            const Node& n = nodes_[static_cast<std::size_t>(i)];
            if (n.mode != NodeMode::Backoff) continue;
            if (n.target == idle_count_) {
                transmitters.push_back(i);
            } else {
                next_target = std::min(next_target, n.target);
            }
        }

        Others others = Others::None;
        if (opt_.exogenous) {
            const double u = exo_rng_.uniform();
            if (u < opt_.exogenous->p_s) {
                others = Others::Success;
            } else if (u < opt_.exogenous->p_s + opt_.exogenous->p_c) {
                others = Others::Collision;
            }
        }

        if (transmitters.empty() && others == Others::None) {
            idle_run(next_target);
        } else {
            busy_step(transmitters, others);
        }
    }
    account(now_);

    SimReport r;
    r.seed = opt_.seed;
    r.sim_time_s = now_ - window_start;
    r.blocks_generated = c_.generated - start.generated;
    r.blocks_success = c_.success - start.success;
    r.blocks_discarded = c_.discarded - start.discarded;
    r.tx_confirmed = c_.tx_confirmed - start.tx_confirmed;
    r.collision_count = c_.collisions - start.collisions;
    r.transmissions = c_.transmissions - start.transmissions;
    r.steps = c_.steps - start.steps;
    r.in_flight_start = in_flight_start;
    r.in_flight_end = held_blocks();
    r.max_queue_len = max_queue_;
    r.idle_time_s = c_.idle_time - start.idle_time;
    r.success_time_s = c_.success_time - start.success_time;
    r.collision_time_s = c_.collision_time - start.collision_time;

    const double t = r.sim_time_s;
    const double real_nodes = static_cast<double>(nodes_.size());
    r.empirical_tau =
        r.steps ? static_cast<double>(r.transmissions) / (real_nodes * static_cast<double>(r.steps))
                : 0.0;
    r.empirical_theta_s = t > 0 ? static_cast<double>(r.blocks_success) / t : 0.0;
    r.empirical_theta_t = t > 0 ? static_cast<double>(r.tx_confirmed) / t : 0.0;
    r.empirical_theta_d = t > 0 ? static_cast<double>(r.blocks_discarded) / t : 0.0;
    const std::uint64_t resolved = r.blocks_success + r.blocks_discarded;
    r.empirical_eta = resolved ? static_cast<double>(r.blocks_success) / static_cast<double>(resolved)
                               : std::numeric_limits<double>::quiet_NaN();
    const double potential = potential_miners_ * t;
    r.empirical_p_m = potential > 0 ? (c_.paused_time - start.paused_time) / potential : 0.0;
    r.state_visits = std::move(visits_);
    return r;
}

}  // namespace

SimReport run_simulation(const ScenarioParams& params, BacVariant variant,
                         const SimOptions& options)
{
    validate(params);
    if (!(options.horizon_s > 0.0)) throw ConfigError("horizon_s must be > 0");
    if (!(options.warmup_fraction >= 0.0 && options.warmup_fraction < 1.0)) {
        throw ConfigError("warmup_fraction must be in [0, 1)");
    }
    if (!options.lambda_override.empty()) {
        if (options.lambda_override.size() != static_cast<std::size_t>(params.n_nodes)) {
            throw ConfigError("lambda_override needs one rate per node");
        }
        for (double l : options.lambda_override) {
            if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("lambda_override must be >= 0");
        }
    }
    if (options.exogenous) {
        const auto& e = *options.exogenous;
        if (!(e.p_s >= 0.0 && e.p_c >= 0.0 && e.p_s + e.p_c < 1.0)) {
            throw ConfigError("exogenous channel needs p_s, p_c >= 0 and p_s + p_c < 1");
        }
    }
    Simulator sim(params, variant, options);
    return sim.run();
}

}  // namespace bwlan
