#include "bwlan/chain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "bwlan/numeric.hpp"

namespace bwlan {

SingularDenominator::SingularDenominator(const char* where, double value)
    : std::runtime_error(std::string("singular denominator in ") + where + " (" +
                         std::to_string(value) + ")"),
      value_(value)
{
}

ChannelProbabilities ChannelProbabilities::from_tau(double tau, int n_nodes)
{
    ChannelProbabilities ch;
    const int others = n_nodes - 1;
    const double idle = 1.0 - tau;
    ch.p_s = others * tau * std::pow(idle, others - 1);
    // Summing the j >= 2 binomial terms keeps p_c accurate when tau is tiny;
    // 1 - (1-tau)^(N-1) - p_s cancels catastrophically there.
    double pc = 0.0;
    for (int j = 2; j <= others; ++j) {
        pc += binomial(others, j) * std::pow(tau, j) * std::pow(idle, others - j);
    }
    ch.p_c = pc;
    ch.p = ch.p_s + ch.p_c;
    ch.p0 = std::pow(idle, n_nodes);
    ch.p1 = n_nodes * tau * std::pow(idle, n_nodes - 1);
    return ch;
}

ChannelProbabilities ChannelProbabilities::exogenous(double p_s, double p_c)
{
    ChannelProbabilities ch;
    ch.p_s = p_s;
    ch.p_c = p_c;
    ch.p = p_s + p_c;
    return ch;
}

double geometric_ratio(double d, int window)
{
    // Below 1e-9 the ratio is replaced by its limit W plus the first-order
    // correction, which is exact to O(W^3 d^2).
    if (std::abs(d) < 1e-9) {
        return window * (1.0 - 0.5 * (window - 1) * d);
    }
    return -std::expm1(window * std::log1p(-d)) / d;
}

namespace {

// 1 - x with x = (1-p)/(1-p_c), written without the subtraction of two
// nearly equal numbers.
double one_minus_x(double p, double p_c) { return (p - p_c) / (1.0 - p_c); }

// Probability that a block entering stage n reaches transmit state {n,0}.
std::vector<double> stage_survival(double p, double p_c, std::span<const int> windows)
{
    const double d = one_minus_x(p, p_c);
    std::vector<double> s(windows.size());
    for (std::size_t n = 0; n < windows.size(); ++n) {
        s[n] = geometric_ratio(d, windows[n]) / windows[n];
    }
    return s;
}

void check_channel(double p, double p_c)
{
    if (!(p < 1.0)) throw std::domain_error("exit_distribution: p must be < 1");
    if (!(p_c >= 0.0) || !(p_c <= p)) {
        throw std::domain_error("exit_distribution: need 0 <= p_c <= p");
    }
}

// Transmit-state weight of the queued chain (BAC-1/2), as printed with the
// leading p_a/p folded in: prod_{n<=i} (1-x^Wn)/Wn * (p/(1-x))^(i+1) * p_a/p.
// pi_{i,0} relates to it through f(i) * pi_{0,0} = S_0 p_a pi_{i,0}.
std::vector<double> queued_chain_f(double p, double p_c, double p_a,
                                   std::span<const int> windows)
{
    const double d = one_minus_x(p, p_c);
    std::vector<double> f(windows.size());
    double prod = 1.0;
    double p_pow = 1.0;  // p^(i+1) / p
    for (std::size_t i = 0; i < windows.size(); ++i) {
        prod *= geometric_ratio(d, windows[i]) / windows[i];
        if (i > 0) p_pow *= p;
        f[i] = prod * p_pow * p_a;
    }
    return f;
}

// Transmit-state weight of the queue-free chain (BAC-3/4):
// pi_{i,0} = f(i) pi_{-1,0}, f(x) = prod_{n<=x} (1-x^Wn)/Wn * (p/(1-x))^(x+1) * p_a/p.
std::vector<double> queue_free_chain_f(double p, double p_c, double p_a,
                                       std::span<const int> windows)
{
    const double d = one_minus_x(p, p_c);
    std::vector<double> f(windows.size());
    double survive = 1.0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        survive *= geometric_ratio(d, windows[i]) / windows[i];
        f[i] = survive * std::pow(p, static_cast<double>(i)) * p_a;
    }
    return f;
}

bool singular(double denom, double scale) { return !(denom > 1e-13 * scale); }

StationaryMass stationary_queue_free(const ChannelProbabilities& ch, double p_a,
                                     std::span<const int> windows)
{
    const double p = ch.p, p_s = ch.p_s;
    const auto f = queue_free_chain_f(p, ch.p_c, p_a, windows);
    const double sum_f = std::accumulate(f.begin(), f.end(), 0.0);
    const double denom = p_a + p_s - (1.0 - p - p_s) * sum_f - p * f.back();
    if (!(p_s > 0.0) || singular(denom, p_a + p_s)) {
        throw SingularDenominator("queue-free no-block mass", denom);
    }
    StationaryMass out;
    out.pi_noblock = p_s / denom;
    out.pi_transmit.resize(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out.pi_transmit[i] = f[i] * out.pi_noblock;
    return out;
}

StationaryMass stationary_queued(const ChannelProbabilities& ch, double p_a, double alpha,
                                 std::span<const int> windows)
{
    const double p = ch.p, p_s = ch.p_s, p_c = ch.p_c;
    if (!(p_a > 0.0)) throw SingularDenominator("queued pi_{0,0} (p_a)", p_a);

    const auto f = queued_chain_f(p, p_c, p_a, windows);
    const double sum_f = std::accumulate(f.begin(), f.end(), 0.0);
    const double pas = p_a + p_s;
    const double s0_pa = geometric_ratio(one_minus_x(p, p_c), windows[0]) / windows[0] * p_a;

    const double bracket =
        p_s / pas - (1.0 - p) * (1.0 - alpha) / pas - (1.0 - p) * alpha / p_a;
    const double denom = 1.0 + bracket * sum_f - p / pas * f.back();
    const double numer = p_s / pas * s0_pa;
    if (!(p_s > 0.0) || singular(denom, 1.0)) {
        throw SingularDenominator("queued pi_{0,0}", denom);
    }
    const double pi00 = numer / denom;

    // pi_{i,0} = prod_{n=1..i} S_n p^i pi_{0,0}
    const double d = one_minus_x(p, p_c);
    StationaryMass out;
    out.pi_transmit.resize(windows.size());
    double w = 1.0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (i > 0) w *= geometric_ratio(d, windows[i]) / windows[i] * p;
        out.pi_transmit[i] = w * pi00;
    }
    const double tau = std::accumulate(out.pi_transmit.begin(), out.pi_transmit.end(), 0.0);
    out.pi_noblock = ((1.0 - p) * (1.0 - alpha) * tau + p * out.pi_transmit.back() +
                      p_s * (1.0 - tau)) /
                     pas;
    return out;
}

}  // namespace

double leave_probability(const ScenarioParams& params, const ChannelProbabilities& ch,
                         BacVariant variant)
{
    const double idle = 1.0 - ch.p_s - ch.p_c;
    const double mint_in_slot = -std::expm1(-params.lambda_bkps * params.slot_sigma_s);
    if (has_mining_strategy_1(variant)) return idle * mint_in_slot;
    const double t_c = channel_times(params).t_collision_s;
    const double mint_in_collision = -std::expm1(-params.lambda_bkps * t_c);
    return ch.p_c * mint_in_collision + idle * mint_in_slot;
}

std::vector<double> exit_distribution(double p, double p_c, std::span<const int> windows)
{
    check_channel(p, p_c);
    const auto s = stage_survival(p, p_c, windows);
    std::vector<double> pe(windows.size());
    double reach = 1.0;  // prod S_n * p^i: reaches {i,0} without being discarded
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (i > 0) reach *= p;
        reach *= s[i];
        pe[i] = reach * (1.0 - p);
    }
    return pe;
}

QueueOccupancy queue_occupancy(const ScenarioParams& params, const ChannelProbabilities& ch,
                               BacVariant variant)
{
    QueueOccupancy q;
    if (!has_block_queue(variant)) return q;
    if (!(ch.p < 1.0)) throw std::domain_error("queue_occupancy: p must be < 1");

    const auto windows = window_schedule(params);
    const auto pe = exit_distribution(ch.p, ch.p_c, windows);
    const auto times = channel_times(params);
    const double sigma = params.slot_sigma_s;
    // Strategy I nodes only count idle slots towards queue growth.
    const double per_slot = has_mining_strategy_1(variant)
                                ? sigma
                                : sigma + ch.p_c / (1.0 - ch.p) * times.t_collision_s;

    double t_q = 0.0;
    double half_windows = 0.0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        half_windows += (windows[i] - 1) / 2.0;
        t_q += pe[i] * (static_cast<double>(i) * times.t_collision_s + times.t_success_s +
                        half_windows * per_slot);
    }
    q.t_q_s = t_q;
    q.alpha_raw = params.lambda_bkps * t_q;
    q.alpha = std::clamp(q.alpha_raw, 0.0, 1.0);
    q.clamped = q.alpha_raw > 1.0;
    return q;
}

StationaryMass stationary_closed_form(const ScenarioParams& params,
                                      const ChannelProbabilities& ch, double p_a,
                                      double alpha, BacVariant variant)
{
    const auto windows = window_schedule(params);
    if (has_block_queue(variant)) return stationary_queued(ch, p_a, alpha, windows);
    return stationary_queue_free(ch, p_a, windows);
}

ChainSolution evaluate_at(const ScenarioParams& params, BacVariant variant, double tau)
{
    ChainSolution s;
    s.variant = variant;
    s.channel = ChannelProbabilities::from_tau(tau, params.n_nodes);
    s.p_a = leave_probability(params, s.channel, variant);
    const auto q = queue_occupancy(params, s.channel, variant);
    s.alpha = q.alpha;
    s.alpha_raw = q.alpha_raw;
    s.alpha_clamped = q.clamped;
    s.t_q_s = q.t_q_s;
    s.p_exit = exit_distribution(s.channel.p, s.channel.p_c, window_schedule(params));
    auto mass = stationary_closed_form(params, s.channel, s.p_a, s.alpha, variant);
    s.pi_noblock = mass.pi_noblock;
    s.pi_transmit = std::move(mass.pi_transmit);
    s.tau = std::accumulate(s.pi_transmit.begin(), s.pi_transmit.end(), 0.0);
    return s;
}

ChainSolution solve_tau(const ScenarioParams& params, BacVariant variant,
                        const SolverOptions& options)
{
    validate(params);
    const double gamma = options.damping;
    double tau = options.tau0 >= 0.0 ? options.tau0 : 2.0 / (params.w_min + 1.0);

    ChainSolution best;
    double best_residual = INFINITY;
    int it = 0;
    int polish = 0;
    bool reached = false;
    while (it < options.max_iterations) {
        ChainSolution s = evaluate_at(params, variant, tau);
        ++it;
        const double mapped = s.tau;
        const double residual = std::abs(mapped - tau);
        if (residual < best_residual) {
            best_residual = residual;
            best = std::move(s);
            best.residual = residual;
            best.iterations = it;
        }
        if (residual < options.tol) reached = true;
        // Once within tolerance keep iterating a little so the stored tau
        // and the stored channel probabilities agree to round-off.
        if (reached && (residual <= 4e-16 * tau || ++polish > 200)) break;
        tau = (1.0 - gamma) * tau + gamma * mapped;
    }
    best.converged = reached;
    return best;
}

}  // namespace bwlan
