#include "bwlan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bwlan/numeric.hpp"

namespace bwlan {

double mean_step_duration(const ScenarioParams& params, const ChannelProbabilities& ch)
{
    const auto t = channel_times(params);
    return ch.p0 * params.slot_sigma_s + ch.p1 * t.t_success_s +
           (1.0 - ch.p0 - ch.p1) * t.t_collision_s;
}

Throughput throughput(const ScenarioParams& params, const ChainSolution& sol)
{
    const double denom = mean_step_duration(params, sol.channel);
    Throughput out;
    out.theta_s = sol.channel.p1 / denom;
    out.theta_t = out.theta_s * params.n_tx_per_block;
    return out;
}

namespace {

// Blocks minted during collisions by the j colliding transmitters only
// (strategy I freezes everyone else), plus idle-slot and success-step mining.
double strategy_one_generation_rate(const ScenarioParams& params, const ChainSolution& sol)
{
    const int n = params.n_nodes;
    const double tau = sol.tau;
    const double lambda = params.lambda_bkps;
    const auto t = channel_times(params);
    double collision_term = 0.0;
    for (int j = 2; j <= n; ++j) {
        collision_term += binomial(n, j) * std::pow(tau, j) * std::pow(1.0 - tau, n - j) * j *
                          lambda * t.t_collision_s;
    }
    const double numer = sol.channel.p0 * n * lambda * params.slot_sigma_s +
                         sol.channel.p1 * lambda * t.t_success_s + collision_term;
    return numer / mean_step_duration(params, sol.channel);
}

// Case (i): a success while the other N-1 nodes sit in no-block or backoff.
// n_b backoff nodes lose their block; no-block nodes lose whatever they mint
// during T_s unless strategy I keeps them from mining.
double success_discard_rate(const ScenarioParams& params, const ChainSolution& sol,
                            bool noblock_mints, bool& boundary)
{
    const int n = params.n_nodes;
    const double tau = sol.tau;
    const double pi_nb = sol.pi_noblock;
    const double backoff = 1.0 - tau - pi_nb;
    if (backoff < 0.0) boundary = true;
    const double mint_during_success =
        noblock_mints ? -std::expm1(-params.lambda_bkps * channel_times(params).t_success_s)
                      : 0.0;
    double sum = 0.0;
    for (int nb = 0; nb <= n - 1; ++nb) {
        const double n_s = nb + (n - 1 - nb) * mint_during_success;
        sum += n_s * n * tau * binomial(n - 1, nb) * std::pow(pi_nb, n - 1 - nb) *
               std::pow(backoff, nb);
    }
    return sum / mean_step_duration(params, sol.channel);
}

// Case (ii): colliders sitting in {m,0} drop their block. The n_c = 0 term is
// kept as written even though it contributes nothing.
double collision_discard_rate(const ScenarioParams& params, const ChainSolution& sol)
{
    const int n = params.n_nodes;
    const double tau = sol.tau;
    const double pi_m = sol.pi_transmit.back();
    double sum = 0.0;
    for (int j = 2; j <= n; ++j) {
        const double outer = binomial(n, j) * std::pow(1.0 - tau, n - j);
        for (int nc = 0; nc <= j; ++nc) {
            sum += nc * outer * binomial(j, nc) * std::pow(tau - pi_m, j - nc) *
                   std::pow(pi_m, nc);
        }
    }
    return sum / mean_step_duration(params, sol.channel);
}

}  // namespace

DiscardRate discard_rate(const ScenarioParams& params, const ChainSolution& sol)
{
    DiscardRate out;
    const double theta_s = throughput(params, sol).theta_s;
    const double lambda_n = params.lambda_bkps * params.n_nodes;
    double value = 0.0;
    switch (sol.variant) {
    case BacVariant::BAC1: value = lambda_n - theta_s; break;
    case BacVariant::BAC2: value = strategy_one_generation_rate(params, sol) - theta_s; break;
    case BacVariant::BAC3:
        value = success_discard_rate(params, sol, true, out.model_boundary) +
                collision_discard_rate(params, sol);
        break;
    case BacVariant::BAC4:
        value = success_discard_rate(params, sol, false, out.model_boundary) +
                collision_discard_rate(params, sol);
        break;
    }
    if (value < 0.0) {
        out.clamped = true;
        value = 0.0;
    }
    out.theta_d = value;
    return out;
}

UtilizationPause utilization_and_pause(const ScenarioParams& params, double theta_s,
                                       double theta_d)
{
    if (!(theta_s + theta_d > 0.0)) throw ZeroActivity();
    UtilizationPause out;
    out.eta = theta_s / (theta_s + theta_d);
    const double lambda_n = params.lambda_bkps * params.n_nodes;
    const double raw = (lambda_n - theta_s - theta_d) / lambda_n;
    out.p_m = std::clamp(raw, 0.0, 1.0);
    out.p_m_clamped = raw != out.p_m;
    return out;
}

MetricsReport evaluate_metrics(const ScenarioParams& params, const ChainSolution& sol)
{
    MetricsReport r;
    const auto th = throughput(params, sol);
    r.theta_t = th.theta_t;
    r.theta_s = th.theta_s;
    const auto dr = discard_rate(params, sol);
    r.theta_d = dr.theta_d;
    r.theta_d_clamped = dr.clamped;
    r.model_boundary = dr.model_boundary;
    r.clamped = sol.alpha_clamped;
    try {
        const auto up = utilization_and_pause(params, r.theta_s, r.theta_d);
        r.eta = up.eta;
        r.p_m = up.p_m;
        r.p_m_clamped = up.p_m_clamped;
    } catch (const ZeroActivity&) {
        r.eta = std::numeric_limits<double>::quiet_NaN();
        r.p_m = 1.0;
    }
    return r;
}

}  // namespace bwlan
