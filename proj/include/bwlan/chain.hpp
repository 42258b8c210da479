#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "bwlan/params.hpp"

namespace bwlan {

/// A closed-form denominator came out non-positive. The offending value is
/// kept so callers can report it.
class SingularDenominator : public std::runtime_error {
public:
    SingularDenominator(const char* where, double value);
    double value() const { return value_; }

private:
    double value_;
};

/// Per-step channel outcome probabilities as seen by one tagged node.
struct ChannelProbabilities {
    double p = 0.0;    ///< a transmitted block collides
    double p_s = 0.0;  ///< exactly one other node succeeds
    double p_c = 0.0;  ///< two or more other nodes collide
    double p0 = 0.0;   ///< slot idle, (1-tau)^N
    double p1 = 0.0;   ///< exactly one transmission, N tau (1-tau)^(N-1)

    static ChannelProbabilities from_tau(double tau, int n_nodes);
    /// Exogenous (p_s, p_c) pair; p0/p1 are left at zero.
    static ChannelProbabilities exogenous(double p_s, double p_c);
};

struct ChainSolution {
    BacVariant variant = BacVariant::BAC1;
    double tau = 0.0;
    ChannelProbabilities channel;
    double p_a = 0.0;
    double alpha = 0.0;  ///< clamped to [0,1]; always 0 for BAC-3/4
    double t_q_s = 0.0;  ///< always 0 for BAC-3/4
    std::vector<double> p_exit;
    double pi_noblock = 0.0;
    std::vector<double> pi_transmit;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
    bool alpha_clamped = false;  ///< lambda * T_q exceeded 1
    double alpha_raw = 0.0;
};

struct StationaryMass {
    double pi_noblock = 0.0;
    std::vector<double> pi_transmit;  ///< pi_{i,0}, i in [0, m]
};

struct QueueOccupancy {
    double t_q_s = 0.0;
    double alpha = 0.0;
    double alpha_raw = 0.0;
    bool clamped = false;
};

struct SolverOptions {
    double damping = 0.5;
    double tol = 1e-10;
    int max_iterations = 100000;
    double tau0 = -1.0;  ///< negative selects 2 / (w_min + 1)
};

/// (1 - x^W) / (1 - x) evaluated from d = 1 - x, finite as d -> 0.
double geometric_ratio(double one_minus_x, int window);

/// Probability of leaving the no-block state in one chain step
/// (p_a for BAC-1/3, the strategy-I reduced form for BAC-2/4).
double leave_probability(const ScenarioParams& params, const ChannelProbabilities& ch,
                         BacVariant variant);

/// p_e(i): the block leaves backoff through a success in transmit state {i,0}.
/// Throws std::domain_error unless 0 <= p_c <= p < 1.
std::vector<double> exit_distribution(double p, double p_c, std::span<const int> windows);

/// Expected backoff+transmit sojourn T_q and queue-nonempty probability
/// alpha = lambda T_q (clamped). BAC-3/4 have no queue and get zeros.
QueueOccupancy queue_occupancy(const ScenarioParams& params, const ChannelProbabilities& ch,
                               BacVariant variant);

/// Closed-form stationary mass of the no-block state and of every transmit
/// state. `alpha` is ignored for BAC-3/4.
StationaryMass stationary_closed_form(const ScenarioParams& params,
                                      const ChannelProbabilities& ch, double p_a,
                                      double alpha, BacVariant variant);

/// One evaluation of the self-consistency map tau -> tau'.
ChainSolution evaluate_at(const ScenarioParams& params, BacVariant variant, double tau);

/// Damped fixed-point iteration for the transmit probability. Never throws on
/// non-convergence; check `converged`. SingularDenominator propagates.
ChainSolution solve_tau(const ScenarioParams& params, BacVariant variant,
                        const SolverOptions& options = {});

}  // namespace bwlan
