#pragma once

#include <stdexcept>

#include "bwlan/chain.hpp"
#include "bwlan/params.hpp"

namespace bwlan {

/// theta_s + theta_d was zero, so block utilization is undefined.
class ZeroActivity : public std::runtime_error {
public:
    ZeroActivity() : std::runtime_error("block utilization undefined: no blocks generated") {}
};

struct MetricsReport {
    double theta_t = 0.0;  ///< transactions per second
    double theta_s = 0.0;  ///< successful blocks per second
    double theta_d = 0.0;  ///< discarded blocks per second
    double eta = 0.0;      ///< NaN when no block activity at all
    double p_m = 0.0;
    bool clamped = false;            ///< inherited alpha clamp
    bool theta_d_clamped = false;    ///< cancellation produced theta_d < 0
    bool p_m_clamped = false;        ///< p_m fell outside [0,1] before clamping
    bool model_boundary = false;     ///< pi_{-1,0} > 1 - tau in the binomial expansion
};

struct Throughput {
    double theta_t = 0.0;
    double theta_s = 0.0;
};

struct DiscardRate {
    double theta_d = 0.0;
    bool clamped = false;
    bool model_boundary = false;
};

struct UtilizationPause {
    double eta = 0.0;
    double p_m = 0.0;
    bool p_m_clamped = false;
};

/// Expected duration of one channel step: p0 sigma + p1 T_s + (1-p0-p1) T_c.
double mean_step_duration(const ScenarioParams& params, const ChannelProbabilities& ch);

Throughput throughput(const ScenarioParams& params, const ChainSolution& sol);

/// Variant-specific block discard rate. Negative cancellation residue is
/// clamped to zero and flagged.
DiscardRate discard_rate(const ScenarioParams& params, const ChainSolution& sol);

/// Throws ZeroActivity when theta_s + theta_d == 0.
UtilizationPause utilization_and_pause(const ScenarioParams& params, double theta_s,
                                       double theta_d);

MetricsReport evaluate_metrics(const ScenarioParams& params, const ChainSolution& sol);

}  // namespace bwlan
