#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "bwlan/config.hpp"
#include "bwlan/params.hpp"
#include "bwlan/sim.hpp"

namespace bwlan {

enum class SweepAxis { NTxPerBlock, LambdaBkps, NNodes };
enum class EngineSet { Analytic, Sim, Both };

std::string_view to_string(SweepAxis a);
SweepAxis parse_axis(std::string_view text);

struct SweepSpec {
    ScenarioParams base;
    SweepAxis axis = SweepAxis::NTxPerBlock;
    std::vector<double> values;
    std::vector<BacVariant> variants;
    EngineSet engines = EngineSet::Analytic;
    int seeds = 1;
    std::uint64_t first_seed = 1;
    double horizon_s = 2000.0;
    int workers = 1;  ///< <= 0 means one per hardware thread
};

/// Keys: every scenario key plus axis, values, variants, engines, seeds,
/// first_seed, horizon_s, workers. Unknown keys are errors.
SweepSpec sweep_from(const KeyValues& kv);
void validate(const SweepSpec& spec);
std::string to_config_text(const SweepSpec& spec);

/// Scenario at one sweep point.
ScenarioParams at_axis(ScenarioParams base, SweepAxis axis, double value);

/// One CSV row. seed is -1 for analytic rows.
struct ResultRow {
    double axis_value = 0.0;
    BacVariant variant = BacVariant::BAC1;
    std::string engine;  ///< "analytic" or "sim"
    long long seed = -1;
    double theta_t = 0.0;
    double theta_s = 0.0;
    double theta_d = 0.0;
    double eta = 0.0;
    double p_m = 0.0;
    double tau = 0.0;
    bool clamped = false;
    double residual = 0.0;
    std::string status = "ok";  ///< ok | no_convergence | singular | error
};

ResultRow analytic_row(const ScenarioParams& params, BacVariant variant, double axis_value);
ResultRow sim_row(const ScenarioParams& params, BacVariant variant, double axis_value,
                  const SimOptions& options);

/// Rows come out in spec order (value, variant, analytic then seeds)
/// regardless of worker scheduling.
std::vector<ResultRow> run_sweep(const SweepSpec& spec);

extern const char* const kCsvHeader;
void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_csv(std::istream& in);

class KeyMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Tolerances {
    double rel_tau = 0.05;
    double rel_theta_t = 0.05;
    double rel_theta_s = 0.05;
    double abs_p_m = 0.02;
    /// theta_d is gated only for BAC-2; the other variants report it ungated.
    double rel_theta_d_bac2 = 0.10;
};

struct MetricComparison {
    std::string metric;
    double analytic = 0.0;
    double sim_mean = 0.0;
    double sim_se = 0.0;
    double error = 0.0;  ///< relative unless `relative` is false
    bool relative = true;
    bool gated = true;
    double tolerance = 0.0;
    bool pass = true;
    std::vector<double> per_seed;
};

struct KeyComparison {
    double axis_value = 0.0;
    BacVariant variant = BacVariant::BAC1;
    int n_seeds = 0;
    std::vector<MetricComparison> metrics;
    bool pass = true;
};

struct ComparisonReport {
    std::vector<KeyComparison> keys;
    bool pass = true;
};

/// Throws KeyMismatch unless both sides cover the same (axis_value, variant) set.
ComparisonReport compare_engines(const std::vector<ResultRow>& analytic,
                                 const std::vector<ResultRow>& sim, const Tolerances& tol);
void write_report(std::ostream& out, const ComparisonReport& report);

std::string format_number(double v);

}  // namespace bwlan
