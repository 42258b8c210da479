#include "bwlan/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "bwlan/chain.hpp"
#include "bwlan/metrics.hpp"

namespace bwlan {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool integral(double v) { return std::isfinite(v) && std::floor(v) == v; }

std::string_view to_string(EngineSet e)
{
    switch (e) {
    case EngineSet::Analytic: return "analytic";
    case EngineSet::Sim: return "sim";
    case EngineSet::Both: return "both";
    }
    return "?";
}

EngineSet parse_engines(const std::string& s)
{
    if (s == "analytic") return EngineSet::Analytic;
    if (s == "sim") return EngineSet::Sim;
    if (s == "both") return EngineSet::Both;
    throw ConfigError("engines must be analytic, sim or both, got '" + s + "'");
}

}  // namespace

std::string format_number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string_view to_string(SweepAxis a)
{
    switch (a) {
    case SweepAxis::NTxPerBlock: return "n_tx_per_block";
    case SweepAxis::LambdaBkps: return "lambda_bkps";
    case SweepAxis::NNodes: return "n_nodes";
    }
    return "?";
}

SweepAxis parse_axis(std::string_view text)
{
    for (SweepAxis a : {SweepAxis::NTxPerBlock, SweepAxis::LambdaBkps, SweepAxis::NNodes}) {
        if (text == to_string(a)) return a;
    }
    throw ConfigError("axis must be n_tx_per_block, lambda_bkps or n_nodes, got '" +
                      std::string(text) + "'");
}

ScenarioParams at_axis(ScenarioParams base, SweepAxis axis, double value)
{
    switch (axis) {
    case SweepAxis::NTxPerBlock: base.n_tx_per_block = static_cast<int>(value); break;
    case SweepAxis::LambdaBkps: base.lambda_bkps = value; break;
    case SweepAxis::NNodes: base.n_nodes = static_cast<int>(value); break;
    }
    return base;
}

SweepSpec sweep_from(const KeyValues& kv)
{
    SweepSpec s;
    bool have_variants = false;
    for (const auto& [key, value] : kv) {
        if (apply_scenario_key(s.base, key, value)) continue;
        if (key == "axis") {
            s.axis = parse_axis(value);
        } else if (key == "values") {
            for (const auto& item : split_list(value)) s.values.push_back(parse_double(key, item));
        } else if (key == "variants") {
            have_variants = true;
            for (const auto& item : split_list(value)) s.variants.push_back(parse_variant(item));
        } else if (key == "engines") {
            s.engines = parse_engines(value);
        } else if (key == "seeds") {
            s.seeds = parse_int(key, value);
        } else if (key == "first_seed") {
            const int v = parse_int(key, value);
            if (v < 0) throw ConfigError("first_seed must be >= 0");
            s.first_seed = static_cast<std::uint64_t>(v);
        } else if (key == "horizon_s") {
            s.horizon_s = parse_double(key, value);
        } else if (key == "workers") {
            s.workers = parse_int(key, value);
        } else {
            throw ConfigError("unknown key '" + key + "'");
        }
    }
    if (!have_variants) s.variants.assign(std::begin(kAllVariants), std::end(kAllVariants));
    validate(s);
    return s;
}

void validate(const SweepSpec& s)
{
    if (s.values.empty()) throw ConfigError("sweep values must be nonempty");
    for (std::size_t i = 1; i < s.values.size(); ++i) {
        if (!(s.values[i] > s.values[i - 1])) {
            throw ConfigError("sweep values must be strictly increasing");
        }
    }
    if (s.variants.empty()) throw ConfigError("sweep variants must be nonempty");
    if (s.engines != EngineSet::Analytic) {
        if (s.seeds < 1) throw ConfigError("seeds must be >= 1 when the sim engine is selected");
        if (!(s.horizon_s > 0.0)) throw ConfigError("horizon_s must be > 0");
    }
    for (double v : s.values) {
        if (s.axis != SweepAxis::LambdaBkps && !integral(v)) {
            throw ConfigError(std::string(to_string(s.axis)) + " values must be integers");
        }
        validate(at_axis(s.base, s.axis, v));
    }
}

std::string to_config_text(const SweepSpec& s)
{
    std::string out = to_config_text(s.base);
    out += "axis = " + std::string(to_string(s.axis)) + "\n";
    out += "values = ";
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        out += (i ? ", " : "") + format_number(s.values[i]);
    }
    out += "\nvariants = ";
    for (std::size_t i = 0; i < s.variants.size(); ++i) {
        out += (i ? ", " : "") + std::string(to_string(s.variants[i]));
    }
    out += "\nengines = " + std::string(to_string(s.engines)) + "\n";
    out += "seeds = " + std::to_string(s.seeds) + "\n";
    out += "first_seed = " + std::to_string(s.first_seed) + "\n";
    out += "horizon_s = " + format_number(s.horizon_s) + "\n";
    out += "workers = " + std::to_string(s.workers) + "\n";
    return out;
}

ResultRow analytic_row(const ScenarioParams& params, BacVariant variant, double axis_value)
{
    ResultRow r;
    r.axis_value = axis_value;
    r.variant = variant;
    r.engine = "analytic";
    r.seed = -1;
    try {
        const ChainSolution sol = solve_tau(params, variant);
        const MetricsReport m = evaluate_metrics(params, sol);
        r.theta_t = m.theta_t;
        r.theta_s = m.theta_s;
        r.theta_d = m.theta_d;
        r.eta = m.eta;
        r.p_m = m.p_m;
        r.tau = sol.tau;
        r.clamped = sol.alpha_clamped;
        r.residual = sol.residual;
        r.status = sol.converged ? "ok" : "no_convergence";
    } catch (const SingularDenominator&) {
        r.theta_t = r.theta_s = r.theta_d = r.eta = r.p_m = r.tau = r.residual = kNaN;
        r.status = "singular";
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        r.theta_t = r.theta_s = r.theta_d = r.eta = r.p_m = r.tau = r.residual = kNaN;
        r.status = "error";
    }
    return r;
}

ResultRow sim_row(const ScenarioParams& params, BacVariant variant, double axis_value,
                  const SimOptions& options)
{
    const SimReport rep = run_simulation(params, variant, options);
    ResultRow r;
    r.axis_value = axis_value;
    r.variant = variant;
    r.engine = "sim";
    r.seed = static_cast<long long>(options.seed);
    r.theta_t = rep.empirical_theta_t;
    r.theta_s = rep.empirical_theta_s;
    r.theta_d = rep.empirical_theta_d;
    r.eta = rep.empirical_eta;
    r.p_m = rep.empirical_p_m;
    r.tau = rep.empirical_tau;
    return r;
}

std::vector<ResultRow> run_sweep(const SweepSpec& spec)
{
    validate(spec);
    struct Task {
        double value;
        BacVariant variant;
        long long seed;  // -1: analytic
    };
    std::vector<Task> tasks;
    for (double v : spec.values) {
        for (BacVariant var : spec.variants) {
            if (spec.engines != EngineSet::Sim) tasks.push_back({v, var, -1});
            if (spec.engines != EngineSet::Analytic) {
                for (int k = 0; k < spec.seeds; ++k) {
                    tasks.push_back({v, var, static_cast<long long>(spec.first_seed) + k});
                }
            }
        }
    }

    std::vector<ResultRow> rows(tasks.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            const Task& t = tasks[i];
            const ScenarioParams p = at_axis(spec.base, spec.axis, t.value);
            if (t.seed < 0) {
                rows[i] = analytic_row(p, t.variant, t.value);
            } else {
                SimOptions o;
                o.horizon_s = spec.horizon_s;
                o.seed = static_cast<std::uint64_t>(t.seed);
                rows[i] = sim_row(p, t.variant, t.value, o);
            }
        }
    };
    int workers = spec.workers > 0 ? spec.workers
                                   : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min<int>(workers, static_cast<int>(tasks.size()));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    return rows;
}

const char* const kCsvHeader =
    "axis_value,variant,engine,seed,theta_t,theta_s,theta_d,eta,p_m,tau,clamped_flag,residual,status";

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows)
{
    out << kCsvHeader << '\n';
    for (const auto& r : rows) {
        out << format_number(r.axis_value) << ',' << to_string(r.variant) << ',' << r.engine << ','
            << r.seed << ',' << format_number(r.theta_t) << ',' << format_number(r.theta_s) << ','
            << format_number(r.theta_d) << ',' << format_number(r.eta) << ','
            << format_number(r.p_m) << ',' << format_number(r.tau) << ',' << (r.clamped ? 1 : 0)
            << ',' << format_number(r.residual) << ',' << r.status << '\n';
    }
}

std::vector<ResultRow> read_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw ConfigError("CSV header does not match the result schema");
    }
    std::vector<ResultRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 13) {
            throw ConfigError("CSV line " + std::to_string(lineno) + ": expected 13 columns");
        }
        auto num = [&](int i) {
            if (f[static_cast<std::size_t>(i)] == "nan" || f[static_cast<std::size_t>(i)] == "-nan") return kNaN;
            return parse_double("column " + std::to_string(i), f[static_cast<std::size_t>(i)]);
        };
        ResultRow r;
        r.axis_value = num(0);
        r.variant = parse_variant(f[1]);
        r.engine = f[2];
        if (r.engine != "analytic" && r.engine != "sim") {
            throw ConfigError("CSV line " + std::to_string(lineno) + ": unknown engine");
        }
        r.seed = parse_int("seed", f[3]);
        r.theta_t = num(4);
        r.theta_s = num(5);
        r.theta_d = num(6);
        r.eta = num(7);
        r.p_m = num(8);
        r.tau = num(9);
        r.clamped = f[10] == "1";
        r.residual = num(11);
        r.status = f[12];
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace {

using Key = std::pair<double, int>;

Key key_of(const ResultRow& r) { return {r.axis_value, static_cast<int>(r.variant)}; }

MetricComparison compare_metric(const std::string& name, double analytic,
                                const std::vector<double>& samples, bool relative, bool gated,
                                double tolerance)
{
    MetricComparison m;
    m.metric = name;
    m.analytic = analytic;
    m.per_seed = samples;
    const double n = static_cast<double>(samples.size());
    double sum = 0.0;
    for (double x : samples) sum += x;
    m.sim_mean = sum / n;
    double ss = 0.0;
    for (double x : samples) ss += (x - m.sim_mean) * (x - m.sim_mean);
    m.sim_se = samples.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    m.relative = relative;
    m.gated = gated;
    m.tolerance = tolerance;
    const double diff = std::abs(m.sim_mean - analytic);
    if (!relative) {
        m.error = diff;
    } else if (analytic != 0.0) {
        m.error = diff / std::abs(analytic);
    } else {
        m.error = diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    m.pass = !gated || m.error <= tolerance;
    return m;
}

}  // namespace

ComparisonReport compare_engines(const std::vector<ResultRow>& analytic,
                                 const std::vector<ResultRow>& sim, const Tolerances& tol)
{
    std::map<Key, const ResultRow*> a_rows;
    for (const auto& r : analytic) {
        if (r.engine != "analytic") continue;
        if (!a_rows.emplace(key_of(r), &r).second) {
            throw KeyMismatch("duplicate analytic row for one (axis_value, variant)");
        }
    }
    std::map<Key, std::vector<const ResultRow*>> s_rows;
    for (const auto& r : sim) {
        if (r.engine == "sim") s_rows[key_of(r)].push_back(&r);
    }
    if (a_rows.empty() || a_rows.size() != s_rows.size()) {
        throw KeyMismatch("analytic and sim rows cover different (axis_value, variant) keys");
    }
    ComparisonReport report;
    for (const auto& [key, a] : a_rows) {
        const auto it = s_rows.find(key);
        if (it == s_rows.end()) {
            throw KeyMismatch("no sim rows for axis_value " + format_number(key.first) + " " +
                              std::string(to_string(a->variant)));
        }
        auto samples = [&](double ResultRow::*field) {
            std::vector<double> v;
            for (const ResultRow* r : it->second) v.push_back(r->*field);
            return v;
        };
        KeyComparison k;
        k.axis_value = key.first;
        k.variant = a->variant;
        k.n_seeds = static_cast<int>(it->second.size());
        k.metrics.push_back(
            compare_metric("tau", a->tau, samples(&ResultRow::tau), true, true, tol.rel_tau));
        k.metrics.push_back(compare_metric("theta_t", a->theta_t, samples(&ResultRow::theta_t),
                                           true, true, tol.rel_theta_t));
        k.metrics.push_back(compare_metric("theta_s", a->theta_s, samples(&ResultRow::theta_s),
                                           true, true, tol.rel_theta_s));
        k.metrics.push_back(compare_metric("p_m", a->p_m, samples(&ResultRow::p_m), false, true,
                                           tol.abs_p_m));
        const bool gate_d = a->variant == BacVariant::BAC2;
        k.metrics.push_back(compare_metric("theta_d", a->theta_d, samples(&ResultRow::theta_d),
                                           true, gate_d, tol.rel_theta_d_bac2));
        for (const auto& m : k.metrics) k.pass = k.pass && m.pass;
        report.pass = report.pass && k.pass;
        report.keys.push_back(std::move(k));
    }
    return report;
}

void write_report(std::ostream& out, const ComparisonReport& report)
{
    char buf[256];
    for (const auto& k : report.keys) {
        std::snprintf(buf, sizeof buf, "axis_value=%s variant=%s seeds=%d %s\n",
                      format_number(k.axis_value).c_str(), std::string(to_string(k.variant)).c_str(),
                      k.n_seeds, k.pass ? "PASS" : "FAIL");
        out << buf;
        for (const auto& m : k.metrics) {
            std::snprintf(buf, sizeof buf,
                          "  %-8s analytic=%-14.9g sim=%-14.9g se=%-12.4g %s_err=%-10.4g tol=%-6.3g %s\n",
                          m.metric.c_str(), m.analytic, m.sim_mean, m.sim_se,
                          m.relative ? "rel" : "abs", m.error, m.tolerance,
                          !m.gated ? "info" : (m.pass ? "ok" : "FAIL"));
            out << buf;
            if (k.variant == BacVariant::BAC2 && m.metric == "theta_d") {
                out << "    per-seed:";
                for (double x : m.per_seed) out << ' ' << format_number(x);
                out << '\n';
            }
        }
    }
    out << (report.pass ? "overall PASS\n" : "overall FAIL\n");
}

}  // namespace bwlan
