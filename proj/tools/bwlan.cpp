// bwlan: command-line front end for the analytic model and the simulator.
//
//   bwlan solve    [--config F] [--variant V]... [--detail] [scenario flags]
//   bwlan simulate [--config F] --variant V [--seed S] [--horizon-s T] [--trace F]
//   bwlan sweep    --config F [--out F] [--workers N] [scenario/sweep flags]
//   bwlan compare  ANALYTIC.csv [SIM.csv] [--report F] [tolerance flags]
//
// Exit status: 0 ok, 1 invalid input, 2 solver did not converge, 3 comparison failed.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bwlan/chain.hpp"
#include "bwlan/config.hpp"
#include "bwlan/metrics.hpp"
#include "bwlan/sim.hpp"
#include "bwlan/sweep.hpp"

#ifndef BWLAN_VERSION
#define BWLAN_VERSION "0.0.0"
#endif

using namespace bwlan;

namespace {

enum Exit { kOk = 0, kInvalid = 1, kNoConvergence = 2, kCompareFailed = 3 };

std::string dashed(std::string key)
{
    for (char& c : key) {
        if (c == '_') c = '-';
    }
    return "--" + key;
}

// Dash-case flag per config key; values are applied after the config file.
struct Overrides {
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;

    void add(CLI::App* app, const std::vector<std::string>& keys)
    {
        for (const auto& k : keys) {
            options[k] = app->add_option(dashed(k), values[k], "override config key " + k);
        }
    }

    KeyValues merged(const KeyValues& base) const
    {
        KeyValues out;
        for (const auto& [k, v] : base) {
            const auto it = options.find(k);
            if (it != options.end() && it->second->count() > 0) continue;
            out.emplace_back(k, v);
        }
        for (const auto& [k, opt] : options) {
            if (opt->count() > 0) out.emplace_back(k, values.at(k));
        }
        return out;
    }
};

KeyValues load(const std::string& path)
{
    return path.empty() ? KeyValues{} : read_key_values_file(path);
}

std::string utc_now()
{
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write '" + path + "'");
    return f;
}

void print_detail(const ChainSolution& s)
{
    std::printf("variant %s\n", std::string(to_string(s.variant)).c_str());
    std::printf("  tau        %.12g\n", s.tau);
    std::printf("  p p_s p_c  %.9g %.9g %.9g\n", s.channel.p, s.channel.p_s, s.channel.p_c);
    std::printf("  p0 p1      %.9g %.9g\n", s.channel.p0, s.channel.p1);
    std::printf("  p_a        %.9g\n", s.p_a);
    std::printf("  T_q alpha  %.9g %.9g%s\n", s.t_q_s, s.alpha, s.alpha_clamped ? " (clamped)" : "");
    std::printf("  pi_noblock %.9g\n", s.pi_noblock);
    std::printf("  pi_i0     ");
    for (double v : s.pi_transmit) std::printf(" %.6g", v);
    std::printf("\n  p_e       ");
    for (double v : s.p_exit) std::printf(" %.6g", v);
    std::printf("\n  iterations %d residual %.3g %s\n", s.iterations, s.residual,
                s.converged ? "converged" : "NOT CONVERGED");
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Blockchain-over-WLAN performance model and simulator"};
    app.set_version_flag("--version", BWLAN_VERSION);
    app.require_subcommand(1);

    // solve
    auto* solve = app.add_subcommand("solve", "analytic fixed point and metrics at one point");
    std::string solve_config;
    std::vector<std::string> solve_variants;
    bool detail = false;
    Overrides solve_over;
    solve->add_option("--config", solve_config, "scenario config file");
    solve->add_option("--variant", solve_variants, "BAC1..BAC4, repeatable (default all)");
    solve->add_flag("--detail", detail, "print the full chain solution instead of CSV");
    solve_over.add(solve, scenario_keys());

    // simulate
    auto* simulate = app.add_subcommand("simulate", "one seeded simulation run");
    std::string sim_config, sim_variant = "BAC1", trace_path, sim_out;
    SimOptions sim_opt;
    Overrides sim_over;
    simulate->add_option("--config", sim_config, "scenario config file");
    simulate->add_option("--variant", sim_variant, "BAC1..BAC4");
    simulate->add_option("--seed", sim_opt.seed, "master seed");
    simulate->add_option("--horizon-s", sim_opt.horizon_s, "simulated seconds");
    simulate->add_option("--warmup-fraction", sim_opt.warmup_fraction, "fraction of horizon discarded");
    simulate->add_flag("--baseline", sim_opt.baseline, "no discard strategy, no mining pauses");
    simulate->add_option("--trace", trace_path, "event trace output file");
    simulate->add_option("--out", sim_out, "CSV output file (default stdout)");
    sim_over.add(simulate, scenario_keys());

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run a sweep spec and write CSV plus a .meta sidecar");
    std::string sweep_config, sweep_out;
    Overrides sweep_over;
    sweep->add_option("--config", sweep_config, "sweep spec file")->required();
    sweep->add_option("--out", sweep_out, "CSV output file (default stdout, no sidecar)");
    std::vector<std::string> sweep_keys = scenario_keys();
    for (const char* k : {"axis", "values", "variants", "engines", "seeds", "first_seed",
                          "horizon_s", "workers"}) {
        sweep_keys.emplace_back(k);
    }
    sweep_over.add(sweep, sweep_keys);

    // compare
    auto* compare = app.add_subcommand("compare", "compare analytic rows against sim rows");
    std::vector<std::string> csvs;
    std::string report_path;
    Tolerances tol;
    compare->add_option("csv", csvs, "one CSV holding both engines, or analytic then sim")
        ->required()
        ->expected(1, 2);
    compare->add_option("--report", report_path, "write the report here as well as stdout");
    compare->add_option("--rel-tau", tol.rel_tau, "relative tolerance on tau");
    compare->add_option("--rel-theta-t", tol.rel_theta_t, "relative tolerance on theta_t");
    compare->add_option("--rel-theta-s", tol.rel_theta_s, "relative tolerance on theta_s");
    compare->add_option("--abs-p-m", tol.abs_p_m, "absolute tolerance on p_m");
    compare->add_option("--rel-theta-d-bac2", tol.rel_theta_d_bac2,
                        "relative tolerance on BAC-2 theta_d");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kInvalid;
    }

    try {
        if (*solve) {
            const ScenarioParams p = scenario_from(solve_over.merged(load(solve_config)));
            std::vector<BacVariant> variants;
            for (const auto& v : solve_variants) variants.push_back(parse_variant(v));
            if (variants.empty()) variants.assign(std::begin(kAllVariants), std::end(kAllVariants));
            bool all_converged = true;
            std::vector<ResultRow> rows;
            for (BacVariant v : variants) {
                if (detail) {
                    const ChainSolution s = solve_tau(p, v);
                    print_detail(s);
                    const MetricsReport m = evaluate_metrics(p, s);
                    std::printf("  theta_t %.9g theta_s %.9g theta_d %.9g eta %.9g p_m %.9g\n",
                                m.theta_t, m.theta_s, m.theta_d, m.eta, m.p_m);
                    all_converged = all_converged && s.converged;
                } else {
                    rows.push_back(analytic_row(p, v, p.n_tx_per_block));
                    all_converged = all_converged && rows.back().status == "ok";
                }
            }
            if (!detail) write_csv(std::cout, rows);
            return all_converged ? kOk : kNoConvergence;
        }

        if (*simulate) {
            const ScenarioParams p = scenario_from(sim_over.merged(load(sim_config)));
            const BacVariant v = parse_variant(sim_variant);
            std::ofstream trace;
            if (!trace_path.empty()) {
                trace = open_out(trace_path);
                trace << "# time_s node_id event_kind detail\n";
                sim_opt.trace = &trace;
            }
            ResultRow row = sim_row(p, v, p.n_tx_per_block, sim_opt);
            if (sim_opt.baseline) row.status = "baseline";
            if (sim_out.empty()) {
                write_csv(std::cout, {row});
            } else {
                auto f = open_out(sim_out);
                write_csv(f, {row});
            }
            return kOk;
        }

        if (*sweep) {
            const SweepSpec spec = sweep_from(sweep_over.merged(load(sweep_config)));
            const std::string started = utc_now();
            const auto rows = run_sweep(spec);
            const std::string finished = utc_now();
            if (sweep_out.empty()) {
                write_csv(std::cout, rows);
            } else {
                auto f = open_out(sweep_out);
                write_csv(f, rows);
                auto meta = open_out(sweep_out + ".meta");
                meta << "tool = bwlan " << BWLAN_VERSION << "\n";
                meta << "started = " << started << "\nfinished = " << finished << "\n";
                meta << "rows = " << rows.size() << "\n";
                meta << "# config\n" << to_config_text(spec);
            }
            for (const auto& r : rows) {
                if (r.engine == "analytic" && r.status != "ok") return kNoConvergence;
            }
            return kOk;
        }

        if (*compare) {
            std::vector<ResultRow> first, second;
            {
                std::ifstream f(csvs[0]);
                if (!f) throw ConfigError("cannot open '" + csvs[0] + "'");
                first = read_csv(f);
            }
            if (csvs.size() > 1) {
                std::ifstream f(csvs[1]);
                if (!f) throw ConfigError("cannot open '" + csvs[1] + "'");
                second = read_csv(f);
            } else {
                second = first;
            }
            const ComparisonReport rep = compare_engines(first, second, tol);
            write_report(std::cout, rep);
            if (!report_path.empty()) {
                auto f = open_out(report_path);
                write_report(f, rep);
            }
            return rep.pass ? kOk : kCompareFailed;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalid;
    } catch (const KeyMismatch& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalid;
    } catch (const SingularDenominator& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNoConvergence;
    }
    return kOk;
}
