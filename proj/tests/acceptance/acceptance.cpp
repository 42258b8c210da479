// Acceptance suite: one PASS/FAIL line per criterion, tolerances fixed below.
// Exit status is nonzero when any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bwlan/chain.hpp"
#include "bwlan/metrics.hpp"
#include "bwlan/sweep.hpp"
#include "oracles/chain_walk.hpp"
#include "oracles/matrix_chain.hpp"

using namespace bwlan;

namespace {

constexpr double kPeakTarget = 480.0;       // tps
constexpr double kPeakRelTol = 0.10;
constexpr double kNearMaxRel = 0.05;        // BAC-2 at N_t = 100
constexpr double kIdentityRel = 1e-9;
constexpr double kMachineRel = 4.0 * 2.220446049250313e-16;
constexpr double kStationaryAbs = 1e-8;
constexpr int kRandomTuples = 24;
constexpr long kWalks = 1000000;
constexpr double kStdErrors = 3.0;
constexpr int kSeeds = 10;
constexpr double kHorizon = 2000.0;
constexpr double kStabilityRel = 0.10;

const std::vector<double> kShapeGrid{1, 2, 5, 10, 20, 50, 100};
const std::vector<double> kLambdaGrid{1, 2, 5, 10, 20, 50, 100};

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void note(const char* fmt, auto... args)
    {
        if constexpr (sizeof...(args) == 0) {
            notes.emplace_back(fmt);
        } else {
            char buf[512];
            std::snprintf(buf, sizeof buf, fmt, args...);
            notes.emplace_back(buf);
        }
    }
    void require(bool ok, const char* fmt, auto... args)
    {
        if (!ok) {
            pass = false;
            note(fmt, args...);
        }
    }
};

ScenarioParams point(double lambda, int n, int n_tx = 10)
{
    ScenarioParams p;
    p.lambda_bkps = lambda;
    p.n_nodes = n;
    p.n_tx_per_block = n_tx;
    return p;
}

MetricsReport analytic(const ScenarioParams& p, BacVariant v, ChainSolution* out = nullptr)
{
    const ChainSolution s = solve_tau(p, v);
    if (out) *out = s;
    return evaluate_metrics(p, s);
}

const char* name(BacVariant v)
{
    static const char* names[] = {"BAC1", "BAC2", "BAC3", "BAC4"};
    return names[static_cast<int>(v)];
}

Outcome peak_throughput()
{
    Outcome o;
    double best = 0.0;
    int best_nt = 0;
    for (int nt = 1; nt <= 100; ++nt) {
        const double t = analytic(point(10, 10, nt), BacVariant::BAC1).theta_t;
        if (t > best) {
            best = t;
            best_nt = nt;
        }
    }
    o.note("BAC1 lambda=10 N=10: max theta_t %.2f tps at N_t=%d (target %.0f +-%.0f%%)", best,
           best_nt, kPeakTarget, kPeakRelTol * 100);
    o.require(std::abs(best - kPeakTarget) <= kPeakRelTol * kPeakTarget, "peak outside the band");
    return o;
}

Outcome shape_at_50_50()
{
    Outcome o;
    std::vector<double> b1, b2;
    std::vector<bool> clamped;
    for (double nt : kShapeGrid) {
        ChainSolution s;
        b1.push_back(analytic(point(50, 50, static_cast<int>(nt)), BacVariant::BAC1, &s).theta_t);
        clamped.push_back(s.alpha_clamped);
        b2.push_back(analytic(point(50, 50, static_cast<int>(nt)), BacVariant::BAC2).theta_t);
    }
    std::string line = "BAC1 theta_t over N_t {1,2,5,10,20,50,100}:";
    for (std::size_t i = 0; i < b1.size(); ++i) {
        char buf[48];
        std::snprintf(buf, sizeof buf, " %.1f%s", b1[i], clamped[i] ? "*" : "");
        line += buf;
    }
    o.notes.push_back(line + "  (* alpha clamped)");
    for (std::size_t i = 0; i < kShapeGrid.size(); ++i) {
        if (kShapeGrid[i] <= 5) continue;
        o.require(b1[i] < b1[i - 1], "BAC1 does not decrease from N_t=%g (%.2f) to N_t=%g (%.2f)",
                  kShapeGrid[i - 1], b1[i - 1], kShapeGrid[i], b1[i]);
    }
    const double max2 = *std::max_element(b2.begin(), b2.end());
    o.note("BAC2 theta_t at N_t=100: %.2f, own max %.2f", b2.back(), max2);
    o.require(b2.back() >= (1.0 - kNearMaxRel) * max2, "BAC2 at N_t=100 not within 5 percent of its max");
    return o;
}

Outcome identities()
{
    Outcome o;
    int checked = 0, boundary = 0;
    double worst_tt = 0.0, worst_sum = 0.0, worst_pm = 0.0;
    for (int n : {10, 50}) {
        for (double lambda : kLambdaGrid) {
            for (double nt : kShapeGrid) {
                const auto p = point(lambda, n, static_cast<int>(nt));
                for (BacVariant v : kAllVariants) {
                    ChainSolution s;
                    const auto m = analytic(p, v, &s);
                    if (!s.converged) continue;
                    ++checked;
                    boundary += m.model_boundary;
                    const double tt = std::abs(m.theta_t - m.theta_s * nt) / m.theta_t;
                    worst_tt = std::max(worst_tt, tt);
                    if (v == BacVariant::BAC1) {
                        worst_sum = std::max(worst_sum, std::abs(m.theta_s + m.theta_d - lambda * n) / (lambda * n));
                        worst_pm = std::max(worst_pm, std::abs(m.p_m));
                    }
                }
            }
        }
    }
    o.note("%d converged solutions; worst |theta_t - N_t theta_s|/theta_t = %.2e, BAC1 worst "
           "|theta_s + theta_d - lambda N|/(lambda N) = %.2e, worst |p_m| = %.2e",
           checked, worst_tt, worst_sum, worst_pm);
    o.note("pi_{-1,0} > 1 - tau at %d of them", boundary);
    o.require(worst_tt <= kMachineRel, "theta_t identity off by more than round-off");
    o.require(worst_sum <= kIdentityRel, "BAC1 rate identity violated");
    o.require(worst_pm <= kIdentityRel, "BAC1 p_m not zero");
    return o;
}

Outcome stationary_oracle()
{
    Outcome o;
    const ScenarioParams prm;
    const auto w = window_schedule(prm);
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst[2] = {0.0, 0.0};
    for (int i = 0; i < kRandomTuples; ++i) {
        const double ps = 0.01 + 0.5 * u(rng);
        const double pc = 0.4 * u(rng);
        const double pa = std::pow(10.0, -4.0 + 3.5 * u(rng));
        const double alpha = u(rng);
        const auto ch = ChannelProbabilities::exogenous(ps, pc);
        for (int queued = 0; queued < 2; ++queued) {
            const BacVariant v = queued ? BacVariant::BAC1 : BacVariant::BAC3;
            const auto c = stationary_closed_form(prm, ch, pa, alpha, v);
            const auto m = oracle::matrix_stationary(w, {ps + pc, ps, pc, pa, alpha}, queued);
            double d = std::abs(c.pi_noblock - m.pi_noblock);
            for (std::size_t k = 0; k < w.size(); ++k) {
                d = std::max(d, std::abs(c.pi_transmit[k] - m.pi_transmit[k]));
            }
            worst[queued] = std::max(worst[queued], d);
        }
    }
    o.note("%d tuples per family; worst componentwise gap: queue-free %.2e, queued %.2e",
           kRandomTuples, worst[0], worst[1]);
    o.require(worst[0] <= kStationaryAbs && worst[1] <= kStationaryAbs, "gap above %.0e",
              kStationaryAbs);
    return o;
}

Outcome walk_oracle()
{
    Outcome o;
    const ScenarioParams prm;
    const auto w = window_schedule(prm);
    const auto t = channel_times(prm);
    const std::vector<std::pair<double, double>> grid{
        {0.3, 0.1}, {0.1, 0.1}, {0.2, 0.05}, {0.5, 0.2}, {0.4, 0.4}, {0.05, 0.01}};
    std::uint64_t seed = 1;
    for (auto [p, pc] : grid) {
        const auto pe = exit_distribution(p, pc, w);
        const auto est = oracle::chain_walk(p - pc, pc, w, {prm.slot_sigma_s, t.t_success_s, t.t_collision_s},
                                            kWalks, seed++);
        double worst_z = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double se = std::sqrt(pe[i] * (1.0 - pe[i]) / kWalks);
            if (se > 0) worst_z = std::max(worst_z, std::abs(est.p_exit[i] - pe[i]) / se);
        }
        const double tq = queue_occupancy(prm, ChannelProbabilities::exogenous(p - pc, pc),
                                          BacVariant::BAC1).t_q_s;
        const double z_tq = std::abs(tq - est.t_q) / est.t_q_se;
        o.note("p=%.2f p_c=%.2f: p_e worst |z| %.2f; T_q model %.4f ms, walk %.4f ms (se %.4f), |z| %.1f",
               p, pc, worst_z, tq * 1e3, est.t_q * 1e3, est.t_q_se * 1e3, z_tq);
        o.require(worst_z <= kStdErrors, "  p_e outside %g standard errors at p=%.2f p_c=%.2f",
                  kStdErrors, p, pc);
        o.require(z_tq <= kStdErrors, "  T_q outside %g standard errors at p=%.2f p_c=%.2f",
                  kStdErrors, p, pc);
    }
    return o;
}

Outcome cross_engine()
{
    Outcome o;
    for (auto [lambda, n] : {std::pair{10.0, 10}, {50.0, 50}}) {
        SweepSpec s;
        s.base = point(lambda, n);
        s.axis = SweepAxis::NTxPerBlock;
        s.values = {10};
        s.variants.assign(std::begin(kAllVariants), std::end(kAllVariants));
        s.engines = EngineSet::Both;
        s.seeds = kSeeds;
        s.horizon_s = kHorizon;
        s.workers = 0;
        const auto rows = run_sweep(s);
        const auto rep = compare_engines(rows, rows, Tolerances{});
        o.note("lambda=%g N=%d, %d seeds x %g s:", lambda, n, kSeeds, kHorizon);
        std::ostringstream text;
        write_report(text, rep);
        std::string line;
        std::istringstream lines(text.str());
        while (std::getline(lines, line)) {
            if (line.rfind("overall", 0) == 0) continue;
            o.notes.push_back("  " + line);
        }
        o.require(rep.pass, "  cross-engine tolerances not met at lambda=%g N=%d", lambda, n);
    }
    return o;
}

Outcome orderings()
{
    Outcome o;
    for (int n : {10, 50}) {
        std::vector<std::array<MetricsReport, 4>> rows;
        for (double lambda : kLambdaGrid) {
            std::array<MetricsReport, 4> r;
            for (BacVariant v : kAllVariants) r[static_cast<int>(v)] = analytic(point(lambda, n), v);
            rows.push_back(r);
        }
        for (std::size_t i = 0; i < kLambdaGrid.size(); ++i) {
            const auto& r = rows[i];
            const double lambda = kLambdaGrid[i];
            for (int v = 1; v < 4; ++v) {
                o.require(r[0].theta_d >= r[v].theta_d, "N=%d lambda=%g: theta_d BAC1 %.4g < BAC%d %.4g",
                          n, lambda, r[0].theta_d, v + 1, r[v].theta_d);
            }
            o.require(r[3].p_m >= r[1].p_m && r[1].p_m >= r[2].p_m && r[2].p_m >= 0.0,
                      "N=%d lambda=%g: p_m order broken (%.4g %.4g %.4g)", n, lambda, r[3].p_m,
                      r[1].p_m, r[2].p_m);
            if (i > 0) {
                for (int v = 0; v < 4; ++v) {
                    o.require(r[v].theta_d >= rows[i - 1][v].theta_d,
                              "N=%d: BAC%d theta_d falls from lambda=%g to %g", n, v + 1,
                              kLambdaGrid[i - 1], lambda);
                }
            }
        }
        const auto& top = rows.back();
        o.note("N=%d lambda=100: theta_d %.1f %.1f %.1f %.1f, p_m %.3f %.3f %.3f %.3f", n,
               top[0].theta_d, top[1].theta_d, top[2].theta_d, top[3].theta_d, top[0].p_m,
               top[1].p_m, top[2].p_m, top[3].p_m);
    }
    return o;
}

Outcome utilization_stability()
{
    Outcome o;
    double lo = 1.0, hi = 0.0, sum = 0.0;
    for (int nt = 1; nt <= 100; ++nt) {
        const double eta = analytic(point(10, 10, nt), BacVariant::BAC4).eta;
        lo = std::min(lo, eta);
        hi = std::max(hi, eta);
        sum += eta;
    }
    const double spread = (hi - lo) / (sum / 100.0);
    o.note("BAC4 lambda=10 N=10, N_t 1..100: eta in [%.4f, %.4f], (max-min)/mean = %.4f", lo, hi,
           spread);
    o.require(spread <= kStabilityRel, "spread above %.2f", kStabilityRel);
    return o;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cli(const std::string& args)
{
    const std::string cmd = std::string(BWLAN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
}

Outcome determinism()
{
    Outcome o;
    namespace fs = std::filesystem;
    const fs::path d = fs::temp_directory_path() / "bwlan_acceptance";
    fs::create_directories(d);
    const std::string cfg = std::string(BWLAN_CONFIG_DIR);
    const std::string dir = d.string();

    const std::string sim = "simulate --config " + cfg + "/default.cfg --variant BAC2 --seed 9 --horizon-s 200 --out ";
    o.require(cli(sim + dir + "/sim1.csv") == 0 && cli(sim + dir + "/sim2.csv") == 0, "simulate failed");
    const bool sim_same = !slurp(d / "sim1.csv").empty() && slurp(d / "sim1.csv") == slurp(d / "sim2.csv");

    const std::string sweep = "sweep --config " + cfg + "/cross_engine_l10_n10.cfg --horizon-s 100 --seeds 3 ";
    o.require(cli(sweep + "--workers 1 --out " + dir + "/sw1.csv") == 0 &&
                  cli(sweep + "--workers 8 --out " + dir + "/sw2.csv") == 0,
              "sweep failed");
    const bool sweep_same = !slurp(d / "sw1.csv").empty() && slurp(d / "sw1.csv") == slurp(d / "sw2.csv");

    o.note("simulate twice: %s; sweep with 1 and 8 workers: %s", sim_same ? "identical" : "DIFFERENT",
           sweep_same ? "identical" : "DIFFERENT");
    o.require(sim_same && sweep_same, "outputs differ");
    return o;
}

}  // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"peak transaction throughput", peak_throughput},
        {"throughput shape at lambda=50, N=50", shape_at_50_50},
        {"exact identities", identities},
        {"closed-form stationary mass vs transition matrix", stationary_oracle},
        {"exit distribution and sojourn vs chain walk", walk_oracle},
        {"simulator vs analytic model", cross_engine},
        {"orderings across lambda", orderings},
        {"BAC4 utilization stable in N_t", utilization_stability},
        {"byte-identical reruns", determinism},
    };
    int passed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.note("exception: %s", e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %zu: %s  %s (%.1fs)\n", i + 1, o.pass ? "PASS" : "FAIL",
                    criteria[i].first, secs);
        for (const auto& n : o.notes) std::printf("    %s\n", n.c_str());
        std::fflush(stdout);
        passed += o.pass;
    }

    // Informational: which variant carries the most transactions at the heaviest load.
    const auto p = point(100, 50);
    double best = -1.0;
    BacVariant arg = BacVariant::BAC1;
    for (BacVariant v : kAllVariants) {
        const double t = analytic(p, v).theta_t;
        if (t > best) {
            best = t;
            arg = v;
        }
    }
    std::printf("info: highest theta_t at lambda=100, N=50 is %s (%.1f tps)\n", name(arg), best);
    std::printf("%d/%zu criteria passed\n", passed, criteria.size());
    return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
