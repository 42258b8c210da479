#include "oracles/chain_walk.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace oracle {

WalkEstimate chain_walk(double p_s, double p_c, std::span<const int> windows,
                        const WalkTimes& times, long walks, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const int stages = static_cast<int>(windows.size());
    const double p = p_s + p_c;

    std::vector<long> exits(windows.size(), 0);
    long discards = 0;
    double sum_t = 0.0, sum_t2 = 0.0;

    for (long w = 0; w < walks; ++w) {
        double elapsed = 0.0;
        bool done = false;
        for (int i = 0; i < stages && !done; ++i) {
            int k = std::uniform_int_distribution<int>(0, windows[i] - 1)(rng);
            while (k > 0) {
                const double u = u01(rng);
                if (u < p_s) {
                    done = true;  // someone else's block won: discarded
                    break;
                }
                if (u < p) {
                    if (!times.skip_backoff_collisions) elapsed += times.t_collision;
                } else {
                    elapsed += times.sigma;
                    --k;
                }
            }
            if (done) {
                ++discards;
                break;
            }
            if (u01(rng) >= p) {
                elapsed += times.t_success;
                ++exits[i];
                sum_t += elapsed;
                sum_t2 += elapsed * elapsed;
                done = true;
            } else {
                elapsed += times.t_collision;
                if (i == stages - 1) {
                    ++discards;
                    done = true;
                }
            }
        }
    }

    const double n = static_cast<double>(walks);
    auto bernoulli_se = [n](double q) { return std::sqrt(q * (1.0 - q) / n); };
    WalkEstimate est;
    for (int i = 0; i < stages; ++i) {
        const double q = exits[i] / n;
        est.p_exit.push_back(q);
        est.p_exit_se.push_back(bernoulli_se(q));
    }
    est.p_discard = discards / n;
    est.p_discard_se = bernoulli_se(est.p_discard);
    est.t_q = sum_t / n;
    est.t_q_se = std::sqrt(std::max(0.0, sum_t2 / n - est.t_q * est.t_q) / n);
    return est;
}

}  // namespace oracle
