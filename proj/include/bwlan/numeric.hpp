#pragma once

#include <cmath>

namespace bwlan {

/// log C(n, k) through log-gamma.
inline double log_binomial(int n, int k)
{
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// C(n, k) as a double. For n <= 50 every partial product c * (n-k+i) stays
/// below 2^53, so the running product is exact; larger n use log-gamma.
inline double binomial(int n, int k)
{
    if (k < 0 || k > n) return 0.0;
    if (n > 50) return std::exp(log_binomial(n, k));
    if (k > n - k) k = n - k;
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

}  // namespace bwlan
