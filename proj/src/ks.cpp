#include <algorithm>
#include <cmath>
#include <vector>

#include "bfisense/eval.hpp"

namespace bfisense {

double kolmogorov_survival(double lambda)
{
    if (!(lambda >= 0.0))
        throw InvalidInput("kolmogorov_survival: lambda must be >= 0");
    // Below 0.1 the sum is 1 to double precision and converges too slowly.
    if (lambda < 0.1)
        return 1.0;
    const double l2 = lambda * lambda;
    double sum = 0.0;
    for (int k = 1;; k += 2) {
        // Odd and even terms together keep partial sums monotone.
        const double a = std::exp(-2.0 * k * k * l2);
        const double b = std::exp(-2.0 * (k + 1) * (k + 1) * l2);
        sum += a - b;
        if (b < 1e-18)
            break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_gaussian_pvalue(std::span<const double> samples)
{
    const std::size_t n = samples.size();
    if (n < 30)
        throw InvalidInput("ks test: need at least 30 samples, got " + std::to_string(n));
    double mean = 0.0;
    for (double v : samples) {
        if (!std::isfinite(v))
            throw InvalidInput("ks test: non-finite sample");
        mean += v;
    }
    mean /= double(n);
    double ss = 0.0;
    for (double v : samples)
        ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / double(n - 1));
    if (!(sd > 0.0))
        throw InvalidInput("ks test: samples have zero variance");

    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = 0.5 * std::erfc(-(x[i] - mean) / (sd * std::sqrt(2.0)));
        d = std::max({d, double(i + 1) / double(n) - f, f - double(i) / double(n)});
    }
    return {d, kolmogorov_survival(std::sqrt(double(n)) * d)};
}

} // namespace bfisense
