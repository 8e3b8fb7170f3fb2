#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace pathhjb {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

// Mean and standard error, summed in index order so results do not
// depend on how the samples were produced. Accumulates deviations from
// the first sample, so identical samples give an exact mean and zero se.
inline MeanSe mean_se(const std::vector<double>& xs) {
    MeanSe out;
    out.n = xs.size();
    if (xs.empty()) return out;
    double s = 0.0;
    for (double x : xs) s += x - xs[0];
    out.mean = xs[0] + s / static_cast<double>(xs.size());
    if (xs.size() < 2) return out;
    double ss = 0.0;
    for (double x : xs) {
        const double d = x - out.mean;
        ss += d * d;
    }
    const double var = ss / static_cast<double>(xs.size() - 1);
    out.se = std::sqrt(var / static_cast<double>(xs.size()));
    return out;
}

inline double rms(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x * x;
    return std::sqrt(s / static_cast<double>(xs.size()));
}

inline double max_abs(const std::vector<double>& xs) {
    double m = 0.0;
    for (double x : xs) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace pathhjb
