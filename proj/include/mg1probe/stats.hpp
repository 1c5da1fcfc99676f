#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mg1probe/errors.hpp"

namespace mg1probe {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;  // standard error of the mean
};

inline MeanSe mean_se(const std::vector<double>& xs) {
    if (xs.empty()) throw config_error("mean_se: empty sample");
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    if (xs.size() == 1) return {m, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    double var = ss / static_cast<double>(xs.size() - 1);
    return {m, std::sqrt(var / static_cast<double>(xs.size()))};
}

inline double median(std::vector<double> xs) {
    if (xs.empty()) throw config_error("median: empty sample");
    std::sort(xs.begin(), xs.end());
    std::size_t n = xs.size();
    return (n % 2 == 1) ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// Standard error of the mean of a correlated series via batch means: the
// series is cut into num_batches equal blocks (remainder dropped) and the SE
// is the sd of the block means over sqrt(num_batches).
inline double batch_means_se(const std::vector<double>& xs, std::size_t num_batches) {
    if (num_batches < 2 || xs.size() < 2 * num_batches)
        throw config_error("batch_means_se: need >= 2 batches of >= 2 points");
    const std::size_t batch = xs.size() / num_batches;
    std::vector<double> means(num_batches, 0.0);
    for (std::size_t b = 0; b < num_batches; ++b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < batch; ++i) acc += xs[b * batch + i];
        means[b] = acc / static_cast<double>(batch);
    }
    return mean_se(means).se;
}

struct SlopeFit {
    double slope = 0.0;
    double stderr_ = 0.0;  // OLS standard error of the slope
    double intercept = 0.0;
};

// OLS fit y = a + b x; stderr_ needs >= 3 points, else reported as 0.
inline SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw config_error("fit_slope: need >= 2 paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0.0) throw config_error("fit_slope: degenerate x values");
    SlopeFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (x.size() > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double r = y[i] - (f.intercept + f.slope * x[i]);
            rss += r * r;
        }
        f.stderr_ = std::sqrt(rss / (n - 2.0) / sxx);
    }
    return f;
}

}  // namespace mg1probe
