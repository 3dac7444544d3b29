#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace hsgas {

/// Mean and standard error of the mean of independent replica values.
inline std::pair<double, double> mean_and_se(const std::vector<double>& x)
{
    if (x.empty()) return {0.0, 0.0};
    double m = 0.0;
    for (double v : x) m += v;
    m /= double(x.size());
    if (x.size() < 2) return {m, 0.0};
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return {m, std::sqrt(ss / double(x.size() - 1) / double(x.size()))};
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double slope_se = 0.0;
};

/// Ordinary least squares y = intercept + slope x.
inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear_fit: need two or more points");
    const double n = double(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("linear_fit: degenerate abscissae");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    const double sse = std::max(0.0, syy - f.slope * sxy);
    f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    if (x.size() > 2) f.slope_se = std::sqrt(sse / (n - 2) / sxx);
    return f;
}

/// Fit of log y against log x; all values must be positive.
inline LinearFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y)
{
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("loglog_fit: non-positive value");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return linear_fit(lx, ly);
}

inline constexpr double z95 = 1.959963984540054;
inline constexpr double z95_one_sided = 1.6448536269514722;

} // namespace hsgas
