#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace hsgas {

/// Truncation and geometric thresholds shared by the pseudo-trajectory and Duhamel code.
struct CutoffParams {
    int n = 3;              ///< maximal tree depth
    double R = 4.0;         ///< velocity-ball radius
    double delta = 1e-2;    ///< minimal time gap between adjunctions
    double a = 1e-3;        ///< position perturbation radius
    double eps0 = 1e-2;     ///< free-flow separation
    double rho = 5e-3;      ///< distance to the wall
    double eta = 1.0;       ///< near-velocity ball
    double alpha = 1e-2;    ///< grazing threshold, alpha_graze
    double gamma = 8.0;     ///< line-distance threshold of the convergence domain
    double eps = 1e-4;      ///< sphere diameter
    double c_d = 0.1;       ///< ceiling on alpha_graze

    /// N with N eps^{d-1} = 1 (rounded).
    long long N(int d) const { return std::llround(std::pow(eps, -(d - 1))); }

    /// Human-readable list of violated compatibility constraints.
    std::vector<std::string> violations() const
    {
        std::vector<std::string> v;
        auto req = [&](bool ok, const char* what) {
            if (!ok) v.emplace_back(what);
        };
        const double tiny = 1e-12;
        req(n >= 0, "n ≥ 0");
        req(R >= 1.0, "R ≥ 1");
        req(eta <= 1.0, "η ≤ 1");
        req(eps > 0.0 && eps0 > 0.0 && a > 0.0 && rho > 0.0 && delta > 0.0 && alpha > 0.0,
            "ε, ε₀, a, ρ, δ, α > 0");
        req(2.0 * eps <= a * (1 + tiny), "2ε ≤ a");
        req(4.0 * std::sqrt(3.0) * a <= eps0 * (1 + tiny), "4√3·a ≤ ε₀");
        req(eps0 <= eta * delta * (1 + tiny), "ε₀ ≤ ηδ");
        req(3.0 * a <= rho * (1 + tiny), "3a ≤ ρ");
        req(2.0 * n * eps <= a * (1 + tiny), "2nε ≤ a");
        req(std::max(16.0 * R * a / eps0, eps0 / delta) <= gamma * (1 + tiny), "max(16Ra/ε₀, ε₀/δ) ≤ γ");
        req(alpha <= c_d, "α ≤ c(d)");
        return v;
    }
};

} // namespace hsgas
