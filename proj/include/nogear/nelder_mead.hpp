#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace nogear {

struct NelderMeadOptions {
    int max_iter = 2000;
    /// Relative spread of objective values across the simplex.
    double ftol = 1e-8;
    /// Largest vertex distance from the best vertex.
    double xtol = 1e-6;
    double initial_step = 0.5;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = std::numeric_limits<double>::infinity();
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

/// Derivative-free simplex minimization (standard reflection/expansion/
/// contraction/shrink coefficients 1, 2, 1/2, 1/2).
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    const std::vector<double>& x0, const NelderMeadOptions& opts = {}) {
    const std::size_t n = x0.size();
    NelderMeadResult res;
    auto eval = [&](const std::vector<double>& x) {
        ++res.evaluations;
        const double v = f(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };

    std::vector<std::vector<double>> simplex(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += opts.initial_step;
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i <= n; ++i) values[i] = eval(simplex[i]);

    std::vector<std::size_t> order(n + 1);
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        std::vector<std::vector<double>> s2(n + 1);
        std::vector<double> v2(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            s2[i] = simplex[order[i]];
            v2[i] = values[order[i]];
        }
        simplex = std::move(s2);
        values = std::move(v2);
    };

    auto point = [&](const std::vector<double>& centroid, double coef) {
        std::vector<double> p(n);
        for (std::size_t j = 0; j < n; ++j) p[j] = centroid[j] + coef * (simplex[n][j] - centroid[j]);
        return p;
    };

    sort_simplex();
    while (res.iterations < opts.max_iter) {
        const double spread = values[n] - values[0];
        double diameter = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            double d = 0.0;
            for (std::size_t j = 0; j < n; ++j) d = std::max(d, std::abs(simplex[i][j] - simplex[0][j]));
            diameter = std::max(diameter, d);
        }
        if (std::isfinite(values[0]) && spread <= opts.ftol * (std::abs(values[0]) + 1e-12) &&
            diameter <= opts.xtol) {
            res.converged = true;
            break;
        }
        ++res.iterations;

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / static_cast<double>(n);

        const auto xr = point(centroid, -1.0);
        const double fr = eval(xr);
        if (fr < values[0]) {
            const auto xe = point(centroid, -2.0);
            const double fe = eval(xe);
            if (fe < fr) {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
        } else if (fr < values[n - 1]) {
            simplex[n] = xr;
            values[n] = fr;
        } else {
            const bool outside = fr < values[n];
            const auto xc = outside ? point(centroid, -0.5) : point(centroid, 0.5);
            const double fc = eval(xc);
            if (fc < (outside ? fr : values[n])) {
                simplex[n] = xc;
                values[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t j = 0; j < n; ++j) simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
                    values[i] = eval(simplex[i]);
                }
            }
        }
        sort_simplex();
    }
    res.x = simplex[0];
    res.value = values[0];
    return res;
}

}  // namespace nogear
