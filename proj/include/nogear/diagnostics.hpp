#pragma once

// Model-adequacy checks: Pearson residuals, residual ACF, non-randomized PIT
// histogram, jumps control chart and Ljung-Box portmanteau p-values.

#include "nogear/inar_zoo.hpp"
#include "nogear/model_core.hpp"
#include "nogear/types.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace nogear {

// ---------------------------------------------------------------------------
// Pearson residuals
// ---------------------------------------------------------------------------

/// r_t = (X_t - E[X_t | X_{t-1}]) / sd(X_t | X_{t-1}) for t = 2..n.
inline std::vector<double> pearson_residuals(const ModelParams& p, const CountSeries& s) {
    if (s.size() < 2) throw InputError("residuals need at least 2 observations");
    s.check_non_negative();
    std::vector<double> r;
    r.reserve(s.size() - 1);
    for (std::size_t t = 1; t < s.size(); ++t) {
        const double m = cond_mean(p, s[t - 1], 1);
        const double v = cond_var(p, s[t - 1], 1);
        r.push_back((static_cast<double>(s[t]) - m) / std::sqrt(v));
    }
    return r;
}

/// Same construction from any family's one-step kernel moments.
inline std::vector<double> pearson_residuals(const InarKernel& k, const CountSeries& s) {
    if (s.size() < 2) throw InputError("residuals need at least 2 observations");
    s.check_non_negative();
    std::vector<double> r;
    r.reserve(s.size() - 1);
    for (std::size_t t = 1; t < s.size(); ++t) {
        const double v = k.one_step_var(s[t - 1]);
        if (!(v > 0.0)) throw Error("conditional variance is zero; Pearson residual undefined");
        r.push_back((static_cast<double>(s[t]) - k.one_step_mean(s[t - 1])) / std::sqrt(v));
    }
    return r;
}

inline std::vector<double> pearson_residuals(const FamilyParams& fp, const CountSeries& s) {
    if (const auto* p = std::get_if<ModelParams>(&fp)) return pearson_residuals(*p, s);
    return pearson_residuals(make_kernel(fp), s);
}

// ---------------------------------------------------------------------------
// PIT histogram
// ---------------------------------------------------------------------------

/// One-step pmf rows P(y -> x) for y in [0, max_from], x in [0, max_to].
inline std::vector<std::vector<double>> transition_table(const InarKernel& k, count_t max_from, count_t max_to) {
    const auto g = k.summand_row(max_to);
    const auto eps = k.innovation_row(max_to);
    std::vector<double> surv(detail::idx(max_to) + 1, 0.0);
    surv[0] = 1.0;
    std::vector<std::vector<double>> rows;
    rows.reserve(detail::idx(max_from) + 1);
    for (count_t y = 0; y <= max_from; ++y) {
        if (y > 0) surv = InarKernel::convolve_truncated(surv, g);
        rows.push_back(InarKernel::convolve_truncated(surv, eps));
    }
    return rows;
}

namespace detail {

// Mass of the piecewise-linear PIT cdf u -> clamp((u - lo)/(hi - lo), 0, 1)
// falling in each of `bins` equal-width bins, added into `acc`.
inline void add_pit_mass(std::vector<double>& acc, double lo, double hi) {
    const std::size_t bins = acc.size();
    auto F = [&](double u) {
        if (hi <= lo) return u >= hi ? 1.0 : 0.0;
        return std::clamp((u - lo) / (hi - lo), 0.0, 1.0);
    };
    double prev = 0.0;
    for (std::size_t j = 0; j < bins; ++j) {
        const double cur = j + 1 == bins ? 1.0 : F(static_cast<double>(j + 1) / static_cast<double>(bins));
        acc[j] += cur - prev;
        prev = cur;
    }
}

}  // namespace detail

/**
 * @brief Non-randomized PIT histogram from a one-step pmf table.
 *
 * `rows[y][x]` is P(X_t = x | X_{t-1} = y); every observed transition must
 * be inside the table. Bin masses are averaged over t = 2..n.
 */
inline std::vector<double> pit_histogram(const std::vector<std::vector<double>>& rows, const CountSeries& s,
                                         std::size_t bins = 10) {
    if (bins < 2) throw InputError("PIT histogram needs at least 2 bins");
    if (s.size() < 2) throw InputError("PIT histogram needs at least 2 observations");
    s.check_non_negative();
    std::vector<double> acc(bins, 0.0);
    for (std::size_t t = 1; t < s.size(); ++t) {
        const auto y = detail::idx(s[t - 1]);
        const auto x = detail::idx(s[t]);
        if (y >= rows.size() || x >= rows[y].size()) throw InputError("transition outside the supplied pmf table");
        double lo = 0.0;
        for (std::size_t i = 0; i < x; ++i) lo += rows[y][i];
        const double hi = std::min(1.0, lo + rows[y][x]);
        detail::add_pit_mass(acc, std::min(lo, 1.0), hi);
    }
    for (double& v : acc) v /= static_cast<double>(s.size() - 1);
    return acc;
}

inline std::vector<double> pit_histogram(const FamilyParams& fp, const CountSeries& s, std::size_t bins = 10) {
    if (s.size() < 2) throw InputError("PIT histogram needs at least 2 observations");
    s.check_non_negative();
    return pit_histogram(transition_table(make_kernel(fp), s.max_value(), s.max_value()), s, bins);
}

// ---------------------------------------------------------------------------
// Jumps control chart
// ---------------------------------------------------------------------------

struct JumpsChart {
    std::vector<count_t> jumps;
    double sigma_j = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    /// Positions in `jumps` (0-based) with |J_t| > 3 sigma_J.
    std::vector<std::size_t> violations;
};

inline JumpsChart jumps_chart(const CountSeries& s) {
    if (s.size() < 2) throw InputError("jumps chart needs at least 2 observations");
    JumpsChart c;
    for (std::size_t t = 1; t < s.size(); ++t) c.jumps.push_back(s[t] - s[t - 1]);
    const double n = static_cast<double>(c.jumps.size());
    double mean = 0.0;
    for (count_t j : c.jumps) mean += static_cast<double>(j);
    mean /= n;
    double ss = 0.0;
    for (count_t j : c.jumps) ss += (static_cast<double>(j) - mean) * (static_cast<double>(j) - mean);
    c.sigma_j = c.jumps.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    c.upper = 3.0 * c.sigma_j;
    c.lower = -c.upper;
    for (std::size_t i = 0; i < c.jumps.size(); ++i)
        if (std::abs(static_cast<double>(c.jumps[i])) > c.upper) c.violations.push_back(i);
    return c;
}

// ---------------------------------------------------------------------------
// ACF and Ljung-Box
// ---------------------------------------------------------------------------

struct AcfResult {
    std::vector<double> values;  ///< lags 1..max_lag
    double bound = 0.0;          ///< 1.96 / sqrt(n)
};

/// Sample autocorrelations with the biased (1/n) autocovariance estimator.
inline AcfResult acf(std::span<const double> xs, std::size_t max_lag) {
    const std::size_t n = xs.size();
    if (max_lag >= n) throw InputError("max_lag must be smaller than the series length");
    double mean = 0.0;
    for (double v : xs) mean += v;
    mean /= static_cast<double>(n);
    double c0 = 0.0;
    for (double v : xs) c0 += (v - mean) * (v - mean);
    AcfResult out;
    out.bound = 1.96 / std::sqrt(static_cast<double>(n));
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double ck = 0.0;
        for (std::size_t t = k; t < n; ++t) ck += (xs[t] - mean) * (xs[t - k] - mean);
        out.values.push_back(c0 > 0.0 ? ck / c0 : 0.0);
    }
    return out;
}

struct LjungBox {
    std::size_t lags = 0;
    double statistic = 0.0;
    double p_value = 1.0;
    /// Degrees of freedom used for the chi-square tail (no fitted-parameter correction).
    std::size_t df = 0;
};

inline LjungBox ljung_box(std::span<const double> residuals, std::size_t m) {
    if (m < 1) throw InputError("Ljung-Box needs m >= 1");
    if (residuals.size() <= m) throw InputError("Ljung-Box needs more residuals than lags");
    const auto r = acf(residuals, m);
    const double n = static_cast<double>(residuals.size());
    double q = 0.0;
    for (std::size_t k = 1; k <= m; ++k) q += r.values[k - 1] * r.values[k - 1] / (n - static_cast<double>(k));
    q *= n * (n + 2.0);
    LjungBox lb;
    lb.lags = m;
    lb.df = m;
    lb.statistic = q;
    boost::math::chi_squared chi(static_cast<double>(m));
    lb.p_value = boost::math::cdf(boost::math::complement(chi, q));
    return lb;
}

// ---------------------------------------------------------------------------
// Combined report
// ---------------------------------------------------------------------------

struct DiagnosticsReport {
    std::vector<double> residuals;
    AcfResult residual_acf;
    std::vector<double> pit_bins;
    JumpsChart jumps;
    std::vector<LjungBox> ljung_box;
};

struct DiagnosticsOptions {
    std::size_t pit_bins = 10;
    std::size_t max_lag = 20;
    std::vector<std::size_t> ljung_box_lags{2, 5, 10};
};

inline DiagnosticsReport diagnose(const FamilyParams& fp, const CountSeries& s, const DiagnosticsOptions& opts = {}) {
    DiagnosticsReport rep;
    rep.residuals = pearson_residuals(fp, s);
    const std::size_t lag = std::min(opts.max_lag, rep.residuals.size() - 1);
    if (lag >= 1) rep.residual_acf = acf(rep.residuals, lag);
    rep.pit_bins = pit_histogram(fp, s, opts.pit_bins);
    rep.jumps = jumps_chart(s);
    for (std::size_t m : opts.ljung_box_lags)
        if (m < rep.residuals.size()) rep.ljung_box.push_back(ljung_box(rep.residuals, m));
    return rep;
}

}  // namespace nogear
