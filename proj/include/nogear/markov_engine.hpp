#pragma once

// Truncated Markov-chain approximation of h-step forecast distributions,
// coherent point forecasts and highest-predictive-probability intervals.

#include "nogear/types.hpp"

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace nogear {

/**
 * @brief Row-stochastic (M+1)x(M+1) truncation of a one-step kernel.
 *
 * Immutable after construction. Rows are renormalized to sum to one and the
 * discarded tail of each row is kept in `truncation_mass`.
 */
class TransitionMatrix {
public:
    TransitionMatrix(count_t M, std::vector<double> data, std::vector<double> truncation_mass, bool renormalized)
        : M_(M), data_(std::move(data)), truncation_mass_(std::move(truncation_mass)), renormalized_(renormalized) {}

    count_t truncation() const { return M_; }
    std::size_t dim() const { return detail::idx(M_) + 1; }
    bool renormalized() const { return renormalized_; }

    double operator()(count_t y, count_t x) const { return data_[detail::idx(y) * dim() + detail::idx(x)]; }

    std::span<const double> row(count_t y) const { return {data_.data() + detail::idx(y) * dim(), dim()}; }

    const std::vector<double>& truncation_mass() const { return truncation_mass_; }

    double max_truncation_mass() const {
        return truncation_mass_.empty() ? 0.0 : *std::max_element(truncation_mass_.begin(), truncation_mass_.end());
    }

    /// v * P for a row vector v of length dim().
    std::vector<double> left_multiply(std::span<const double> v) const {
        const std::size_t n = dim();
        std::vector<double> out(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            const double vk = v[k];
            if (vk == 0.0) continue;
            const double* r = data_.data() + k * n;
            for (std::size_t x = 0; x < n; ++x) out[x] += vk * r[x];
        }
        return out;
    }

    /// Stationary law of the truncated chain by power iteration from uniform.
    std::vector<double> stationary(double tol = 1e-13, int max_iter = 20000) const {
        const std::size_t n = dim();
        std::vector<double> v(n, 1.0 / static_cast<double>(n));
        for (int it = 0; it < max_iter; ++it) {
            auto next = left_multiply(v);
            const double s = std::accumulate(next.begin(), next.end(), 0.0);
            double diff = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                next[i] /= s;
                diff += std::abs(next[i] - v[i]);
            }
            v = std::move(next);
            if (diff < tol) break;
        }
        return v;
    }

    /// Tail mass averaged under the stationary law of the truncated chain.
    double weighted_truncation_mass() const {
        const auto pi = stationary();
        double s = 0.0;
        for (std::size_t i = 0; i < pi.size(); ++i) s += pi[i] * truncation_mass_[i];
        return s;
    }

private:
    count_t M_;
    std::vector<double> data_;
    std::vector<double> truncation_mass_;
    bool renormalized_;
};

struct BuildOptions {
    /// Bound on the stationary-weighted discarded tail mass.
    double max_truncation = 1e-6;
    bool renormalize = true;
};

template <class F>
concept EntryKernel = std::invocable<F, count_t, count_t> &&
                      std::convertible_to<std::invoke_result_t<F, count_t, count_t>, double>;

template <class F>
concept RowKernel = std::invocable<F, count_t, count_t> &&
                    std::convertible_to<std::invoke_result_t<F, count_t, count_t>, std::vector<double>>;

namespace detail {

inline TransitionMatrix finish_matrix(count_t M, std::vector<double> data, const BuildOptions& opts) {
    const std::size_t n = idx(M) + 1;
    std::vector<double> tail(n);
    bool any_tail = false;
    for (std::size_t y = 0; y < n; ++y) {
        double* r = data.data() + y * n;
        double s = 0.0;
        for (std::size_t x = 0; x < n; ++x) {
            if (!(r[x] >= 0.0)) throw Error("kernel produced a negative or NaN probability");
            s += r[x];
        }
        tail[y] = std::max(0.0, 1.0 - s);
        any_tail = any_tail || tail[y] > opts.max_truncation;
        if (opts.renormalize && s > 0.0) {
            for (std::size_t x = 0; x < n; ++x) r[x] /= s;
        }
    }
    TransitionMatrix tm(M, std::move(data), std::move(tail), opts.renormalize);
    if (any_tail) {
        const double weighted = tm.weighted_truncation_mass();
        if (weighted > opts.max_truncation) {
            throw TruncationTooSevere("truncation at M = " + std::to_string(M) +
                                      " discards stationary-weighted mass " + std::to_string(weighted) +
                                      "; increase M");
        }
    }
    return tm;
}

}  // namespace detail

/// Fills the (M+1)x(M+1) matrix entry by entry from kernel(y, x).
template <EntryKernel Kernel>
TransitionMatrix build_matrix(Kernel&& kernel, count_t M, const BuildOptions& opts = {}) {
    if (M < 1) throw std::invalid_argument("truncation M must be >= 1");
    const std::size_t n = detail::idx(M) + 1;
    std::vector<double> data(n * n);
    for (count_t y = 0; y <= M; ++y) {
        for (count_t x = 0; x <= M; ++x) data[detail::idx(y) * n + detail::idx(x)] = kernel(y, x);
    }
    return detail::finish_matrix(M, std::move(data), opts);
}

/// Fills the matrix from a row kernel: row(y, M) returns probabilities over {0..M}.
template <RowKernel Rows>
TransitionMatrix build_matrix_from_rows(Rows&& row, count_t M, const BuildOptions& opts = {}) {
    if (M < 1) throw std::invalid_argument("truncation M must be >= 1");
    const std::size_t n = detail::idx(M) + 1;
    std::vector<double> data(n * n);
    for (count_t y = 0; y <= M; ++y) {
        const std::vector<double> r = row(y, M);
        std::copy_n(r.begin(), n, data.begin() + static_cast<std::ptrdiff_t>(detail::idx(y) * n));
    }
    return detail::finish_matrix(M, std::move(data), opts);
}

// ---------------------------------------------------------------------------
// Forecast distributions
// ---------------------------------------------------------------------------

struct ForecastDistribution {
    count_t origin = 0;
    count_t horizon = 0;
    count_t M = 0;
    std::vector<double> probs;
    /// Estimate of the probability discarded by truncation along the h steps.
    double truncation_mass = 0.0;

    double cdf(count_t x) const {
        double s = 0.0;
        for (count_t i = 0; i <= x && i <= M; ++i) s += probs[detail::idx(i)];
        return s;
    }
};

/// Distributions for horizons 1..h_max from one origin, by repeated row-vector products.
inline std::vector<ForecastDistribution> h_step_distributions(const TransitionMatrix& tm, count_t y, count_t h_max) {
    if (y < 0 || y > tm.truncation()) {
        throw OriginOutOfRange("origin " + std::to_string(y) + " outside {0.." + std::to_string(tm.truncation()) +
                               "}");
    }
    if (h_max < 1) throw std::invalid_argument("horizon must be >= 1");
    std::vector<ForecastDistribution> out;
    out.reserve(detail::idx(h_max));
    std::vector<double> v(tm.dim(), 0.0);
    v[detail::idx(y)] = 1.0;
    double lost = 0.0;
    const auto& tail = tm.truncation_mass();
    for (count_t h = 1; h <= h_max; ++h) {
        for (std::size_t k = 0; k < v.size(); ++k) lost += v[k] * tail[k];
        v = tm.left_multiply(v);
        out.push_back({y, h, tm.truncation(), v, std::min(1.0, lost)});
    }
    return out;
}

inline ForecastDistribution h_step_distribution(const TransitionMatrix& tm, count_t y, count_t h) {
    return std::move(h_step_distributions(tm, y, h).back());
}

// ---------------------------------------------------------------------------
// Point forecasts
// ---------------------------------------------------------------------------

struct PointForecasts {
    double mean = 0.0;
    count_t mean_rounded = 0;
    count_t median = 0;
    count_t mode = 0;
};

/// Half-way cases round up.
inline count_t round_half_up(double v) { return static_cast<count_t>(std::floor(v + 0.5)); }

inline PointForecasts point_forecasts(const ForecastDistribution& fd) {
    PointForecasts pf;
    double cum = 0.0;
    bool median_set = false;
    double best = -1.0;
    for (std::size_t x = 0; x < fd.probs.size(); ++x) {
        const double px = fd.probs[x];
        pf.mean += static_cast<double>(x) * px;
        cum += px;
        if (!median_set && cum >= 0.5) {
            pf.median = static_cast<count_t>(x);
            median_set = true;
        }
        if (px > best) {
            best = px;
            pf.mode = static_cast<count_t>(x);
        }
    }
    if (!median_set) pf.median = static_cast<count_t>(fd.probs.size()) - 1;
    pf.mean_rounded = round_half_up(pf.mean);
    return pf;
}

// ---------------------------------------------------------------------------
// HPP interval
// ---------------------------------------------------------------------------

struct HppInterval {
    count_t lower = 0;
    count_t upper = 0;
    /// Probability of the hull [lower, upper].
    double achieved_coverage = 0.0;
    /// Probability of the greedy high-probability set itself.
    double set_coverage = 0.0;
    double delta = 0.0;
    /// Smallest probability admitted into the set.
    double threshold = 0.0;
    bool contiguous = true;

    bool contains(count_t x) const { return x >= lower && x <= upper; }
};

/**
 * Greedy HPP construction: states are admitted in decreasing probability
 * (ties go to the smaller state) until the admitted mass reaches 1 - delta.
 * The reported interval is the hull of the admitted set.
 */
inline HppInterval hpp_interval(const ForecastDistribution& fd, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    std::vector<std::size_t> order(fd.probs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fd.probs[a] > fd.probs[b]; });

    HppInterval out;
    out.delta = delta;
    const double target = 1.0 - delta;
    std::size_t lo = order.front(), hi = order.front();
    double mass = 0.0;
    std::size_t taken = 0;
    for (std::size_t i : order) {
        mass += fd.probs[i];
        lo = std::min(lo, i);
        hi = std::max(hi, i);
        out.threshold = fd.probs[i];
        ++taken;
        if (mass >= target) break;
    }
    out.lower = static_cast<count_t>(lo);
    out.upper = static_cast<count_t>(hi);
    out.set_coverage = mass;
    out.contiguous = (hi - lo + 1) == taken;
    double hull = 0.0;
    for (std::size_t x = lo; x <= hi; ++x) hull += fd.probs[x];
    out.achieved_coverage = hull;
    return out;
}

}  // namespace nogear
