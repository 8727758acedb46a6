#pragma once

// Exact probability laws, moments and simulation for the NoGeAR(1) process
//
//   X_t = omega (*) X_{t-1} + eps_t,
//
// where omega (*) y is a sum of y iid copies of G* and eps_t is a two-component
// geometric mixture chosen so the marginal is geometric(theta).

#include "nogear/params.hpp"
#include "nogear/types.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace nogear {

// ---------------------------------------------------------------------------
// Single-variable laws
// ---------------------------------------------------------------------------

inline double gstar_pmf(const ModelParams& p, count_t x) {
    if (x < 0) return 0.0;
    if (x == 0) return p.alpha();
    return (1.0 - p.alpha()) * (1.0 - p.beta()) * std::pow(p.beta(), static_cast<double>(x - 1));
}

inline double innovation_pmf(const ModelParams& p, count_t x) {
    if (x < 0) return 0.0;
    const double w = p.mix_weight();
    const double xd = static_cast<double>(x);
    return w * std::pow(p.theta(), xd) * (1.0 - p.theta()) + (1.0 - w) * std::pow(p.beta(), xd) * (1.0 - p.beta());
}

struct InnovationMoments {
    double mu_eps;
    double sigma2_eps;
};

inline InnovationMoments innovation_moments(const ModelParams& p) { return {p.mu_eps(), p.sigma2_eps()}; }

/// Stationary marginal (1 - theta) theta^x.
inline double marginal_pmf(const ModelParams& p, count_t x) {
    if (x < 0) return 0.0;
    return (1.0 - p.theta()) * std::pow(p.theta(), static_cast<double>(x));
}

inline std::vector<double> innovation_row(const ModelParams& p, count_t max_x) {
    std::vector<double> out(detail::idx(max_x) + 1);
    for (count_t x = 0; x <= max_x; ++x) out[detail::idx(x)] = innovation_pmf(p, x);
    return out;
}

// ---------------------------------------------------------------------------
// Thinning and one-step transition law
// ---------------------------------------------------------------------------

namespace detail {

// Probability that omega (*) y equals m with exactly j non-zero G* terms,
// summed over j. m >= 1, y >= 1.
inline double thinning_nonzero_term(const ModelParams& p, count_t y, count_t m) {
    const double log_c = std::log((1.0 - p.alpha()) * (1.0 - p.beta()));
    const double log_a = std::log(p.alpha());
    const double log_b = std::log(p.beta());
    double sum = 0.0;
    const count_t jmax = std::min(m, y);
    for (count_t j = 1; j <= jmax; ++j) {
        const double lt = log_choose(y, j) + log_choose(m - 1, j - 1) + static_cast<double>(j) * log_c +
                          static_cast<double>(y - j) * log_a + static_cast<double>(m - j) * log_b;
        sum += std::exp(lt);
    }
    return sum;
}

}  // namespace detail

/// Law of omega (*) y on {0..max_m}, closed form.
inline std::vector<double> thinning_pmf(const ModelParams& p, count_t y, count_t max_m) {
    std::vector<double> s(detail::idx(max_m) + 1, 0.0);
    if (y == 0) {
        s[0] = 1.0;
        return s;
    }
    s[0] = std::pow(p.alpha(), static_cast<double>(y));
    for (count_t m = 1; m <= max_m; ++m) s[detail::idx(m)] = detail::thinning_nonzero_term(p, y, m);
    return s;
}

/// One-step transition probability Pr[X_{t+1} = x | X_t = y], all four cases.
inline double transition_pmf(const ModelParams& p, count_t y, count_t x) {
    if (x < 0 || y < 0) return 0.0;
    const double one_minus_at = 1.0 - p.alpha() * p.theta();
    if (y == 0) return x == 0 ? one_minus_at : innovation_pmf(p, x);
    const double ay = std::pow(p.alpha(), static_cast<double>(y));
    if (x == 0) return ay * one_minus_at;

    double total = ay * innovation_pmf(p, x);
    for (count_t m = 1; m <= x; ++m) {
        total += innovation_pmf(p, x - m) * detail::thinning_nonzero_term(p, y, m);
    }
    return total;
}

/// Row y of the one-step kernel on {0..max_x}; same law as transition_pmf,
/// grouped so the thinning law is evaluated once per row.
inline std::vector<double> transition_row(const ModelParams& p, count_t y, count_t max_x) {
    const auto thin = thinning_pmf(p, y, max_x);
    const auto eps = innovation_row(p, max_x);
    std::vector<double> row(detail::idx(max_x) + 1, 0.0);
    for (count_t x = 0; x <= max_x; ++x) {
        double acc = 0.0;
        for (count_t m = 0; m <= x; ++m) acc += thin[detail::idx(m)] * eps[detail::idx(x - m)];
        row[detail::idx(x)] = acc;
    }
    return row;
}

// ---------------------------------------------------------------------------
// Two-step law in closed form
// ---------------------------------------------------------------------------

/**
 * @brief Closed-form two-step transition probabilities with k-sums truncated at M.
 *
 * Writes the one-step kernel as alpha^k eps(x) + B(x, k), where B(x, k) is the
 * mass reaching x from k through at least one non-zero G* term, and expands
 * the Chapman-Kolmogorov sum into the four (x, y) cases with
 * A = sum_{k>=1} alpha^k eps(k).
 *
 * Tables are built once for states 0..max(M, max_state), so repeated queries
 * are cheap.
 */
class TwoStepTransition {
public:
    TwoStepTransition(const ModelParams& p, count_t M, count_t max_state = -1)
        : p_(p), M_(M), top_(std::max(M, max_state)) {
        if (M < 1) throw std::invalid_argument("two-step truncation M must be >= 1");
        const auto n = detail::idx(top_) + 1;
        eps_ = innovation_row(p, top_);
        alpha_pow_.resize(n);
        for (std::size_t k = 0; k < n; ++k) alpha_pow_[k] = std::pow(p.alpha(), static_cast<double>(k));

        A_ = 0.0;
        for (count_t k = 1; k <= M_; ++k) A_ += alpha_pow_[detail::idx(k)] * eps_[detail::idx(k)];

        // B_[k][x] = sum_{m=1}^{x} thin_k(m) eps(x - m)
        B_.assign(n, std::vector<double>(n, 0.0));
        for (count_t k = 1; k <= top_; ++k) {
            const auto thin = thinning_pmf(p, k, top_);
            auto& row = B_[detail::idx(k)];
            for (count_t x = 1; x <= top_; ++x) {
                double acc = 0.0;
                for (count_t m = 1; m <= x; ++m) acc += thin[detail::idx(m)] * eps_[detail::idx(x - m)];
                row[detail::idx(x)] = acc;
            }
        }
    }

    count_t truncation() const { return M_; }
    count_t max_state() const { return top_; }
    double a_term() const { return A_; }

    /// B(x, k): mass reaching x from state k through a non-empty thinning.
    double b_term(count_t x, count_t k) const { return B_[detail::idx(k)][detail::idx(x)]; }

    double operator()(count_t y, count_t x) const {
        if (x < 0 || y < 0) return 0.0;
        if (x > top_ || y > top_) throw std::out_of_range("two-step state beyond precomputed range");
        const double e0 = 1.0 - p_.alpha() * p_.theta();
        const double lead = e0 + A_;
        const double ex = eps_[detail::idx(x)];

        if (y == 0) {
            if (x == 0) return e0 * lead;
            double s = 0.0;
            for (count_t k = 1; k <= M_; ++k) s += eps_[detail::idx(k)] * b_term(x, k);
            return ex * lead + s;
        }

        const double ay = alpha_pow_[detail::idx(y)];
        double from_y_weighted = 0.0;  // sum_k alpha^k B(k, y)
        for (count_t k = 1; k <= M_; ++k) from_y_weighted += alpha_pow_[detail::idx(k)] * b_term(k, y);
        if (x == 0) return e0 * (ay * lead + from_y_weighted);

        double eps_to_x = 0.0;   // sum_k eps(k) B(x, k)
        double chained = 0.0;    // sum_k B(k, y) B(x, k)
        for (count_t k = 1; k <= M_; ++k) {
            const double bxk = b_term(x, k);
            eps_to_x += eps_[detail::idx(k)] * bxk;
            chained += b_term(k, y) * bxk;
        }
        return ay * ex * lead + ay * eps_to_x + ex * from_y_weighted + chained;
    }

private:
    ModelParams p_;
    count_t M_;
    count_t top_;
    double A_ = 0.0;
    std::vector<double> eps_;
    std::vector<double> alpha_pow_;
    std::vector<std::vector<double>> B_;
};

inline double two_step_pmf(const ModelParams& p, count_t y, count_t x, count_t M) {
    return TwoStepTransition(p, M, std::max(x, y))(y, x);
}

// ---------------------------------------------------------------------------
// Conditional moments
// ---------------------------------------------------------------------------

inline double cond_mean(const ModelParams& p, count_t y, count_t h) {
    const double wh = std::pow(p.omega(), static_cast<double>(h));
    return wh * static_cast<double>(y) + (1.0 - wh) / (1.0 - p.omega()) * p.mu_eps();
}

/// h-step conditional variance in the published closed form. Agrees with
/// cond_var_recursive for h <= 2 only; see the moment tests.
inline double cond_var(const ModelParams& p, count_t y, count_t h) {
    const double w = p.omega();
    const double hd = static_cast<double>(h);
    const double wh = std::pow(w, hd);
    const double w2h1 = std::pow(w, 2.0 * (hd - 1.0));
    const double wh1 = std::pow(w, hd - 1.0);
    const double lead = (p.alpha() + p.beta()) / (1.0 - p.beta());
    const double one_m = 1.0 - w;
    const double y_term = wh * (1.0 - wh) / one_m * static_cast<double>(y);
    const double mu_term =
        (w * (1.0 - w2h1) / ((1.0 + w) * one_m * one_m) - w2h1 * (1.0 - wh1) / (one_m * one_m)) * p.mu_eps();
    return lead * (y_term + mu_term) + (1.0 - std::pow(w, 2.0 * hd)) / (1.0 - w * w) * p.sigma2_eps();
}

/// Exact h-step conditional variance from the law of total variance:
/// V_h = omega^2 V_{h-1} + Var(G*) E[X_{h-1}] + sigma2_eps.
inline double cond_var_recursive(const ModelParams& p, count_t y, count_t h) {
    double v = 0.0;
    double mean = static_cast<double>(y);
    for (count_t k = 1; k <= h; ++k) {
        v = p.omega() * p.omega() * v + p.gstar_var() * mean + p.sigma2_eps();
        mean = p.omega() * mean + p.mu_eps();
    }
    return v;
}

// ---------------------------------------------------------------------------
// Probability generating functions
// ---------------------------------------------------------------------------

inline double gstar_pgf(const ModelParams& p, double s) {
    return (p.alpha() * (1.0 - s) + (1.0 - p.beta()) * s) / (1.0 - p.beta() * s);
}

/// h-fold functional iterate of the G* pgf (production path).
inline double gstar_pgf_iter(const ModelParams& p, double s, count_t h) {
    double v = s;
    for (count_t k = 0; k < h; ++k) v = gstar_pgf(p, v);
    return v;
}

/// Published closed form of the h-fold iterate, kept only for cross-checking.
inline double gstar_pgf_closed_form(const ModelParams& p, double s, count_t h) {
    if (h == 0) return s;
    const double a = p.alpha();
    const double b = p.beta();
    auto choose = [](count_t n, count_t k) { return std::exp(detail::log_choose(n, k)); };
    auto ipow = [](double base, count_t e) { return std::pow(base, static_cast<double>(e)); };

    double num_coef = ((h + 1) % 2 == 0 ? 1.0 : -1.0) * ipow(a, h);
    for (count_t i = 1; i <= h - 1; ++i) {
        double inner = 0.0;
        for (count_t j = 0; j <= h - i; ++j) inner += choose(h, j) * ipow(-b, h - j - i);
        num_coef += ((i + 1) % 2 == 0 ? 1.0 : -1.0) * ipow(a, i) * inner;
    }
    const double num = num_coef * (1.0 - s) + ipow(1.0 - b, h) * s;

    double den_mid = 0.0;
    for (count_t i = 1; i <= h - 1; ++i) {
        double inner = 0.0;
        for (count_t j = 0; j <= h - i - 1; ++j) inner += choose(h, j) * ipow(-b, h - j - i - 1);
        den_mid += ipow(-a, i) * inner;
    }
    double den_last = 0.0;
    for (count_t j = 0; j <= h - 1; ++j) den_last += choose(h, j) * ipow(-b, h - j - 1);
    const double den = 1.0 + b * (1.0 - s) * den_mid - b * s * den_last;
    return num / den;
}

inline double marginal_pgf(const ModelParams& p, double s) { return (1.0 - p.theta()) / (1.0 - p.theta() * s); }

inline double innovation_pgf(const ModelParams& p, double s) {
    const double w = p.mix_weight();
    return w * (1.0 - p.theta()) / (1.0 - p.theta() * s) + (1.0 - w) * (1.0 - p.beta()) / (1.0 - p.beta() * s);
}

/// Conditional pgf of X_{t+h} given X_t = y, ratio form.
inline double forecast_pgf(const ModelParams& p, count_t y, count_t h, double s) {
    const double gh = gstar_pgf_iter(p, s, h);
    const double denom = marginal_pgf(p, gh);
    if (denom == 0.0) throw Error("internal error: marginal pgf vanished in forecast_pgf");
    return marginal_pgf(p, s) / denom * std::pow(gh, static_cast<double>(y));
}

/// Conditional pgf in the product-over-innovations form.
inline double forecast_pgf_product(const ModelParams& p, count_t y, count_t h, double s) {
    double prod = 1.0;
    for (count_t j = 0; j < h; ++j) prod *= innovation_pgf(p, gstar_pgf_iter(p, s, j));
    return prod * std::pow(gstar_pgf_iter(p, s, h), static_cast<double>(y));
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

namespace detail {

// Geometric on {0,1,...} with pmf (1 - q) q^x.
template <class Engine>
count_t draw_geometric(double q, Engine& eng) {
    std::geometric_distribution<count_t> g(1.0 - q);
    return g(eng);
}

template <class Engine>
count_t draw_gstar(const ModelParams& p, Engine& eng) {
    std::bernoulli_distribution zero(p.alpha());
    if (zero(eng)) return 0;
    return 1 + draw_geometric(p.beta(), eng);
}

template <class Engine>
count_t draw_innovation(const ModelParams& p, Engine& eng) {
    std::bernoulli_distribution first(p.mix_weight());
    return first(eng) ? draw_geometric(p.theta(), eng) : draw_geometric(p.beta(), eng);
}

template <class Engine>
count_t nogear_step(const ModelParams& p, count_t prev, Engine& eng) {
    count_t survivors = 0;
    for (count_t i = 0; i < prev; ++i) survivors += draw_gstar(p, eng);
    return survivors + draw_innovation(p, eng);
}

}  // namespace detail

/**
 * Simulates n observations. X_0 is drawn from the stationary geometric
 * marginal, the thinning is the literal counting series of X_{t-1} G* draws,
 * and the first burn_in values are discarded.
 */
inline CountSeries simulate(const ModelParams& p, std::size_t n, const RngSpec& rng, std::size_t burn_in = 0) {
    auto eng = rng.engine();
    CountSeries out;
    out.name = "nogear";
    out.values.reserve(n);
    count_t x = detail::draw_geometric(p.theta(), eng);
    const std::size_t total = n + burn_in;
    for (std::size_t t = 0; t < total; ++t) {
        if (t > 0) x = detail::nogear_step(p, x, eng);
        if (t >= burn_in) out.values.push_back(x);
    }
    return out;
}

}  // namespace nogear
