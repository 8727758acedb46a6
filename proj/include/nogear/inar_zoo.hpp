#pragma once

// Comparator INAR(1) families expressed as counting-series thinning plus an
// additive innovation: NoGeAR, NGINAR (negative-binomial thinning, a NoGeAR
// special case), GINAR and PINAR (binomial thinning).

#include "nogear/markov_engine.hpp"
#include "nogear/model_core.hpp"
#include "nogear/params.hpp"
#include "nogear/types.hpp"

#include <functional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace nogear {

enum class Family { nogear, nginar, ginar, pinar };

inline constexpr std::array<Family, 4> kAllFamilies{Family::nogear, Family::nginar, Family::ginar, Family::pinar};

inline std::string to_string(Family f) {
    switch (f) {
        case Family::nogear: return "nogear";
        case Family::nginar: return "nginar";
        case Family::ginar: return "ginar";
        case Family::pinar: return "pinar";
    }
    return "unknown";
}

inline std::string display_name(Family f) {
    switch (f) {
        case Family::nogear: return "NoGeAR(1)";
        case Family::nginar: return "NGINAR";
        case Family::ginar: return "GINAR";
        case Family::pinar: return "PINAR";
    }
    return "unknown";
}

inline Family family_from_string(std::string_view s) {
    if (s == "nogear") return Family::nogear;
    if (s == "nginar") return Family::nginar;
    if (s == "ginar") return Family::ginar;
    if (s == "pinar") return Family::pinar;
    throw InputError("unknown model family '" + std::string(s) + "'");
}

struct NginarParams {
    double alpha_ng = 0.0;  ///< mean of one negative-binomial thinning term
    double mu = 0.0;        ///< stationary mean
};

struct GinarParams {
    double p = 0.0;  ///< geometric marginal (1 - p) p^x
    double alpha_thin = 0.0;
};

struct PinarParams {
    double lambda = 0.0;
    double alpha_thin = 0.0;
    /// When false (default) lambda is the stationary mean and innovations are
    /// Poisson(lambda (1 - alpha)); when true lambda is the innovation mean.
    bool lambda_is_innovation_mean = false;

    double innovation_mean() const { return lambda_is_innovation_mean ? lambda : lambda * (1.0 - alpha_thin); }
    double stationary_mean() const { return lambda_is_innovation_mean ? lambda / (1.0 - alpha_thin) : lambda; }
};

using FamilyParams = std::variant<ModelParams, NginarParams, GinarParams, PinarParams>;

inline Family family_of(const FamilyParams& fp) {
    return std::visit(
        [](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ModelParams>) return Family::nogear;
            else if constexpr (std::is_same_v<T, NginarParams>) return Family::nginar;
            else if constexpr (std::is_same_v<T, GinarParams>) return Family::ginar;
            else return Family::pinar;
        },
        fp);
}

inline std::size_t parameter_count(Family f) { return f == Family::nogear ? 3 : 2; }

// ---------------------------------------------------------------------------
// Validation and the NGINAR -> NoGeAR mapping
// ---------------------------------------------------------------------------

/// alpha = 1 / (1 + alpha_ng), beta = 1 - alpha, theta = mu / (1 + mu).
inline ModelParams nginar_as_nogear(const NginarParams& np) {
    if (!(np.alpha_ng > 0.0 && np.alpha_ng < 1.0)) {
        throw ConstraintViolation("0 < alpha_ng < 1 violated (alpha_ng = " + detail::fmt_num(np.alpha_ng) + ")");
    }
    if (!(np.mu > 0.0 && std::isfinite(np.mu))) {
        throw ConstraintViolation("mu > 0 violated (mu = " + detail::fmt_num(np.mu) + ")");
    }
    const double alpha = 1.0 / (1.0 + np.alpha_ng);
    return validate_params(alpha, 1.0 - alpha, np.mu / (1.0 + np.mu));
}

inline void validate(const GinarParams& gp) {
    detail::require_open_unit("p", gp.p);
    detail::require_open_unit("alpha", gp.alpha_thin);
}

inline void validate(const PinarParams& pp) {
    if (!(pp.lambda > 0.0 && std::isfinite(pp.lambda))) {
        throw ConstraintViolation("lambda > 0 violated (lambda = " + detail::fmt_num(pp.lambda) + ")");
    }
    detail::require_open_unit("alpha", pp.alpha_thin);
}

inline void validate(const FamilyParams& fp) {
    std::visit(
        [](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, NginarParams>) (void)nginar_as_nogear(p);
            else if constexpr (std::is_same_v<T, GinarParams> || std::is_same_v<T, PinarParams>) validate(p);
        },
        fp);
}

// ---------------------------------------------------------------------------
// Elementary pmfs
// ---------------------------------------------------------------------------

inline double binomial_survivor_pmf(double alpha_thin, count_t y, count_t l) {
    if (l < 0 || l > y) return 0.0;
    if (alpha_thin <= 0.0) return l == 0 ? 1.0 : 0.0;
    if (alpha_thin >= 1.0) return l == y ? 1.0 : 0.0;
    const double lt = detail::log_choose(y, l) + static_cast<double>(l) * std::log(alpha_thin) +
                      static_cast<double>(y - l) * std::log1p(-alpha_thin);
    return std::exp(lt);
}

inline double poisson_pmf(double lambda, count_t k) {
    if (k < 0) return 0.0;
    if (lambda <= 0.0) return k == 0 ? 1.0 : 0.0;
    return std::exp(static_cast<double>(k) * std::log(lambda) - lambda - detail::log_factorial(k));
}

inline double geometric_pmf(double q, count_t x) {
    if (x < 0) return 0.0;
    return (1.0 - q) * std::pow(q, static_cast<double>(x));
}

// ---------------------------------------------------------------------------
// Kernel
// ---------------------------------------------------------------------------

/**
 * @brief Thinning-plus-innovation one-step kernel.
 *
 * The survivor law given state y is the y-fold convolution of
 * `summand_pmf`; binomial thinning is the Bernoulli special case.
 */
struct InarKernel {
    std::string label;
    std::function<double(count_t)> summand_pmf;
    std::function<double(count_t)> innovation_pmf;
    double summand_mean = 0.0;
    double summand_var = 0.0;
    double innovation_mean = 0.0;
    double innovation_var = 0.0;
    /// Largest value with non-zero summand probability, or -1 if unbounded.
    count_t summand_support_max = -1;

    std::vector<double> summand_row(count_t max) const {
        std::vector<double> g(detail::idx(max) + 1, 0.0);
        const count_t top = summand_support_max < 0 ? max : std::min(max, summand_support_max);
        for (count_t x = 0; x <= top; ++x) g[detail::idx(x)] = summand_pmf(x);
        return g;
    }

    std::vector<double> innovation_row(count_t max) const {
        std::vector<double> e(detail::idx(max) + 1);
        for (count_t x = 0; x <= max; ++x) e[detail::idx(x)] = innovation_pmf(x);
        return e;
    }

    /// Survivor law of state y on {0..max}.
    std::vector<double> survivor_row(count_t y, count_t max) const {
        std::vector<double> s(detail::idx(max) + 1, 0.0);
        s[0] = 1.0;
        const auto g = summand_row(max);
        for (count_t i = 0; i < y; ++i) s = convolve_truncated(s, g);
        return s;
    }

    double survivor_pmf(count_t y, count_t l) const {
        if (l < 0) return 0.0;
        return survivor_row(y, l)[detail::idx(l)];
    }

    double one_step_mean(count_t y) const { return static_cast<double>(y) * summand_mean + innovation_mean; }
    double one_step_var(count_t y) const { return static_cast<double>(y) * summand_var + innovation_var; }

    static std::vector<double> convolve_truncated(const std::vector<double>& a, const std::vector<double>& b) {
        const std::size_t n = a.size();
        std::size_t bmax = b.size();
        while (bmax > 0 && b[bmax - 1] == 0.0) --bmax;
        std::vector<double> out(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double ai = a[i];
            if (ai == 0.0) continue;
            const std::size_t lim = std::min(bmax, n - i);
            for (std::size_t j = 0; j < lim; ++j) out[i + j] += ai * b[j];
        }
        return out;
    }
};

/// sum_{l=0}^{x} survivor(y, l) * innovation(x - l).
inline double kernel_transition_pmf(const InarKernel& k, count_t y, count_t x) {
    if (x < 0 || y < 0) return 0.0;
    const auto surv = k.survivor_row(y, x);
    double s = 0.0;
    for (count_t l = 0; l <= x; ++l) s += surv[detail::idx(l)] * k.innovation_pmf(x - l);
    return s;
}

/// All rows of the truncated kernel, survivors built by incremental convolution.
inline TransitionMatrix kernel_matrix(const InarKernel& k, count_t M, const BuildOptions& opts = {}) {
    const auto g = k.summand_row(M);
    const auto eps = k.innovation_row(M);
    std::vector<double> surv(detail::idx(M) + 1, 0.0);
    surv[0] = 1.0;
    count_t next_y = 0;
    return build_matrix_from_rows(
        [&](count_t y, count_t /*max*/) {
            // rows are requested in increasing order
            while (next_y < y) {
                surv = InarKernel::convolve_truncated(surv, g);
                ++next_y;
            }
            return InarKernel::convolve_truncated(surv, eps);
        },
        M, opts);
}

inline InarKernel nogear_kernel(const ModelParams& p, std::string label = "NoGeAR(1)") {
    InarKernel k;
    k.label = std::move(label);
    k.summand_pmf = [p](count_t x) { return gstar_pmf(p, x); };
    k.innovation_pmf = [p](count_t x) { return innovation_pmf(p, x); };
    k.summand_mean = p.omega();
    k.summand_var = p.gstar_var();
    k.innovation_mean = p.mu_eps();
    k.innovation_var = p.sigma2_eps();
    return k;
}

namespace detail {

inline InarKernel binomial_kernel(std::string label, double a) {
    InarKernel k;
    k.label = std::move(label);
    k.summand_pmf = [a](count_t x) { return x == 0 ? 1.0 - a : (x == 1 ? a : 0.0); };
    k.summand_support_max = 1;
    k.summand_mean = a;
    k.summand_var = a * (1.0 - a);
    return k;
}

}  // namespace detail

inline InarKernel make_kernel(const FamilyParams& fp) {
    validate(fp);
    return std::visit(
        [](const auto& p) -> InarKernel {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ModelParams>) {
                return nogear_kernel(p);
            } else if constexpr (std::is_same_v<T, NginarParams>) {
                // counting terms are geometric with mean alpha_ng; the innovation
                // mixes geometrics with means mu and alpha_ng
                InarKernel k;
                k.label = "NGINAR";
                const double a = p.alpha_ng, mu = p.mu;
                const double qa = a / (1.0 + a), qm = mu / (1.0 + mu);
                const double w_a = a * mu / (mu - a);
                k.summand_pmf = [qa](count_t x) { return geometric_pmf(qa, x); };
                k.innovation_pmf = [qa, qm, w_a](count_t x) {
                    return (1.0 - w_a) * geometric_pmf(qm, x) + w_a * geometric_pmf(qa, x);
                };
                k.summand_mean = a;
                k.summand_var = a * (1.0 + a);
                k.innovation_mean = (1.0 - w_a) * mu + w_a * a;
                const double second = (1.0 - w_a) * detail::geom_second_moment(qm) + w_a * detail::geom_second_moment(qa);
                k.innovation_var = second - k.innovation_mean * k.innovation_mean;
                return k;
            } else if constexpr (std::is_same_v<T, GinarParams>) {
                // zero with probability alpha, else geometric(p): keeps the
                // geometric(p) marginal stationary under binomial thinning
                auto k = detail::binomial_kernel("GINAR", p.alpha_thin);
                const double a = p.alpha_thin, q = p.p;
                k.innovation_pmf = [a, q](count_t x) { return (x == 0 ? a : 0.0) + (1.0 - a) * geometric_pmf(q, x); };
                const double m = q / (1.0 - q);
                const double second = q * (1.0 + q) / ((1.0 - q) * (1.0 - q));
                k.innovation_mean = (1.0 - a) * m;
                k.innovation_var = (1.0 - a) * second - k.innovation_mean * k.innovation_mean;
                return k;
            } else {
                auto k = detail::binomial_kernel("PINAR", p.alpha_thin);
                const double lam = p.innovation_mean();
                k.innovation_pmf = [lam](count_t x) { return poisson_pmf(lam, x); };
                k.innovation_mean = lam;
                k.innovation_var = lam;
                return k;
            }
        },
        fp);
}

inline TransitionMatrix transition_matrix(const FamilyParams& fp, count_t M, const BuildOptions& opts = {}) {
    return kernel_matrix(make_kernel(fp), M, opts);
}

inline double stationary_mean(const FamilyParams& fp) {
    return std::visit(
        [](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ModelParams>) return p.marginal_mean();
            else if constexpr (std::is_same_v<T, NginarParams>) return p.mu;
            else if constexpr (std::is_same_v<T, GinarParams>) return p.p / (1.0 - p.p);
            else return p.stationary_mean();
        },
        fp);
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

namespace detail {

template <class Engine>
count_t draw_poisson(double lambda, Engine& eng) {
    if (lambda <= 0.0) return 0;
    std::poisson_distribution<count_t> d(lambda);
    return d(eng);
}

template <class Engine>
count_t draw_binomial(count_t n, double a, Engine& eng) {
    if (n <= 0) return 0;
    std::binomial_distribution<count_t> d(n, a);
    return d(eng);
}

}  // namespace detail

/// Simulates any family; shares the RngSpec determinism contract of nogear::simulate.
inline CountSeries simulate(const FamilyParams& fp, std::size_t n, const RngSpec& rng, std::size_t burn_in = 0) {
    validate(fp);
    if (const auto* p = std::get_if<ModelParams>(&fp)) return simulate(*p, n, rng, burn_in);
    if (const auto* p = std::get_if<NginarParams>(&fp)) {
        auto s = simulate(nginar_as_nogear(*p), n, rng, burn_in);
        s.name = "nginar";
        return s;
    }

    auto eng = rng.engine();
    CountSeries out;
    out.values.reserve(n);
    count_t x = 0;
    std::function<count_t(count_t)> step;
    if (const auto* g = std::get_if<GinarParams>(&fp)) {
        out.name = "ginar";
        x = detail::draw_geometric(g->p, eng);
        const GinarParams gp = *g;
        step = [gp, &eng](count_t prev) {
            count_t v = detail::draw_binomial(prev, gp.alpha_thin, eng);
            std::bernoulli_distribution zero(gp.alpha_thin);
            if (!zero(eng)) v += detail::draw_geometric(gp.p, eng);
            return v;
        };
    } else {
        const PinarParams pp = std::get<PinarParams>(fp);
        out.name = "pinar";
        x = detail::draw_poisson(pp.stationary_mean(), eng);
        step = [pp, &eng](count_t prev) {
            return detail::draw_binomial(prev, pp.alpha_thin, eng) + detail::draw_poisson(pp.innovation_mean(), eng);
        };
    }
    const std::size_t total = n + burn_in;
    for (std::size_t t = 0; t < total; ++t) {
        if (t > 0) x = step(x);
        if (t >= burn_in) out.values.push_back(x);
    }
    return out;
}

/// A family's kernel bundled with its parameters.
struct Model {
    FamilyParams params;
    InarKernel kernel;

    Family family() const { return family_of(params); }
    CountSeries simulate(std::size_t n, const RngSpec& rng, std::size_t burn_in = 0) const {
        return nogear::simulate(params, n, rng, burn_in);
    }
    TransitionMatrix matrix(count_t M, const BuildOptions& opts = {}) const { return kernel_matrix(kernel, M, opts); }
};

inline Model make_model(const FamilyParams& fp) { return Model{fp, make_kernel(fp)}; }

}  // namespace nogear
