#pragma once

// Conditional maximum likelihood for the INAR(1) families and information
// criteria for model comparison.

#include "nogear/inar_zoo.hpp"
#include "nogear/nelder_mead.hpp"
#include "nogear/types.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace nogear {

/// Log-likelihood reported when some observed transition has probability zero.
inline constexpr double kLogLikFloor = -1e300;

/// Observed (previous, current) pairs with multiplicities.
struct TransitionCounts {
    std::map<std::pair<count_t, count_t>, std::size_t> pairs;
    count_t max_from = 0;
    count_t max_to = 0;
    std::size_t n_terms = 0;

    explicit TransitionCounts(const CountSeries& s) {
        if (s.size() < 2) throw InputError("series needs at least 2 observations");
        s.check_non_negative();
        for (std::size_t t = 1; t < s.size(); ++t) {
            ++pairs[{s[t - 1], s[t]}];
            max_from = std::max(max_from, s[t - 1]);
            max_to = std::max(max_to, s[t]);
        }
        n_terms = s.size() - 1;
    }
};

/// Conditional log-likelihood sum_t log P(X_{t-1} -> X_t).
inline double cond_loglik(const FamilyParams& fp, const TransitionCounts& tc) {
    const InarKernel k = make_kernel(fp);
    const auto g = k.summand_row(tc.max_to);
    const auto eps = k.innovation_row(tc.max_to);
    std::vector<double> surv(detail::idx(tc.max_to) + 1, 0.0);
    surv[0] = 1.0;
    count_t surv_y = 0;
    std::vector<double> row;
    count_t row_y = -1;

    double ll = 0.0;
    for (const auto& [yx, mult] : tc.pairs) {  // ordered by y, then x
        const auto [y, x] = yx;
        if (y != row_y) {
            while (surv_y < y) {
                surv = InarKernel::convolve_truncated(surv, g);
                ++surv_y;
            }
            row = InarKernel::convolve_truncated(surv, eps);
            row_y = y;
        }
        const double p = row[detail::idx(x)];
        if (!(p > 0.0) || !std::isfinite(p)) return kLogLikFloor;
        ll += static_cast<double>(mult) * std::log(p);
    }
    return ll;
}

inline double cond_loglik(const FamilyParams& fp, const CountSeries& series) {
    return cond_loglik(fp, TransitionCounts(series));
}

// ---------------------------------------------------------------------------
// Information criteria
// ---------------------------------------------------------------------------

struct InformationCriteria {
    double aic = 0.0;
    double bic = 0.0;
    double aicc = 0.0;
};

inline double aic(double loglik, std::size_t k) { return -2.0 * loglik + 2.0 * static_cast<double>(k); }

inline double bic(double loglik, std::size_t k, std::size_t n_eff) {
    return -2.0 * loglik + static_cast<double>(k) * std::log(static_cast<double>(n_eff));
}

inline InformationCriteria information_criteria(double loglik, std::size_t k, std::size_t n_eff) {
    if (n_eff <= k + 1) {
        throw AiccUndefined("AICc undefined: n_eff = " + std::to_string(n_eff) + " <= k + 1 = " + std::to_string(k + 1));
    }
    InformationCriteria ic;
    ic.aic = aic(loglik, k);
    ic.bic = bic(loglik, k, n_eff);
    const double kd = static_cast<double>(k);
    ic.aicc = ic.aic + 2.0 * kd * (kd + 1.0) / (static_cast<double>(n_eff) - kd - 1.0);
    return ic;
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

struct FitOptions {
    int restarts = 5;
    int max_iter = 2000;
    double tol = 1e-8;
    std::uint64_t seed = 20240101;
    /// Optional starting point; replaces the moment-based starts when set.
    std::optional<FamilyParams> start;
};

struct FitResult {
    Family family = Family::nogear;
    FamilyParams params = GinarParams{};
    double loglik = 0.0;
    std::size_t k = 0;
    std::size_t n_eff = 0;
    double aic = 0.0;
    double bic = 0.0;
    std::optional<double> aicc;
    bool converged = false;
    int iterations = 0;
    int evaluations = 0;
    std::vector<std::string> warnings;
};

namespace detail {

inline double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

inline double clamp_open(double v, double lo = 1e-6, double hi = 1.0 - 1e-6) { return std::clamp(v, lo, hi); }

// Unconstrained coordinates <-> family parameters. For NoGeAR,
// beta = alpha * theta * logistic(u) so every finite u satisfies the
// ordering constraints; for NGINAR alpha_ng = mu / (1 + mu) * logistic(u).
inline FamilyParams from_unconstrained(Family f, const std::vector<double>& u) {
    switch (f) {
        case Family::nogear: {
            const double a = logistic(u[0]);
            const double t = logistic(u[1]);
            return validate_params(a, a * t * logistic(u[2]), t);
        }
        case Family::nginar: {
            const double mu = std::exp(u[1]);
            NginarParams np{mu / (1.0 + mu) * logistic(u[0]), mu};
            (void)nginar_as_nogear(np);
            return np;
        }
        case Family::ginar: {
            GinarParams gp{logistic(u[0]), logistic(u[1])};
            validate(gp);
            return gp;
        }
        case Family::pinar: {
            PinarParams pp{std::exp(u[0]), logistic(u[1])};
            validate(pp);
            return pp;
        }
    }
    throw Error("unreachable family");
}

inline std::vector<double> to_unconstrained(const FamilyParams& fp) {
    return std::visit(
        [](const auto& p) -> std::vector<double> {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ModelParams>) {
                const double r = clamp_open(p.beta() / (p.alpha() * p.theta()));
                return {logit(p.alpha()), logit(p.theta()), logit(r)};
            } else if constexpr (std::is_same_v<T, NginarParams>) {
                const double r = clamp_open(p.alpha_ng / (p.mu / (1.0 + p.mu)));
                return {logit(r), std::log(p.mu)};
            } else if constexpr (std::is_same_v<T, GinarParams>) {
                return {logit(p.p), logit(p.alpha_thin)};
            } else {
                return {std::log(p.lambda), logit(p.alpha_thin)};
            }
        },
        fp);
}

inline double sample_mean(const CountSeries& s) {
    double m = 0.0;
    for (count_t v : s.values) m += static_cast<double>(v);
    return m / static_cast<double>(s.size());
}

inline double lag1_autocorrelation(const CountSeries& s) {
    const double m = sample_mean(s);
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < s.size(); ++t) {
        const double d = static_cast<double>(s[t]) - m;
        den += d * d;
        if (t > 0) num += d * (static_cast<double>(s[t - 1]) - m);
    }
    return den > 0.0 ? num / den : 0.0;
}

/// Moment-matching starting points in unconstrained coordinates.
inline std::vector<std::vector<double>> moment_starts(Family f, const CountSeries& s) {
    const double m = std::max(sample_mean(s), 0.05);
    const double rho = std::clamp(lag1_autocorrelation(s), 0.05, 0.9);
    std::vector<FamilyParams> starts;
    switch (f) {
        case Family::nogear: {
            const double theta = clamp_open(m / (1.0 + m), 0.02, 0.98);
            // alpha = 1 - rho (1 - beta) keeps omega = rho; beta <= alpha*theta
            // holds for beta up to (1 - rho) theta / (1 - rho theta).
            const double beta_max = (1.0 - rho) * theta / (1.0 - rho * theta);
            for (double c : {0.25, 0.5, 0.9}) {
                const double beta = c * beta_max;
                const double alpha = 1.0 - rho * (1.0 - beta);
                try {
                    starts.emplace_back(validate_params(alpha, beta, theta));
                } catch (const ConstraintViolation&) {
                }
            }
            break;
        }
        case Family::nginar:
            starts.emplace_back(NginarParams{std::min(rho, 0.9 * m / (1.0 + m)), m});
            break;
        case Family::ginar:
            starts.emplace_back(GinarParams{clamp_open(m / (1.0 + m), 0.02, 0.98), rho});
            break;
        case Family::pinar:
            starts.emplace_back(PinarParams{m, rho});
            break;
    }
    std::vector<std::vector<double>> out;
    for (const auto& fp : starts) out.push_back(to_unconstrained(fp));
    return out;
}

}  // namespace detail

/**
 * @brief Conditional ML fit by multi-start Nelder-Mead.
 *
 * Starts are the moment-based points (or opts.start) followed by
 * `opts.restarts` Gaussian perturbations of the first start; perturbation i
 * depends only on (opts.seed, i), so adding restarts never changes earlier
 * ones. Each start is polished by one re-run from its optimum.
 */
inline FitResult fit_cml(Family family, const CountSeries& series, const FitOptions& opts = {}) {
    if (series.size() < 2) throw InputError("series needs at least 2 observations");
    series.check_non_negative();
    if (std::all_of(series.values.begin(), series.values.end(), [&](count_t v) { return v == series[0]; })) {
        throw DegenerateSeries("series is constant; transitions carry no information");
    }

    FitResult out;
    out.family = family;
    out.k = parameter_count(family);
    out.n_eff = series.size() - 1;
    if (series.size() < 20) out.warnings.push_back("series shorter than 20 observations; estimates are unreliable");

    const TransitionCounts tc(series);
    auto objective = [&](const std::vector<double>& u) {
        try {
            const double ll = cond_loglik(detail::from_unconstrained(family, u), tc);
            return ll <= kLogLikFloor ? std::numeric_limits<double>::infinity() : -ll;
        } catch (const ConstraintViolation&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    std::vector<std::vector<double>> starts;
    if (opts.start) {
        if (family_of(*opts.start) != family) throw InputError("start parameters belong to a different family");
        starts.push_back(detail::to_unconstrained(*opts.start));
    } else {
        starts = detail::moment_starts(family, series);
    }
    if (starts.empty()) throw Error("no valid starting point");
    const std::vector<double> base = starts.front();
    for (int r = 0; r < opts.restarts; ++r) {
        auto eng = RngSpec{opts.seed, static_cast<std::uint64_t>(r)}.engine();
        std::normal_distribution<double> z(0.0, 1.0);
        auto u = base;
        for (double& v : u) v += z(eng);
        starts.push_back(std::move(u));
    }

    NelderMeadOptions nm;
    nm.max_iter = opts.max_iter;
    nm.ftol = opts.tol;
    NelderMeadResult best;
    for (const auto& s : starts) {
        auto r = nelder_mead(objective, s, nm);
        if (std::isfinite(r.value)) {
            nm.initial_step = 0.1;
            auto polished = nelder_mead(objective, r.x, nm);
            nm.initial_step = 0.5;
            polished.iterations += r.iterations;
            polished.evaluations += r.evaluations;
            if (polished.value <= r.value) r = std::move(polished);
        }
        out.evaluations += r.evaluations;
        if (r.value < best.value) best = std::move(r);
    }
    if (!std::isfinite(best.value)) throw Error("no start produced a finite likelihood");

    out.params = detail::from_unconstrained(family, best.x);
    out.loglik = -best.value;
    out.converged = best.converged;
    out.iterations = best.iterations;
    out.aic = aic(out.loglik, out.k);
    out.bic = bic(out.loglik, out.k, out.n_eff);
    if (out.n_eff > out.k + 1) out.aicc = information_criteria(out.loglik, out.k, out.n_eff).aicc;
    if (!out.converged) out.warnings.push_back("optimizer stopped at max_iter before meeting tolerance");
    return out;
}

}  // namespace nogear
