#pragma once

#include "nogear/types.hpp"

#include <sstream>

namespace nogear {

/**
 * @brief Validated NoGeAR(1) parameter triple with derived quantities.
 *
 * alpha, beta govern the inflated-parameter thinning law G*, theta is the
 * parameter of the geometric marginal. Only `validate_params` produces
 * instances, so every ModelParams in circulation satisfies
 * 0 < beta < alpha < 1, beta < theta and beta <= alpha * theta.
 */
class ModelParams {
public:
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    double theta() const { return theta_; }

    /// Mean of G*: (1 - alpha) / (1 - beta).
    double omega() const { return omega_; }
    /// Weight of the theta-geometric component of the innovation mixture.
    double mix_weight() const { return mix_weight_; }
    double mu_eps() const { return mu_eps_; }
    double sigma2_eps() const { return sigma2_eps_; }

    /// Variance of a single G* term.
    double gstar_var() const { return (1.0 - alpha_) * (alpha_ + beta_) / ((1.0 - beta_) * (1.0 - beta_)); }

    /// Stationary mean theta / (1 - theta).
    double marginal_mean() const { return theta_ / (1.0 - theta_); }

    friend ModelParams validate_params(double alpha, double beta, double theta);

private:
    ModelParams() = default;

    double alpha_ = 0, beta_ = 0, theta_ = 0;
    double omega_ = 0, mix_weight_ = 0, mu_eps_ = 0, sigma2_eps_ = 0;
};

namespace detail {

inline std::string fmt_num(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

inline void require_open_unit(const char* name, double v) {
    if (!(v > 0.0 && v < 1.0)) {
        throw ConstraintViolation(std::string("0 < ") + name + " < 1 violated (" + name + " = " + fmt_num(v) +
                                  ")");
    }
}

// Moments of the geometric law (1 - q) q^x on {0, 1, ...}.
inline double geom_mean(double q) { return q / (1.0 - q); }
inline double geom_second_moment(double q) { return q * (1.0 + q) / ((1.0 - q) * (1.0 - q)); }

}  // namespace detail

inline ModelParams validate_params(double alpha, double beta, double theta) {
    detail::require_open_unit("alpha", alpha);
    detail::require_open_unit("beta", beta);
    detail::require_open_unit("theta", theta);
    if (!(beta < alpha)) {
        throw ConstraintViolation("beta < alpha violated (alpha = " + detail::fmt_num(alpha) +
                                  ", beta = " + detail::fmt_num(beta) + ")");
    }
    if (!(beta < theta)) {
        throw ConstraintViolation("beta < theta violated (beta = " + detail::fmt_num(beta) +
                                  ", theta = " + detail::fmt_num(theta) + ")");
    }
    if (!(beta <= alpha * theta)) {
        throw ConstraintViolation("beta <= alpha*theta violated (beta = " + detail::fmt_num(beta) +
                                  ", alpha*theta = " + detail::fmt_num(alpha * theta) + ")");
    }

    ModelParams p;
    p.alpha_ = alpha;
    p.beta_ = beta;
    p.theta_ = theta;
    p.omega_ = (1.0 - alpha) / (1.0 - beta);
    // beta == alpha*theta is admissible and gives a pure beta-geometric innovation
    p.mix_weight_ = std::max(0.0, (alpha * theta - beta) / (theta - beta));

    const double w = p.mix_weight_;
    p.mu_eps_ = w * detail::geom_mean(theta) + (1.0 - w) * detail::geom_mean(beta);
    const double second = w * detail::geom_second_moment(theta) + (1.0 - w) * detail::geom_second_moment(beta);
    p.sigma2_eps_ = second - p.mu_eps_ * p.mu_eps_;
    return p;
}

}  // namespace nogear
