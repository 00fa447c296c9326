#pragma once

#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace ecic {

/// Regularized incomplete beta inverse: the x with I_x(a,b) = p.
inline double inverse_reg_incomplete_beta(double a, double b, double p) {
    return boost::math::ibeta_inv(a, b, p);
}

/// Beta(a,b) quantile via the inverse regularized incomplete beta.
inline double beta_quantile(double q, double a, double b) {
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("beta_quantile: q must lie in (0,1)");
    if (!(a > 0.0 && b > 0.0))
        throw std::invalid_argument("beta_quantile: shape parameters must be positive");
    return inverse_reg_incomplete_beta(a, b, q);
}

inline double student_t_pdf(double t, double nu) {
    const double log_norm = boost::math::lgamma((nu + 1.0) / 2.0) -
                            boost::math::lgamma(nu / 2.0) -
                            0.5 * std::log(nu * 3.141592653589793238462643383279502884);
    return std::exp(log_norm - 0.5 * (nu + 1.0) * std::log1p(t * t / nu));
}

inline double student_t_cdf(double t, double nu) {
    if (t == 0.0) return 0.5;
    const double x = nu / (nu + t * t);
    const double half_tail = 0.5 * boost::math::ibeta(nu / 2.0, 0.5, x);
    return t > 0.0 ? 1.0 - half_tail : half_tail;
}

/// Student-t quantile with `nu` degrees of freedom: inverse regularized
/// incomplete beta plus one Newton step. Odd symmetry is exact by reflection.
inline double student_t_quantile(double q, double nu) {
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("student_t_quantile: q must lie in (0,1)");
    if (!(nu > 0.0))
        throw std::invalid_argument("student_t_quantile: degrees of freedom must be positive");
    if (q == 0.5) return 0.0;
    if (q < 0.5) return -student_t_quantile(1.0 - q, nu);

    // For t > 0: P(T > t) = I_x(nu/2, 1/2) / 2 with x = nu / (nu + t^2).
    const double x = inverse_reg_incomplete_beta(nu / 2.0, 0.5, 2.0 * (1.0 - q));
    double t = std::sqrt(nu * (1.0 - x) / x);

    const double pdf = student_t_pdf(t, nu);
    if (pdf > 0.0) {
        const double step = (student_t_cdf(t, nu) - q) / pdf;
        if (std::isfinite(step) && std::fabs(step) < 0.1 * (1.0 + t)) t -= step;
    }
    return t;
}

}  // namespace ecic
