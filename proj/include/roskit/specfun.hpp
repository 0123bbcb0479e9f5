#pragma once

// Special functions used by the closed-form constants and the log-concave
// moment formulas. All functions are pure.

namespace roskit::specfun {

/// ln Gamma(x) for x > 0.
double log_gamma(double x);

/// Regularized lower incomplete gamma P(s, x) = gamma(s, x) / Gamma(s).
double reg_lower_inc_gamma(double s, double x);

/// Regularized upper incomplete gamma Q(s, x) = 1 - P(s, x), computed
/// without cancellation when Q is small.
double reg_upper_inc_gamma(double s, double x);

/// ln gamma(s, x), the unregularized lower incomplete gamma. Finite for x > 0.
double log_lower_inc_gamma(double s, double x);

/// ln Gamma(s, x), the unregularized upper incomplete gamma.
double log_upper_inc_gamma(double s, double x);

/// ln(e^x Gamma(s, x)) = ln of the integral of (x + t)^(s-1) e^(-t) over
/// t >= 0, accurate for large x.
double log_scaled_upper_inc_gamma(double s, double x);

/// E|Z|^p for a standard Gaussian Z.
double gaussian_abs_moment(double p);

/// beta_p = 1 / E|cos(2 pi U)|^p with U uniform on [0, 1].
double steinhaus_beta(double p);

/// log(exp(a) + exp(b)) without overflow.
double log_add_exp(double a, double b);

}  // namespace roskit::specfun
