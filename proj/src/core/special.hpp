#pragma once

namespace factorlens {

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed
/// directly (continued fraction) in the upper tail so small values keep
/// their relative accuracy.
double gamma_q(double a, double x);

/// Upper-tail probability of a chi-square variate with `df` degrees of
/// freedom: Q(df/2, x/2).
double chi_square_upper_tail(double x, double df);

}  // namespace factorlens
