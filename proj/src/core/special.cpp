#include "special.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "error.hpp"

namespace factorlens {
namespace {

constexpr double kRelTol = 1e-15;
constexpr int kMaxTerms = 10000;
constexpr double kTiny = 1e-300;

void check_args(double a, double x) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    std::ostringstream msg;
    msg << "incomplete gamma: shape must be positive and finite, got " << a;
    throw ValidationError(msg.str());
  }
  if (!(x >= 0.0)) {
    std::ostringstream msg;
    msg << "incomplete gamma: x must be non-negative, got " << x;
    throw ValidationError(msg.str());
  }
}

// exp(-x) x^a / Gamma(a), in log space.
double log_prefactor(double a, double x) { return a * std::log(x) - x - std::lgamma(a); }

// P(a,x) by the power series sum x^n / (a (a+1) ... (a+n)); valid for x < a+1.
double lower_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int n = 0; n < kMaxTerms; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kRelTol) return sum * std::exp(log_prefactor(a, x));
  }
  throw NumericalError("incomplete gamma series did not converge");
}

// Q(a,x) by Legendre's continued fraction, modified Lentz evaluation; valid for x >= a+1.
double upper_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kRelTol) return std::exp(log_prefactor(a, x)) * h;
  }
  throw NumericalError("incomplete gamma continued fraction did not converge");
}

}  // namespace

double gamma_p(double a, double x) {
  check_args(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return lower_series(a, x);
  return 1.0 - upper_fraction(a, x);
}

double gamma_q(double a, double x) {
  check_args(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - lower_series(a, x);
  return upper_fraction(a, x);
}

double chi_square_upper_tail(double x, double df) {
  if (!(df > 0.0)) throw ValidationError("chi-square degrees of freedom must be positive");
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * df, 0.5 * x);
}

}  // namespace factorlens
