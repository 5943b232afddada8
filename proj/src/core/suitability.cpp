#include "suitability.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "special.hpp"

namespace factorlens {

double kmo(const SymMatrix& r) {
  const std::size_t p = r.dim();
  if (p < 2) throw ValidationError("KMO needs at least 2 variables");
  double sum_r2 = 0.0;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j)
      if (i != j) sum_r2 += r(i, j) * r(i, j);
  if (sum_r2 == 0.0) throw NumericalError("degenerate: no correlations");

  const SymMatrix q = invert_spd(r);
  double sum_a2 = 0.0;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j)
      if (i != j) {
        const double a = -q(i, j) / std::sqrt(q(i, i) * q(j, j));
        sum_a2 += a * a;
      }
  return std::clamp(sum_r2 / (sum_r2 + sum_a2), 0.0, 1.0);
}

BartlettResult bartlett_sphericity(const SymMatrix& r, std::size_t n) {
  const std::size_t p = r.dim();
  if (n <= p) {
    throw ValidationError("Bartlett test needs more observations than variables (n=" + std::to_string(n) +
                          ", p=" + std::to_string(p) + ")");
  }
  const double log_det = log_determinant(r);
  const double pd = static_cast<double>(p);
  BartlettResult out;
  out.chi2 = std::max(0.0, -(static_cast<double>(n) - 1.0 - (2.0 * pd + 5.0) / 6.0) * log_det);
  out.df = static_cast<int>(p * (p - 1) / 2);
  out.p_value = out.df > 0 ? chi_square_upper_tail(out.chi2, out.df) : 1.0;
  return out;
}

SuitabilityReport assess_suitability(const SymMatrix& r, std::size_t n, const SuitabilityThresholds& thresholds) {
  SuitabilityReport rep;
  rep.bartlett = bartlett_sphericity(r, n);
  rep.kmo = kmo(r);
  rep.kmo_pass = rep.kmo >= thresholds.kmo_min;
  rep.bartlett_pass = rep.bartlett.p_value < thresholds.alpha;
  return rep;
}

}  // namespace factorlens
