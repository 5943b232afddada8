#pragma once

#include <cstddef>

#include "matrix.hpp"

namespace factorlens {

struct BartlettResult {
  double chi2 = 0.0;
  int df = 0;
  double p_value = 1.0;
};

struct SuitabilityThresholds {
  double kmo_min = 0.6;
  double alpha = 0.05;
};

struct SuitabilityReport {
  double kmo = 0.0;
  BartlettResult bartlett;
  bool kmo_pass = false;
  bool bartlett_pass = false;

  bool passed() const { return kmo_pass && bartlett_pass; }
};

/// Kaiser-Meyer-Olkin sampling adequacy of a correlation matrix.
/// Throws NumericalError when every off-diagonal correlation is zero.
double kmo(const SymMatrix& r);

/// Bartlett's test of sphericity for a correlation matrix from n observations.
BartlettResult bartlett_sphericity(const SymMatrix& r, std::size_t n);

SuitabilityReport assess_suitability(const SymMatrix& r, std::size_t n, const SuitabilityThresholds& thresholds = {});

}  // namespace factorlens
