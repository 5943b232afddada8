#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "matrix.hpp"

namespace factorlens {

/// Variables (rows) by factors (columns).
struct LoadingMatrix {
  Matrix values;
  std::vector<std::string> variables;

  std::size_t n_variables() const { return values.rows(); }
  std::size_t n_factors() const { return values.cols(); }
  /// Per-factor sum of squared loadings (explained variance).
  std::vector<double> column_ssl() const;
};

/// Loading column j = eigenvector_j * sqrt(eigenvalue_j) for the k largest
/// eigenvalues. `names` labels the rows; defaults to v1..vp.
LoadingMatrix extract_pca_loadings(const EigenDecomposition& eig, std::size_t k,
                                   std::vector<std::string> names = {});

/// Row sums of squared loadings.
std::vector<double> communalities(const LoadingMatrix& loadings);

/// Explained-variance shares: 100 * total / n_variables and their running sum.
struct VarianceShares {
  std::vector<double> pct;
  std::vector<double> cumulative;
};
VarianceShares variance_shares(std::span<const double> totals, std::size_t n_variables);

/// Number of eigenvalues strictly greater than 1.
std::size_t retain_kaiser(std::span<const double> eigenvalues);

/// Smallest k whose cumulative share 100 * sum(first k) / p reaches
/// `threshold_pct`, where p is the number of eigenvalues.
std::size_t retain_cumvar(std::span<const double> eigenvalues, double threshold_pct = 60.0);

struct ScreeSeries {
  struct Point {
    std::size_t component;  // 1-based
    double eigenvalue;
  };
  std::vector<Point> points;
  /// Component (1-based) with the largest positive second difference
  /// lambda[i-1] - 2 lambda[i] + lambda[i+1]; absent for p < 3 or flat spectra.
  std::optional<std::size_t> acceleration_peak;
  /// Retained-count suggestion: the component before the acceleration peak.
  std::optional<std::size_t> suggested_k;
};

ScreeSeries scree_series(std::span<const double> eigenvalues);

/// Sum over factors of the variance of squared loadings.
double varimax_criterion(const Matrix& loadings);

struct VarimaxResult {
  LoadingMatrix loadings;
  Matrix rotation;  // k x k orthogonal; loadings = input * rotation
  /// Criterion (on the possibly row-normalized loadings) before the first
  /// sweep and after each sweep.
  std::vector<double> criterion_history;
  int sweeps = 0;
  bool converged = true;
};

/// Orthogonal varimax rotation by pairwise planar rotations. Output columns
/// are ordered by descending sum of squared loadings and signed so the
/// largest-magnitude entry of each column is positive.
VarimaxResult varimax_rotate(const LoadingMatrix& loadings, bool kaiser_normalize = true);

struct Assignment {
  /// Factor index per variable, or nullopt when no |loading| reaches the cutoff.
  std::vector<std::optional<std::size_t>> factor;
  /// Variables with two or more |loading| >= cutoff.
  std::vector<bool> cross_loading;
  double cutoff = 0.36;

  /// Variable indices per factor.
  std::vector<std::vector<std::size_t>> groups(std::size_t n_factors) const;
};

Assignment assign_variables(const LoadingMatrix& loadings, double cutoff = 0.36);

struct Alignment {
  Matrix aligned;                      // aligned(:, j) = signs[j] * candidate(:, permutation[j])
  std::vector<std::size_t> permutation;
  std::vector<int> signs;
  double frobenius_distance = 0.0;
  double max_abs_error = 0.0;
};

/// Column permutation and sign pattern of `candidate` closest (Frobenius)
/// to `reference`. Exhaustive over the k! permutations.
Alignment align_to_reference(const Matrix& candidate, const Matrix& reference);

/// Regression-method scores Z * R^-1 * L.
Matrix factor_scores(const DataMatrix& standardized, const SymMatrix& r, const LoadingMatrix& rotated);

/// Per factor, the sum of standardized variables assigned to it, each signed
/// by its loading.
Matrix sum_of_assigned_scores(const DataMatrix& standardized, const LoadingMatrix& rotated,
                              const Assignment& assignment);

struct RetentionRule {
  enum class Kind { kKaiser, kCumVar, kFixed };
  Kind kind = Kind::kKaiser;
  double threshold_pct = 60.0;
  std::size_t fixed_k = 0;

  /// Parses "kaiser", "cumvar:<pct>" or "fixed:<k>".
  static RetentionRule parse(const std::string& text);
  std::string to_string() const;
};

enum class ScoreMethod { kRegression, kSumOfAssigned };

struct EfaOptions {
  RetentionRule retention;
  double cutoff = 0.36;
  bool kaiser_normalize = true;
};

struct FactorModel {
  std::vector<std::string> variables;
  std::vector<double> eigenvalues;
  std::vector<double> pct_variance;
  std::vector<double> cumulative_pct;
  std::size_t k = 0;
  LoadingMatrix loadings_unrotated;
  LoadingMatrix loadings_rotated;
  Matrix rotation;
  std::vector<double> rotation_ssl;
  std::vector<double> communalities;
  Assignment assignment;
  ScreeSeries scree;
  int varimax_sweeps = 0;
  bool varimax_converged = true;
  /// Retention counts each rule would give, for the report.
  std::size_t kaiser_k = 0;
  std::size_t cumvar60_k = 0;
};

/// PCA extraction, retention, varimax rotation and assignment on a
/// correlation matrix. Throws NumericalError when nothing is retained.
FactorModel fit_efa(const SymMatrix& r, const std::vector<std::string>& variables, const EfaOptions& options = {});

}  // namespace factorlens
