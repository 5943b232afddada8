#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ingest.hpp"
#include "matrix.hpp"

namespace factorlens {

/// Design rows without the intercept column; fit_logistic prepends it.
struct TrainingSet {
  Matrix features;  // n x d
  std::vector<int> labels;
  int question = 1;
  std::string variant;
};

struct LogisticOptions {
  double l2 = 1e-4;  // applied to non-intercept weights only
  int max_iterations = 500;
  double gradient_tolerance = 1e-8;
  double max_condition = 1e12;  // above this, take a gradient step instead of Newton
};

struct LogisticModel {
  std::vector<double> weights;  // intercept first
  bool converged = false;
  int iterations = 0;
  double l2 = 0.0;
  double gradient_norm = 0.0;
  int gradient_steps = 0;  // iterations that fell back to gradient ascent
  std::vector<double> objective_history;
};

/// sum_i [y log s(w.x) + (1-y) log(1-s(w.x))] - l2/2 |w_1..|^2, x with leading 1.
double penalized_log_likelihood(const Matrix& features, std::span<const int> labels, std::span<const double> weights,
                                double l2);
std::vector<double> penalized_gradient(const Matrix& features, std::span<const int> labels,
                                       std::span<const double> weights, double l2);

/// Newton/IRLS with step halving. Throws ValidationError for single-class
/// labels or n < d + 1. Non-convergence returns converged=false and adds a
/// warning.
LogisticModel fit_logistic(const TrainingSet& ts, const LogisticOptions& options = {}, Warnings* warnings = nullptr);

struct Prediction {
  double probability = 0.5;
  int label = 1;  // probability >= 0.5
};

Prediction predict(const LogisticModel& model, std::span<const double> x);

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  std::size_t support = 0;
};

enum class Averaging { kWeighted, kPositiveOnly };

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  ClassMetrics positive;
  ClassMetrics negative;
};

/// Per-class P/R/F (0 where undefined) and their class-support-weighted
/// average, or the positive class alone.
Metrics score_confusion(const Confusion& c, Averaging averaging = Averaging::kWeighted);

/// Fold index (0-based) per row: classes are shuffled separately and dealt
/// round-robin. Throws ValidationError if a training fold would lose a class.
std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed);

struct CvOptions {
  int folds = 10;
  std::uint64_t seed = 2017;
  double l2 = 1e-4;
  Averaging averaging = Averaging::kWeighted;
};

struct EvalReport {
  int question = 1;
  std::string variant;
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  ClassMetrics positive;
  ClassMetrics negative;
  Confusion confusion;
  int folds = 10;
  std::uint64_t seed = 0;
  double l2 = 0.0;
  Averaging averaging = Averaging::kWeighted;
  int unconverged_fits = 0;
};

/// Stratified k-fold CV; metrics from pooled out-of-fold predictions.
EvalReport evaluate_cv(const Matrix& features, std::span<const int> labels, int question, const std::string& variant,
                       const CvOptions& options = {}, Warnings* warnings = nullptr);

struct VariantComparison {
  int question = 1;
  EvalReport eight;
  EvalReport factors;
};

/// Both variants per question, on identical folds.
std::vector<VariantComparison> compare_variants(const Matrix& features, const Matrix& scores, const LabelTable& labels,
                                                std::span<const int> questions, const std::string& factor_variant,
                                                const CvOptions& options = {}, Warnings* warnings = nullptr);

/// "three" for three factors, otherwise "factors<k>".
std::string factor_variant_name(std::size_t k);

}  // namespace factorlens
