#include "classify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "error.hpp"
#include "rng.hpp"

namespace factorlens {
namespace {

constexpr double kObjectiveNoise = 1e-13;

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// log(1 + e^t) without overflow.
double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double linear(std::span<const double> row, std::span<const double> w) {
  double s = w[0];
  for (std::size_t j = 0; j < row.size(); ++j) s += w[j + 1] * row[j];
  return s;
}

void check_shapes(const Matrix& x, std::span<const int> y, std::span<const double> w) {
  if (x.rows() != y.size()) throw ValidationError("feature rows and labels differ in length");
  if (w.size() != x.cols() + 1) throw ValidationError("weight vector must have d + 1 entries");
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

double penalized_log_likelihood(const Matrix& features, std::span<const int> labels, std::span<const double> weights,
                                double l2) {
  check_shapes(features, labels, weights);
  double ll = 0.0;
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const double eta = linear(features.row(i), weights);
    ll += labels[i] ? -softplus(-eta) : -softplus(eta);
  }
  double penalty = 0.0;
  for (std::size_t j = 1; j < weights.size(); ++j) penalty += weights[j] * weights[j];
  return ll - 0.5 * l2 * penalty;
}

std::vector<double> penalized_gradient(const Matrix& features, std::span<const int> labels,
                                       std::span<const double> weights, double l2) {
  check_shapes(features, labels, weights);
  std::vector<double> g(weights.size(), 0.0);
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const auto row = features.row(i);
    const double r = static_cast<double>(labels[i]) - sigmoid(linear(row, weights));
    g[0] += r;
    for (std::size_t j = 0; j < row.size(); ++j) g[j + 1] += r * row[j];
  }
  for (std::size_t j = 1; j < g.size(); ++j) g[j] -= l2 * weights[j];
  return g;
}

LogisticModel fit_logistic(const TrainingSet& ts, const LogisticOptions& options, Warnings* warnings) {
  const Matrix& x = ts.features;
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (ts.labels.size() != n) throw ValidationError("training set has mismatched labels");
  if (n < d + 1) {
    throw ValidationError("logistic regression needs n >= d + 1 (n=" + std::to_string(n) + ", d=" + std::to_string(d) + ")");
  }
  std::size_t positives = 0;
  for (int y : ts.labels) {
    if (y != 0 && y != 1) throw ValidationError("labels must be 0 or 1");
    positives += static_cast<std::size_t>(y);
  }
  if (positives == 0 || positives == n) {
    throw ValidationError("question " + std::to_string(ts.question) + ": labels contain a single class");
  }
  if (options.l2 < 0.0) throw ValidationError("l2 must be non-negative");

  LogisticModel m;
  m.l2 = options.l2;
  m.weights.assign(d + 1, 0.0);
  double obj = penalized_log_likelihood(x, ts.labels, m.weights, options.l2);
  m.objective_history.push_back(obj);

  for (int it = 0; it < options.max_iterations; ++it) {
    const auto g = penalized_gradient(x, ts.labels, m.weights, options.l2);
    m.gradient_norm = norm(g);
    if (m.gradient_norm < options.gradient_tolerance) {
      m.converged = true;
      break;
    }

    // Negative Hessian X^T W X + l2 I (intercept unpenalized).
    Matrix h(d + 1, d + 1);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = x.row(i);
      const double pr = sigmoid(linear(row, m.weights));
      const double wgt = pr * (1.0 - pr);
      for (std::size_t a = 0; a <= d; ++a) {
        const double xa = a == 0 ? 1.0 : row[a - 1];
        for (std::size_t b = a; b <= d; ++b) {
          const double xb = b == 0 ? 1.0 : row[b - 1];
          h(a, b) += wgt * xa * xb;
        }
      }
    }
    for (std::size_t a = 1; a <= d; ++a) h(a, a) += options.l2;
    for (std::size_t a = 0; a <= d; ++a)
      for (std::size_t b = 0; b < a; ++b) h(a, b) = h(b, a);

    const SymMatrix hs(h);
    const auto eig = eigen_sym(hs);
    const double lmax = eig.eigenvalues.front();
    const double lmin = eig.eigenvalues.back();
    std::vector<double> step(d + 1);
    if (lmin > 0.0 && lmax / lmin <= options.max_condition) {
      const Matrix l = cholesky(hs);
      std::vector<double> z(d + 1);
      for (std::size_t i = 0; i <= d; ++i) {
        double s = g[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * z[k];
        z[i] = s / l(i, i);
      }
      for (std::size_t i = d + 1; i-- > 0;) {
        double s = z[i];
        for (std::size_t k = i + 1; k <= d; ++k) s -= l(k, i) * step[k];
        step[i] = s / l(i, i);
      }
    } else {
      ++m.gradient_steps;
      const double scale = lmax > 0.0 ? 1.0 / lmax : 1.0;
      for (std::size_t i = 0; i <= d; ++i) step[i] = scale * g[i];
    }

    // Step halving until the objective does not decrease. Near the optimum
    // the objective change drops below its rounding error; a step that loses
    // only rounding noise is still taken if it shrinks the gradient.
    const double noise = kObjectiveNoise * std::max(1.0, std::abs(obj));
    double t = 1.0;
    std::vector<double> trial(d + 1);
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving, t *= 0.5) {
      for (std::size_t i = 0; i <= d; ++i) trial[i] = m.weights[i] + t * step[i];
      const double next = penalized_log_likelihood(x, ts.labels, trial, options.l2);
      const bool improves = next >= obj ||
                            (next >= obj - noise &&
                             norm(penalized_gradient(x, ts.labels, trial, options.l2)) < m.gradient_norm);
      if (improves) {
        m.weights = trial;
        obj = next;
        accepted = true;
        break;
      }
    }
    m.iterations = it + 1;
    m.objective_history.push_back(obj);
    if (!accepted) break;
  }

  if (!m.converged) {
    const auto g = penalized_gradient(x, ts.labels, m.weights, options.l2);
    m.gradient_norm = norm(g);
    m.converged = m.gradient_norm < options.gradient_tolerance;
  }
  for (double w : m.weights)
    if (!std::isfinite(w)) throw NumericalError("logistic regression produced non-finite weights");
  if (!m.converged && warnings) {
    std::ostringstream msg;
    msg << "question " << ts.question << " (" << ts.variant << "): logistic fit stopped after " << m.iterations
        << " iterations with gradient norm " << m.gradient_norm;
    warnings->push_back(msg.str());
  }
  return m;
}

Prediction predict(const LogisticModel& model, std::span<const double> x) {
  if (x.size() + 1 != model.weights.size()) {
    throw ValidationError("prediction row has " + std::to_string(x.size()) + " features, model expects " +
                          std::to_string(model.weights.size() - 1));
  }
  Prediction p;
  p.probability = sigmoid(linear(x, model.weights));
  p.label = p.probability >= 0.5 ? 1 : 0;
  return p;
}

namespace {

ClassMetrics class_metrics(std::size_t hit, std::size_t predicted, std::size_t actual) {
  ClassMetrics m;
  m.support = actual;
  m.precision = predicted ? static_cast<double>(hit) / static_cast<double>(predicted) : 0.0;
  m.recall = actual ? static_cast<double>(hit) / static_cast<double>(actual) : 0.0;
  const double pr = m.precision + m.recall;
  m.f_measure = pr > 0.0 ? 2.0 * m.precision * m.recall / pr : 0.0;
  return m;
}

}  // namespace

Metrics score_confusion(const Confusion& c, Averaging averaging) {
  Metrics out;
  out.positive = class_metrics(c.tp, c.tp + c.fp, c.tp + c.fn);
  out.negative = class_metrics(c.tn, c.tn + c.fn, c.tn + c.fp);
  if (averaging == Averaging::kPositiveOnly) {
    out.precision = out.positive.precision;
    out.recall = out.positive.recall;
    out.f_measure = out.positive.f_measure;
    return out;
  }
  const double n = static_cast<double>(c.total());
  if (n == 0.0) return out;
  const double wp = static_cast<double>(out.positive.support) / n;
  const double wn = static_cast<double>(out.negative.support) / n;
  out.precision = wp * out.positive.precision + wn * out.negative.precision;
  out.recall = wp * out.positive.recall + wn * out.negative.recall;
  out.f_measure = wp * out.positive.f_measure + wn * out.negative.f_measure;
  return out;
}

std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed) {
  const std::size_t n = labels.size();
  if (folds < 2) throw ValidationError("cross-validation needs at least 2 folds");
  if (n < static_cast<std::size_t>(folds)) {
    throw ValidationError("cannot split " + std::to_string(n) + " rows into " + std::to_string(folds) + " folds");
  }
  Rng rng(seed);
  std::vector<int> fold(n, 0);
  std::size_t dealt = 0;
  std::array<std::size_t, 2> class_count{};
  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (labels[i] == cls) idx.push_back(i);
    class_count[cls] = idx.size();
    rng.shuffle(std::span<std::size_t>(idx));
    for (std::size_t i : idx) fold[i] = static_cast<int>(dealt++ % static_cast<std::size_t>(folds));
  }
  for (int f = 0; f < folds; ++f) {
    std::array<std::size_t, 2> held{};
    for (std::size_t i = 0; i < n; ++i)
      if (fold[i] == f) ++held[labels[i]];
    for (int cls = 0; cls <= 1; ++cls) {
      if (class_count[cls] - held[cls] == 0) {
        throw ValidationError("stratification is degenerate: class " + std::to_string(cls) + " has only " +
                              std::to_string(class_count[cls]) + " rows; use fewer folds");
      }
    }
  }
  return fold;
}

EvalReport evaluate_cv(const Matrix& features, std::span<const int> labels, int question, const std::string& variant,
                       const CvOptions& options, Warnings* warnings) {
  if (features.rows() != labels.size()) throw ValidationError("features and labels differ in length");
  const auto fold = stratified_folds(labels, options.folds, options.seed);
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();

  EvalReport rep;
  rep.question = question;
  rep.variant = variant;
  rep.folds = options.folds;
  rep.seed = options.seed;
  rep.l2 = options.l2;
  rep.averaging = options.averaging;

  LogisticOptions lopts;
  lopts.l2 = options.l2;
  for (int f = 0; f < options.folds; ++f) {
    TrainingSet ts;
    ts.question = question;
    ts.variant = variant;
    std::size_t n_train = 0;
    for (std::size_t i = 0; i < n; ++i) n_train += fold[i] != f;
    ts.features = Matrix(n_train, d);
    std::size_t r = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (fold[i] == f) continue;
      std::copy(features.row(i).begin(), features.row(i).end(), ts.features.row(r++).begin());
      ts.labels.push_back(labels[i]);
    }
    const LogisticModel model = fit_logistic(ts, lopts, warnings);
    if (!model.converged) ++rep.unconverged_fits;
    for (std::size_t i = 0; i < n; ++i) {
      if (fold[i] != f) continue;
      const int yhat = predict(model, features.row(i)).label;
      const int y = labels[i];
      if (y == 1 && yhat == 1) ++rep.confusion.tp;
      if (y == 0 && yhat == 1) ++rep.confusion.fp;
      if (y == 1 && yhat == 0) ++rep.confusion.fn;
      if (y == 0 && yhat == 0) ++rep.confusion.tn;
    }
  }
  const Metrics m = score_confusion(rep.confusion, options.averaging);
  rep.precision = m.precision;
  rep.recall = m.recall;
  rep.f_measure = m.f_measure;
  rep.positive = m.positive;
  rep.negative = m.negative;
  return rep;
}

std::vector<VariantComparison> compare_variants(const Matrix& features, const Matrix& scores, const LabelTable& labels,
                                                std::span<const int> questions, const std::string& factor_variant,
                                                const CvOptions& options, Warnings* warnings) {
  if (features.rows() != scores.rows() || features.rows() != labels.labels.size()) {
    throw ValidationError("variants must cover the same users");
  }
  std::vector<VariantComparison> out;
  for (int q : questions) {
    const auto y = labels.column(q);
    VariantComparison row;
    row.question = q;
    row.eight = evaluate_cv(features, y, q, "eight", options, warnings);
    row.factors = evaluate_cv(scores, y, q, factor_variant, options, warnings);
    out.push_back(std::move(row));
  }
  return out;
}

std::string factor_variant_name(std::size_t k) { return k == 3 ? "three" : "factors" + std::to_string(k); }

}  // namespace factorlens
