#include "efa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "error.hpp"

namespace factorlens {

std::vector<double> LoadingMatrix::column_ssl() const {
  std::vector<double> ssl(n_factors(), 0.0);
  for (std::size_t i = 0; i < n_variables(); ++i)
    for (std::size_t j = 0; j < n_factors(); ++j) ssl[j] += values(i, j) * values(i, j);
  return ssl;
}

LoadingMatrix extract_pca_loadings(const EigenDecomposition& eig, std::size_t k, std::vector<std::string> names) {
  const std::size_t p = eig.eigenvalues.size();
  if (k < 1 || k > p) {
    throw ValidationError("retained factor count " + std::to_string(k) + " outside 1.." + std::to_string(p));
  }
  if (names.empty()) {
    for (std::size_t i = 0; i < p; ++i) names.push_back("v" + std::to_string(i + 1));
  }
  if (names.size() != p) throw ValidationError("variable name count does not match eigenvector length");

  LoadingMatrix out{Matrix(p, k), std::move(names)};
  for (std::size_t j = 0; j < k; ++j) {
    const double lambda = eig.eigenvalues[j];
    if (lambda < -1e-10) {
      std::ostringstream msg;
      msg << "negative eigenvalue " << lambda << " for component " << j + 1;
      throw NumericalError(msg.str());
    }
    const double scale = std::sqrt(std::max(0.0, lambda));
    for (std::size_t i = 0; i < p; ++i) out.values(i, j) = eig.eigenvectors(i, j) * scale;
  }
  return out;
}

std::vector<double> communalities(const LoadingMatrix& loadings) {
  std::vector<double> h(loadings.n_variables(), 0.0);
  for (std::size_t i = 0; i < loadings.n_variables(); ++i)
    for (std::size_t j = 0; j < loadings.n_factors(); ++j) h[i] += loadings.values(i, j) * loadings.values(i, j);
  return h;
}

std::size_t retain_kaiser(std::span<const double> eigenvalues) {
  return static_cast<std::size_t>(std::count_if(eigenvalues.begin(), eigenvalues.end(), [](double v) { return v > 1.0; }));
}

VarianceShares variance_shares(std::span<const double> totals, std::size_t n_variables) {
  if (n_variables == 0) throw ValidationError("variance shares need at least one variable");
  VarianceShares out;
  double cum = 0.0;
  for (double t : totals) {
    const double pct = 100.0 * t / static_cast<double>(n_variables);
    cum += pct;
    out.pct.push_back(pct);
    out.cumulative.push_back(cum);
  }
  return out;
}

std::size_t retain_cumvar(std::span<const double> eigenvalues, double threshold_pct) {
  if (!(threshold_pct > 0.0 && threshold_pct <= 100.0)) {
    throw ValidationError("cumulative variance threshold must be in (0, 100]");
  }
  const double p = static_cast<double>(eigenvalues.size());
  double cum = 0.0;
  for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
    cum += eigenvalues[k];
    if (100.0 * cum / p >= threshold_pct - 1e-9) return k + 1;
  }
  return eigenvalues.size();
}

ScreeSeries scree_series(std::span<const double> eigenvalues) {
  ScreeSeries out;
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) out.points.push_back({i + 1, eigenvalues[i]});
  if (eigenvalues.size() < 3) return out;

  const double tol = 1e-12 * std::max(1.0, std::abs(eigenvalues.front()));
  double best = tol;
  for (std::size_t i = 1; i + 1 < eigenvalues.size(); ++i) {
    const double accel = eigenvalues[i - 1] - 2.0 * eigenvalues[i] + eigenvalues[i + 1];
    if (accel > best) {
      best = accel;
      out.acceleration_peak = i + 1;
    }
  }
  if (out.acceleration_peak) out.suggested_k = *out.acceleration_peak - 1;
  return out;
}

double varimax_criterion(const Matrix& loadings) {
  const double p = static_cast<double>(loadings.rows());
  double crit = 0.0;
  for (std::size_t j = 0; j < loadings.cols(); ++j) {
    double s2 = 0.0;
    double s4 = 0.0;
    for (std::size_t i = 0; i < loadings.rows(); ++i) {
      const double sq = loadings(i, j) * loadings(i, j);
      s2 += sq;
      s4 += sq * sq;
    }
    crit += (p * s4 - s2 * s2) / (p * p);
  }
  return crit;
}

namespace {

constexpr int kMaxVarimaxSweeps = 100;
constexpr double kVarimaxAngleTolerance = 1e-12;

void rotate_columns(Matrix& m, std::size_t a, std::size_t b, double c, double s) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double x = m(i, a);
    const double y = m(i, b);
    m(i, a) = c * x + s * y;
    m(i, b) = -s * x + c * y;
  }
}

}  // namespace

VarimaxResult varimax_rotate(const LoadingMatrix& loadings, bool kaiser_normalize) {
  const std::size_t p = loadings.n_variables();
  const std::size_t k = loadings.n_factors();
  if (k < 1) throw ValidationError("varimax needs at least one factor");

  VarimaxResult out;
  out.loadings = loadings;
  out.rotation = Matrix::identity(k);
  if (k == 1) {
    out.criterion_history.push_back(varimax_criterion(loadings.values));
    return out;
  }

  Matrix a = loadings.values;
  std::vector<double> row_norm(p, 1.0);
  if (kaiser_normalize) {
    const auto h = communalities(loadings);
    for (std::size_t i = 0; i < p; ++i) {
      row_norm[i] = h[i] > 0.0 ? std::sqrt(h[i]) : 1.0;
      for (std::size_t j = 0; j < k; ++j) a(i, j) /= row_norm[i];
    }
  }

  const double pd = static_cast<double>(p);
  out.criterion_history.push_back(varimax_criterion(a));
  out.converged = false;
  for (int sweep = 1; sweep <= kMaxVarimaxSweeps; ++sweep) {
    double largest_angle = 0.0;
    for (std::size_t j = 0; j + 1 < k; ++j) {
      for (std::size_t l = j + 1; l < k; ++l) {
        double su = 0.0, sv = 0.0, suv2 = 0.0, suv = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
          const double x = a(i, j);
          const double y = a(i, l);
          const double u = x * x - y * y;
          const double v = 2.0 * x * y;
          su += u;
          sv += v;
          suv2 += u * u - v * v;
          suv += u * v;
        }
        const double num = 2.0 * suv - 2.0 * su * sv / pd;
        const double den = suv2 - (su * su - sv * sv) / pd;
        if (std::abs(num) <= 1e-15 * (std::abs(den) + 1e-300) && den >= 0.0) continue;
        const double phi = 0.25 * std::atan2(num, den);
        largest_angle = std::max(largest_angle, std::abs(phi));
        const double c = std::cos(phi);
        const double s = std::sin(phi);
        rotate_columns(a, j, l, c, s);
        rotate_columns(out.rotation, j, l, c, s);
      }
    }
    out.criterion_history.push_back(varimax_criterion(a));
    out.sweeps = sweep;
    if (largest_angle < kVarimaxAngleTolerance) {
      out.converged = true;
      break;
    }
  }

  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < k; ++j) a(i, j) *= row_norm[i];

  // Order columns by descending explained variance, then fix signs.
  LoadingMatrix unordered{a, loadings.variables};
  const auto ssl = unordered.column_ssl();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return ssl[x] > ssl[y]; });

  Matrix rotated(p, k);
  Matrix rotation(k, k);
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t src = order[j];
    std::size_t lead = 0;
    for (std::size_t i = 1; i < p; ++i)
      if (std::abs(a(i, src)) > std::abs(a(lead, src))) lead = i;
    const double sign = a(lead, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < p; ++i) rotated(i, j) = sign * a(i, src);
    for (std::size_t i = 0; i < k; ++i) rotation(i, j) = sign * out.rotation(i, src);
  }
  out.loadings.values = std::move(rotated);
  out.rotation = std::move(rotation);
  return out;
}

std::vector<std::vector<std::size_t>> Assignment::groups(std::size_t n_factors) const {
  std::vector<std::vector<std::size_t>> g(n_factors);
  for (std::size_t i = 0; i < factor.size(); ++i)
    if (factor[i] && *factor[i] < n_factors) g[*factor[i]].push_back(i);
  return g;
}

Assignment assign_variables(const LoadingMatrix& loadings, double cutoff) {
  Assignment out;
  out.cutoff = cutoff;
  for (std::size_t i = 0; i < loadings.n_variables(); ++i) {
    std::size_t best = 0;
    std::size_t above = 0;
    for (std::size_t j = 0; j < loadings.n_factors(); ++j) {
      const double v = std::abs(loadings.values(i, j));
      if (v > std::abs(loadings.values(i, best))) best = j;
      if (v >= cutoff) ++above;
    }
    if (loadings.n_factors() > 0 && std::abs(loadings.values(i, best)) >= cutoff) {
      out.factor.emplace_back(best);
    } else {
      out.factor.emplace_back(std::nullopt);
    }
    out.cross_loading.push_back(above >= 2);
  }
  return out;
}

Alignment align_to_reference(const Matrix& candidate, const Matrix& reference) {
  if (candidate.rows() != reference.rows() || candidate.cols() != reference.cols()) {
    throw ValidationError("alignment needs matrices of equal shape");
  }
  const std::size_t p = candidate.rows();
  const std::size_t k = candidate.cols();
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), std::size_t{0});

  Alignment best;
  best.frobenius_distance = std::numeric_limits<double>::infinity();
  do {
    // With the permutation fixed, each column's sign is chosen independently.
    double total = 0.0;
    std::vector<int> signs(k);
    for (std::size_t j = 0; j < k; ++j) {
      double plus = 0.0, minus = 0.0;
      for (std::size_t i = 0; i < p; ++i) {
        const double c = candidate(i, perm[j]);
        const double r = reference(i, j);
        plus += (c - r) * (c - r);
        minus += (c + r) * (c + r);
      }
      signs[j] = plus <= minus ? 1 : -1;
      total += std::min(plus, minus);
    }
    if (total < best.frobenius_distance) {
      best.frobenius_distance = total;
      best.permutation = perm;
      best.signs = signs;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  best.frobenius_distance = std::sqrt(best.frobenius_distance);
  best.aligned = Matrix(p, k);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < p; ++i) {
      best.aligned(i, j) = best.signs[j] * candidate(i, best.permutation[j]);
      best.max_abs_error = std::max(best.max_abs_error, std::abs(best.aligned(i, j) - reference(i, j)));
    }
  return best;
}

Matrix factor_scores(const DataMatrix& standardized, const SymMatrix& r, const LoadingMatrix& rotated) {
  if (standardized.n_cols() != r.dim() || rotated.n_variables() != r.dim()) {
    throw ValidationError("factor scores: data, correlation and loadings disagree on variable count");
  }
  const Matrix weights = invert_spd(r).full() * rotated.values;
  return standardized.values * weights;
}

Matrix sum_of_assigned_scores(const DataMatrix& standardized, const LoadingMatrix& rotated,
                              const Assignment& assignment) {
  const std::size_t n = standardized.n_rows();
  const std::size_t k = rotated.n_factors();
  if (assignment.factor.size() != standardized.n_cols()) {
    throw ValidationError("assignment does not cover the data columns");
  }
  Matrix out(n, k);
  for (std::size_t c = 0; c < assignment.factor.size(); ++c) {
    if (!assignment.factor[c]) continue;
    const std::size_t f = *assignment.factor[c];
    const double sign = rotated.values(c, f) < 0.0 ? -1.0 : 1.0;
    for (std::size_t r = 0; r < n; ++r) out(r, f) += sign * standardized.values(r, c);
  }
  return out;
}

RetentionRule RetentionRule::parse(const std::string& text) {
  RetentionRule rule;
  auto number_after = [&](std::size_t prefix) {
    const std::string tail = text.substr(prefix);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tail, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (tail.empty() || used != tail.size()) throw ValidationError("invalid retention rule '" + text + "'");
    return v;
  };
  if (text == "kaiser") {
    rule.kind = Kind::kKaiser;
  } else if (text.rfind("cumvar:", 0) == 0) {
    rule.kind = Kind::kCumVar;
    rule.threshold_pct = number_after(7);
    if (!(rule.threshold_pct > 0.0 && rule.threshold_pct <= 100.0))
      throw ValidationError("cumvar threshold must be in (0, 100], got '" + text + "'");
  } else if (text.rfind("fixed:", 0) == 0) {
    rule.kind = Kind::kFixed;
    const double k = number_after(6);
    if (k < 1.0 || k != std::floor(k)) throw ValidationError("fixed retention needs a positive integer, got '" + text + "'");
    rule.fixed_k = static_cast<std::size_t>(k);
  } else {
    throw ValidationError("unknown retention rule '" + text + "' (expected kaiser, cumvar:<pct> or fixed:<k>)");
  }
  return rule;
}

std::string RetentionRule::to_string() const {
  std::ostringstream s;
  switch (kind) {
    case Kind::kKaiser:
      return "kaiser";
    case Kind::kCumVar:
      s << "cumvar:" << threshold_pct;
      return s.str();
    case Kind::kFixed:
      return "fixed:" + std::to_string(fixed_k);
  }
  return "kaiser";
}

FactorModel fit_efa(const SymMatrix& r, const std::vector<std::string>& variables, const EfaOptions& options) {
  const std::size_t p = r.dim();
  if (variables.size() != p) throw ValidationError("variable names do not match correlation dimension");

  FactorModel m;
  m.variables = variables;
  const EigenDecomposition eig = eigen_sym(r);
  m.eigenvalues = eig.eigenvalues;
  auto shares = variance_shares(m.eigenvalues, p);
  m.pct_variance = std::move(shares.pct);
  m.cumulative_pct = std::move(shares.cumulative);
  m.kaiser_k = retain_kaiser(m.eigenvalues);
  m.cumvar60_k = retain_cumvar(m.eigenvalues, 60.0);
  m.scree = scree_series(m.eigenvalues);

  switch (options.retention.kind) {
    case RetentionRule::Kind::kKaiser:
      m.k = m.kaiser_k;
      if (m.k == 0) throw NumericalError("no eigenvalue exceeds 1; Kaiser retention keeps nothing");
      break;
    case RetentionRule::Kind::kCumVar:
      m.k = retain_cumvar(m.eigenvalues, options.retention.threshold_pct);
      break;
    case RetentionRule::Kind::kFixed:
      m.k = options.retention.fixed_k;
      if (m.k > p) {
        throw ValidationError("fixed retention k=" + std::to_string(m.k) + " exceeds " + std::to_string(p) + " variables");
      }
      break;
  }

  m.loadings_unrotated = extract_pca_loadings(eig, m.k, variables);
  m.communalities = communalities(m.loadings_unrotated);
  VarimaxResult rot = varimax_rotate(m.loadings_unrotated, options.kaiser_normalize);
  m.loadings_rotated = std::move(rot.loadings);
  m.rotation = std::move(rot.rotation);
  m.varimax_sweeps = rot.sweeps;
  m.varimax_converged = rot.converged;
  m.rotation_ssl = m.loadings_rotated.column_ssl();
  m.assignment = assign_variables(m.loadings_rotated, options.cutoff);
  return m;
}

}  // namespace factorlens
