#include "matrix.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "error.hpp"

namespace factorlens {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw ValidationError("matrix shape " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                          " does not match " + std::to_string(values_.size()) + " entries");
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols()) throw ValidationError("ragged rows in matrix literal");
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ValidationError("matrix product dimension mismatch");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ValidationError("matrix difference dimension mismatch");
  Matrix out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bd[i];
  return out;
}

double frobenius_norm(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

double max_abs(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data()) s = std::max(s, std::abs(v));
  return s;
}

DataMatrix::DataMatrix(Matrix v, std::vector<std::string> names)
    : values(std::move(v)), column_names(std::move(names)) {
  if (column_names.size() != values.cols()) {
    throw ValidationError("data matrix has " + std::to_string(values.cols()) + " columns but " +
                          std::to_string(column_names.size()) + " names");
  }
  for (std::size_t r = 0; r < values.rows(); ++r)
    for (std::size_t c = 0; c < values.cols(); ++c)
      if (!std::isfinite(values(r, c)))
        throw ValidationError("non-finite entry at row " + std::to_string(r + 1) + ", column " + column_names[c]);
}

SymMatrix::SymMatrix(const Matrix& m) : full_(m) {
  if (m.rows() != m.cols()) throw ValidationError("symmetric matrix must be square");
  const double scale = std::max(1.0, max_abs(m));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      if (std::abs(m(i, j) - m(j, i)) > kSymmetryTolerance * scale) {
        std::ostringstream msg;
        msg << "matrix is not symmetric at (" << i << "," << j << "): " << m(i, j) << " vs " << m(j, i);
        throw ValidationError(msg.str());
      }
      const double avg = 0.5 * (m(i, j) + m(j, i));
      full_(i, j) = avg;
      full_(j, i) = avg;
    }
}

DataMatrix standardize(const DataMatrix& data) {
  const std::size_t n = data.n_rows();
  const std::size_t p = data.n_cols();
  if (n < 2) throw ValidationError("standardize needs at least 2 rows, got " + std::to_string(n));
  Matrix z(n, p);
  for (std::size_t c = 0; c < p; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += data.values(r, c);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double d = data.values(r, c) - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0) || sd <= 1e-14 * std::abs(mean)) {
      throw ValidationError("zero variance: " + data.column_names[c]);
    }
    for (std::size_t r = 0; r < n; ++r) z(r, c) = (data.values(r, c) - mean) / sd;
  }
  return DataMatrix(std::move(z), data.column_names);
}

SymMatrix correlation_matrix(const DataMatrix& data) {
  if (data.n_rows() < 3) {
    throw ValidationError("correlation needs at least 3 rows, got " + std::to_string(data.n_rows()));
  }
  const DataMatrix z = standardize(data);
  const std::size_t n = z.n_rows();
  const std::size_t p = z.n_cols();
  Matrix r(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    r(i, i) = 1.0;
    for (std::size_t j = i + 1; j < p; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += z.values(k, i) * z.values(k, j);
      const double v = std::clamp(s / static_cast<double>(n - 1), -1.0, 1.0);
      r(i, j) = v;
      r(j, i) = v;
    }
  }
  return SymMatrix(r);
}

namespace {

constexpr int kMaxJacobiSweeps = 100;
constexpr double kJacobiRelativeTolerance = 1e-12;

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

EigenDecomposition eigen_sym(const SymMatrix& m) {
  const std::size_t p = m.dim();
  Matrix a = m.full();
  Matrix v = Matrix::identity(p);
  const double threshold = kJacobiRelativeTolerance * frobenius_norm(a);

  int sweep = 0;
  while (off_diagonal_norm(a) > threshold) {
    if (sweep == kMaxJacobiSweeps) {
      throw NumericalError("Jacobi eigensolver did not converge in " + std::to_string(kMaxJacobiSweeps) + " sweeps");
    }
    ++sweep;
    for (std::size_t i = 0; i + 1 < p; ++i) {
      for (std::size_t j = i + 1; j < p; ++j) {
        const double aij = a(i, j);
        if (aij == 0.0) continue;
        const double theta = (a(j, j) - a(i, i)) / (2.0 * aij);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // A <- J^T A J with J the (i,j) plane rotation.
        for (std::size_t k = 0; k < p; ++k) {
          const double aki = a(k, i);
          const double akj = a(k, j);
          a(k, i) = c * aki - s * akj;
          a(k, j) = s * aki + c * akj;
        }
        for (std::size_t k = 0; k < p; ++k) {
          const double aik = a(i, k);
          const double ajk = a(j, k);
          a(i, k) = c * aik - s * ajk;
          a(j, k) = s * aik + c * ajk;
        }
        a(i, j) = 0.0;
        a(j, i) = 0.0;
        for (std::size_t k = 0; k < p; ++k) {
          const double vki = v(k, i);
          const double vkj = v(k, j);
          v(k, i) = c * vki - s * vkj;
          v(k, j) = s * vki + c * vkj;
        }
      }
    }
  }

  std::vector<std::size_t> order(p);
  for (std::size_t i = 0; i < p; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

  EigenDecomposition out;
  out.sweeps = sweep;
  out.eigenvalues.resize(p);
  out.eigenvectors = Matrix(p, p);
  for (std::size_t j = 0; j < p; ++j) {
    const std::size_t src = order[j];
    out.eigenvalues[j] = a(src, src);
    std::size_t lead = 0;
    for (std::size_t k = 1; k < p; ++k)
      if (std::abs(v(k, src)) > std::abs(v(lead, src))) lead = k;
    const double sign = v(lead, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t k = 0; k < p; ++k) out.eigenvectors(k, j) = sign * v(k, src);
  }
  return out;
}

namespace {

[[noreturn]] void throw_not_pd(const SymMatrix& m) {
  const auto eig = eigen_sym(m);
  std::ostringstream msg;
  msg << "matrix is not positive definite (smallest eigenvalue " << eig.eigenvalues.back() << ")";
  throw NumericalError(msg.str());
}

}  // namespace

Matrix cholesky(const SymMatrix& m) {
  const std::size_t p = m.dim();
  Matrix l(p, p);
  for (std::size_t j = 0; j < p; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) throw_not_pd(m);
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < p; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

SymMatrix invert_spd(const SymMatrix& m) {
  const std::size_t p = m.dim();
  if (p == 0) return m;
  if (eigen_sym(m).eigenvalues.back() <= 1e-10) throw_not_pd(m);
  const Matrix l = cholesky(m);
  // Columns of L^{-1} by forward substitution.
  Matrix linv(p, p);
  for (std::size_t c = 0; c < p; ++c) {
    for (std::size_t i = c; i < p; ++i) {
      double s = (i == c) ? 1.0 : 0.0;
      for (std::size_t k = c; k < i; ++k) s -= l(i, k) * linv(k, c);
      linv(i, c) = s / l(i, i);
    }
  }
  Matrix inv(p, p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = i; k < p; ++k) s += linv(k, i) * linv(k, j);
      inv(i, j) = s;
      inv(j, i) = s;
    }
  return SymMatrix(inv);
}

double log_determinant(const SymMatrix& m) {
  const Matrix l = cholesky(m);
  double s = 0.0;
  for (std::size_t i = 0; i < l.rows(); ++i) s += std::log(l(i, i));
  return 2.0 * s;
}

}  // namespace factorlens
