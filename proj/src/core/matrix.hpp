#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace factorlens {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Matrix identity(std::size_t n);
  /// Builds from nested rows; all rows must have equal length.
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }
  std::vector<double> column(std::size_t c) const;

  std::span<const double> data() const { return values_; }
  std::span<double> data() { return values_; }

  Matrix transpose() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
double frobenius_norm(const Matrix& m);
double max_abs(const Matrix& m);

/// Observations (rows) by named variables (columns). Entries are finite.
struct DataMatrix {
  Matrix values;
  std::vector<std::string> column_names;

  DataMatrix() = default;
  DataMatrix(Matrix v, std::vector<std::string> names);

  std::size_t n_rows() const { return values.rows(); }
  std::size_t n_cols() const { return values.cols(); }
};

/// Symmetric square matrix. Construction checks symmetry and stores the
/// exactly symmetrized average of the input, so (i,j) and (j,i) agree bitwise.
class SymMatrix {
 public:
  static constexpr double kSymmetryTolerance = 1e-10;

  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m);

  static SymMatrix identity(std::size_t p) { return SymMatrix(Matrix::identity(p)); }

  std::size_t dim() const { return full_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return full_(i, j); }
  const Matrix& full() const { return full_; }

 private:
  Matrix full_;
};

struct EigenDecomposition {
  std::vector<double> eigenvalues;  // descending
  Matrix eigenvectors;              // column j pairs with eigenvalues[j]
  int sweeps = 0;
};

/// Column-wise z-scores with sample (n-1) standard deviation.
DataMatrix standardize(const DataMatrix& data);

/// Pearson correlation (sample normalization); diagonal exactly 1.
SymMatrix correlation_matrix(const DataMatrix& data);

/// Cyclic Jacobi eigensolver. Eigenvalues descending; each eigenvector is
/// signed so that its largest-magnitude entry is positive (first index wins
/// ties).
EigenDecomposition eigen_sym(const SymMatrix& m);

/// Inverse of a symmetric positive definite matrix via Cholesky.
SymMatrix invert_spd(const SymMatrix& m);

/// ln|m| for positive definite m via Cholesky.
double log_determinant(const SymMatrix& m);

/// Lower Cholesky factor, or throws NumericalError.
Matrix cholesky(const SymMatrix& m);

}  // namespace factorlens
