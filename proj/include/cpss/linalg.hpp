// Dense complex matrix kernel: products, Hermitian transpose, LU inverse,
// Cholesky log-determinant, Frobenius norms, and a Jacobi Hermitian
// eigensolver. Everything here is sized for small matrices (<= 16x16).
#pragma once

#include <complex>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpss {

using Complex = std::complex<double>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionError : Error {
  using Error::Error;
};
struct SingularMatrixError : Error {
  using Error::Error;
};
struct NotPositiveDefiniteError : Error {
  using Error::Error;
};

/// Dense complex matrix, row-major storage. Values are immutable in spirit:
/// all operations return new matrices, so instances are safe to share across
/// threads once built.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(int rows, int cols);
  ComplexMatrix(int rows, int cols, std::initializer_list<Complex> entries);

  static ComplexMatrix identity(int n);
  static ComplexMatrix diagonal(const std::vector<double>& d);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  Complex& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  const Complex& operator()(int r, int c) const {
    return data_[static_cast<size_t>(r) * cols_ + c];
  }

  const std::vector<Complex>& data() const { return data_; }
  std::vector<Complex>& data() { return data_; }

  bool is_finite() const;
  double max_abs() const;

  ComplexMatrix& operator+=(const ComplexMatrix& other);
  ComplexMatrix& operator-=(const ComplexMatrix& other);
  ComplexMatrix& operator*=(Complex scalar);

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Complex> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(Complex scalar, ComplexMatrix a);
ComplexMatrix operator*(ComplexMatrix a, Complex scalar);

/// Conjugate transpose.
ComplexMatrix hermitian(const ComplexMatrix& a);

/// Matrix product; throws DimensionError when inner dimensions differ.
ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);
inline ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  return matmul(a, b);
}

/// Inverse via LU with scaled partial pivoting. Throws SingularMatrixError
/// when a pivot magnitude falls below 1e-12 relative to its row scale.
ComplexMatrix inverse(const ComplexMatrix& a);

/// log2(det(A)) for a Hermitian positive definite A, via Cholesky pivots.
/// Throws NotPositiveDefiniteError when a pivot is <= 0, and Error when the
/// input is not Hermitian within 1e-10 (relative to max(1, max|A|)).
double log2_det_hpd(const ComplexMatrix& a);

/// Sum of squared entry magnitudes, accumulated with compensated summation.
double frob_norm_sq(const ComplexMatrix& a);

Complex trace(const ComplexMatrix& a);

/// max |a_ij - b_ij|; shapes must match.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

bool is_hermitian(const ComplexMatrix& a, double tol = 1e-10);

/// (A + A^H) / 2 with the diagonal forced real.
ComplexMatrix hermitize(const ComplexMatrix& a);

struct HermitianEigen {
  std::vector<double> values;  // ascending
  ComplexMatrix vectors;       // unitary, columns are eigenvectors
};

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
HermitianEigen hermitian_eigen(const ComplexMatrix& a);

}  // namespace cpss
