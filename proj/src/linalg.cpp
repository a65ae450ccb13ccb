#include "cpss/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cpss {

namespace {

void require(bool cond, const char* what) {
  if (!cond) throw DimensionError(what);
}

}  // namespace

ComplexMatrix::ComplexMatrix(int rows, int cols) : rows_(rows), cols_(cols) {
  require(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
  data_.assign(static_cast<size_t>(rows) * cols, Complex(0.0, 0.0));
}

ComplexMatrix::ComplexMatrix(int rows, int cols, std::initializer_list<Complex> entries)
    : ComplexMatrix(rows, cols) {
  require(entries.size() == data_.size(), "initializer size must equal rows*cols");
  std::copy(entries.begin(), entries.end(), data_.begin());
}

ComplexMatrix ComplexMatrix::identity(int n) {
  ComplexMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(const std::vector<double>& d) {
  ComplexMatrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
  for (size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
  return m;
}

bool ComplexMatrix::is_finite() const {
  for (const Complex& z : data_) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

double ComplexMatrix::max_abs() const {
  double m = 0.0;
  for (const Complex& z : data_) m = std::max(m, std::abs(z));
  return m;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
  require(rows_ == other.rows_ && cols_ == other.cols_, "shape mismatch in +=");
  for (size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
  require(rows_ == other.rows_ && cols_ == other.cols_, "shape mismatch in -=");
  for (size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex scalar) {
  for (Complex& z : data_) z *= scalar;
  return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator*(Complex scalar, ComplexMatrix a) { return a *= scalar; }
ComplexMatrix operator*(ComplexMatrix a, Complex scalar) { return a *= scalar; }

ComplexMatrix hermitian(const ComplexMatrix& a) {
  ComplexMatrix out(a.cols(), a.rows());
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c) out(c, r) = std::conj(a(r, c));
  return out;
}

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimensions differ");
  ComplexMatrix out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex(0.0, 0.0)) continue;
      for (int j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

ComplexMatrix inverse(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("inverse: matrix must be square");
  const int n = a.rows();
  ComplexMatrix lu = a;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);

  std::vector<double> row_scale(n, 0.0);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) row_scale[r] = std::max(row_scale[r], std::abs(a(r, c)));

  constexpr double kRelPivotTol = 1e-12;

  for (int k = 0; k < n; ++k) {
    // Scaled partial pivoting: largest |entry| relative to its row scale.
    int best = -1;
    double best_ratio = -1.0;
    for (int r = k; r < n; ++r) {
      const double scale = row_scale[perm[r]];
      if (scale == 0.0) continue;
      const double ratio = std::abs(lu(perm[r], k)) / scale;
      if (ratio > best_ratio) {
        best_ratio = ratio;
        best = r;
      }
    }
    if (best < 0 || std::abs(lu(perm[best], k)) <= kRelPivotTol * row_scale[perm[best]]) {
      throw SingularMatrixError("inverse: pivot below 1e-12 of row magnitude");
    }
    std::swap(perm[k], perm[best]);
    const int pk = perm[k];
    const Complex pivot = lu(pk, k);
    for (int r = k + 1; r < n; ++r) {
      const int pr = perm[r];
      const Complex factor = lu(pr, k) / pivot;
      lu(pr, k) = factor;
      for (int c = k + 1; c < n; ++c) lu(pr, c) -= factor * lu(pk, c);
    }
  }

  // Solve A X = I column by column with the stored factors.
  ComplexMatrix out(n, n);
  std::vector<Complex> y(n);
  for (int col = 0; col < n; ++col) {
    for (int r = 0; r < n; ++r) {
      Complex sum = (perm[r] == col) ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
      for (int c = 0; c < r; ++c) sum -= lu(perm[r], c) * y[c];
      y[r] = sum;
    }
    for (int r = n - 1; r >= 0; --r) {
      Complex sum = y[r];
      for (int c = r + 1; c < n; ++c) sum -= lu(perm[r], c) * out(c, col);
      out(r, col) = sum / lu(perm[r], r);
    }
  }
  return out;
}

bool is_hermitian(const ComplexMatrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  const double bound = tol * std::max(1.0, a.max_abs());
  for (int r = 0; r < a.rows(); ++r)
    for (int c = r; c < a.cols(); ++c)
      if (std::abs(a(r, c) - std::conj(a(c, r))) > bound) return false;
  return true;
}

ComplexMatrix hermitize(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("hermitize: matrix must be square");
  ComplexMatrix out(a.rows(), a.cols());
  for (int r = 0; r < a.rows(); ++r) {
    out(r, r) = a(r, r).real();
    for (int c = r + 1; c < a.cols(); ++c) {
      const Complex v = 0.5 * (a(r, c) + std::conj(a(c, r)));
      out(r, c) = v;
      out(c, r) = std::conj(v);
    }
  }
  return out;
}

double log2_det_hpd(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("log2_det_hpd: matrix must be square");
  if (!is_hermitian(a)) throw Error("log2_det_hpd: matrix not Hermitian within 1e-10");
  const int n = a.rows();
  // Cholesky on the lower triangle; determinant from the pivots so that
  // products of many eigenvalues never overflow.
  ComplexMatrix l(n, n);
  double log2det = 0.0;
  for (int j = 0; j < n; ++j) {
    double d = a(j, j).real();
    for (int k = 0; k < j; ++k) d -= std::norm(l(j, k));
    if (!(d > 0.0)) throw NotPositiveDefiniteError("log2_det_hpd: non-positive pivot");
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    log2det += 2.0 * std::log2(ljj);
    for (int r = j + 1; r < n; ++r) {
      Complex sum = a(r, j);
      for (int k = 0; k < j; ++k) sum -= l(r, k) * std::conj(l(j, k));
      l(r, j) = sum / ljj;
    }
  }
  return log2det;
}

double frob_norm_sq(const ComplexMatrix& a) {
  // The per-entry addends form the same multiset for A and any transpose of
  // it, so summing them in sorted order makes the result layout-independent
  // exactly, not just within rounding. Compensation keeps the sum accurate.
  std::vector<double> terms;
  terms.reserve(a.data().size());
  for (const Complex& z : a.data())
    terms.push_back(z.real() * z.real() + z.imag() * z.imag());
  std::sort(terms.begin(), terms.end());
  double sum = 0.0;
  double comp = 0.0;
  for (double term : terms) {
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term)) {
      comp += (sum - t) + term;
    } else {
      comp += (term - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

Complex trace(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("trace: matrix must be square");
  Complex t = 0.0;
  for (int i = 0; i < a.rows(); ++i) t += a(i, i);
  return t;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (size_t i = 0; i < a.data().size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

HermitianEigen hermitian_eigen(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("hermitian_eigen: matrix must be square");
  if (!is_hermitian(a)) throw Error("hermitian_eigen: matrix not Hermitian within 1e-10");
  const int n = a.rows();
  ComplexMatrix w = hermitize(a);
  ComplexMatrix v = ComplexMatrix::identity(n);

  const double scale = std::max(1.0, w.max_abs());
  constexpr int kMaxSweeps = 60;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(w(p, q)));
    if (off <= 1e-15 * scale) break;

    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const Complex z = w(p, q);
        const double az = std::abs(z);
        if (az <= 1e-300) {
          w(p, q) = 0.0;
          w(q, p) = 0.0;
          continue;
        }
        // 2x2 Hermitian rotation annihilating w(p,q): J_pp=J_qq=c,
        // J_pq=s, J_qp=-conj(s) with s = t*c*e^{i*arg(z)} and t the
        // small-magnitude root of t^2 - 2*tau*t - 1 = 0.
        const double app = w(p, p).real();
        const double aqq = w(q, q).real();
        const double tau = (app - aqq) / (2.0 * az);
        const double sign_tau = (tau >= 0.0) ? 1.0 : -1.0;
        const double t = -sign_tau / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const Complex s = (t * c) * (z / az);
        const Complex cs = std::conj(s);

        for (int i = 0; i < n; ++i) {  // W <- W J
          const Complex wip = w(i, p);
          const Complex wiq = w(i, q);
          w(i, p) = c * wip - cs * wiq;
          w(i, q) = s * wip + c * wiq;
        }
        for (int j = 0; j < n; ++j) {  // W <- J^H W
          const Complex wpj = w(p, j);
          const Complex wqj = w(q, j);
          w(p, j) = c * wpj - s * wqj;
          w(q, j) = cs * wpj + c * wqj;
        }
        w(p, q) = 0.0;
        w(q, p) = 0.0;
        w(p, p) = w(p, p).real();
        w(q, q) = w(q, q).real();
        for (int i = 0; i < n; ++i) {  // V <- V J
          const Complex vip = v(i, p);
          const Complex viq = v(i, q);
          v(i, p) = c * vip - cs * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }

  HermitianEigen out;
  out.values.resize(n);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> diag(n);
  for (int i = 0; i < n; ++i) diag[i] = w(i, i).real();
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return diag[x] < diag[y]; });
  out.vectors = ComplexMatrix(n, n);
  for (int j = 0; j < n; ++j) {
    out.values[j] = diag[order[j]];
    for (int i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
  }
  return out;
}

}  // namespace cpss
