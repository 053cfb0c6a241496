#ifndef QLS_LDLT_HPP
#define QLS_LDLT_HPP

#include "qls/core.hpp"

#include <vector>

namespace qls {

/// Symmetric indefinite factorization Pᵀ·M·P = L·D·Lᵀ with Bunch–Kaufman
/// partial pivoting. D is block diagonal with 1×1 and 2×2 blocks: `diag`
/// holds its diagonal, `subdiag(k)` the (k+1,k) entry of a 2×2 block starting
/// at k (zero otherwise). `permutation[k]` is the original index at position k.
template <typename Scalar>
struct LdltFactorization {
  Matrix<Scalar> L;
  Vector<Scalar> diag;
  Vector<Scalar> subdiag;
  std::vector<Index> block_size;  // per leading index of each block: 1 or 2; 0 for interior
  std::vector<Index> permutation;

  Index size() const { return L.rows(); }

  Matrix<Scalar> D() const
  {
    const Index n = size();
    Matrix<Scalar> d = Matrix<Scalar>::Zero(n, n);
    for (Index k = 0; k < n; ++k) d(k, k) = diag(k);
    for (Index k = 0; k + 1 < n; ++k) {
      d(k + 1, k) = subdiag(k);
      d(k, k + 1) = subdiag(k);
    }
    return d;
  }

  Matrix<Scalar> P() const
  {
    const Index n = size();
    Matrix<Scalar> p = Matrix<Scalar>::Zero(n, n);
    for (Index k = 0; k < n; ++k) p(permutation[k], k) = Scalar(1);
    return p;
  }

  Matrix<Scalar> reconstruct() const
  {
    const Matrix<Scalar> p = P();
    return p * L * D() * L.transpose() * p.transpose();
  }

  template <typename Derived>
  Vector<Scalar> solve(const Eigen::MatrixBase<Derived>& y) const
  {
    const Index n = size();
    require_size(y.size(), n, "ldlt solve: rhs length");
    Vector<Scalar> z(n);
    for (Index k = 0; k < n; ++k) z(k) = y(permutation[k]);
    z = L.template triangularView<Eigen::UnitLower>().solve(z);
    for (Index k = 0; k < n;) {
      if (block_size[k] == 2) {
        const Scalar a = diag(k), b = subdiag(k), c = diag(k + 1);
        const Scalar det = a * c - b * b;
        const Scalar z0 = z(k), z1 = z(k + 1);
        z(k) = (c * z0 - b * z1) / det;
        z(k + 1) = (a * z1 - b * z0) / det;
        k += 2;
      } else {
        z(k) /= diag(k);
        k += 1;
      }
    }
    z = L.transpose().template triangularView<Eigen::UnitUpper>().solve(z);
    Vector<Scalar> x(n);
    for (Index k = 0; k < n; ++k) x(permutation[k]) = z(k);
    return x;
  }
};

/// Bunch–Kaufman LDLᵀ with threshold (1+√17)/8. Throws Breakdown when the
/// active column is numerically zero (‖·‖ ≤ n·u·max|M|) or a 2×2 pivot is singular.
template <typename Derived>
LdltFactorization<typename Derived::Scalar> ldlt_factorize(const Eigen::MatrixBase<Derived>& m)
{
  using Scalar = typename Derived::Scalar;
  using std::abs;
  using std::sqrt;
  require_dense(m, "ldlt_factorize: M");
  const Index n = m.rows();
  if (m.cols() != n) fail(ErrorKind::DimensionMismatch, "ldlt_factorize: M must be square");
  const Scalar scale = m.cwiseAbs().maxCoeff();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > Scalar(10) * unit_roundoff<Scalar>() * scale)
    fail(ErrorKind::NotSymmetric, "ldlt_factorize: M is not symmetric");

  const Scalar alpha = (Scalar(1) + sqrt(Scalar(17))) / Scalar(8);
  const Scalar tiny = Scalar(n) * unit_roundoff<Scalar>() * scale;

  Matrix<Scalar> a = m;
  LdltFactorization<Scalar> f;
  f.L = Matrix<Scalar>::Identity(n, n);
  f.diag = Vector<Scalar>::Zero(n);
  f.subdiag = Vector<Scalar>::Zero(n);
  f.block_size.assign(static_cast<std::size_t>(n), 0);
  f.permutation.resize(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) f.permutation[k] = k;

  // Symmetric interchange of positions i and j in the active matrix and in
  // the already computed rows of L.
  auto interchange = [&](Index i, Index j, Index k) {
    if (i == j) return;
    a.row(i).swap(a.row(j));
    a.col(i).swap(a.col(j));
    for (Index c = 0; c < k; ++c) std::swap(f.L(i, c), f.L(j, c));
    std::swap(f.permutation[i], f.permutation[j]);
  };

  Index k = 0;
  while (k < n) {
    const Scalar akk = abs(a(k, k));
    Scalar lambda = Scalar(0);
    Index r = k;
    for (Index i = k + 1; i < n; ++i)
      if (abs(a(i, k)) > lambda) {
        lambda = abs(a(i, k));
        r = i;
      }
    if (std::max(akk, lambda) <= tiny)
      fail(ErrorKind::Breakdown, "ldlt_factorize: no acceptable pivot at step " + std::to_string(k));

    Index step = 1;
    if (akk < alpha * lambda) {
      Scalar sigma = Scalar(0);
      for (Index j = k; j < n; ++j)
        if (j != r) sigma = std::max(sigma, abs(a(r, j)));
      if (akk * sigma >= alpha * lambda * lambda) {
        // 1×1, no interchange
      } else if (abs(a(r, r)) >= alpha * sigma) {
        interchange(k, r, k);
      } else {
        interchange(k + 1, r, k);
        step = 2;
      }
    }

    if (step == 1) {
      const Scalar d = a(k, k);
      f.diag(k) = d;
      f.block_size[k] = 1;
      const Index rest = n - k - 1;
      if (rest > 0) {
        Vector<Scalar> col = a.col(k).tail(rest);
        f.L.col(k).tail(rest) = col / d;
        a.bottomRightCorner(rest, rest).noalias() -= (col / d) * col.transpose();
      }
    } else {
      const Scalar d11 = a(k, k), d21 = a(k + 1, k), d22 = a(k + 1, k + 1);
      const Scalar det = d11 * d22 - d21 * d21;
      if (det == Scalar(0)) fail(ErrorKind::Breakdown, "ldlt_factorize: singular 2x2 pivot");
      f.diag(k) = d11;
      f.diag(k + 1) = d22;
      f.subdiag(k) = d21;
      f.block_size[k] = 2;
      const Index rest = n - k - 2;
      if (rest > 0) {
        Matrix<Scalar> c = a.block(k + 2, k, rest, 2);
        Matrix<Scalar> dinv(2, 2);
        dinv << d22 / det, -d21 / det, -d21 / det, d11 / det;
        Matrix<Scalar> lblk = c * dinv;
        f.L.block(k + 2, k, rest, 2) = lblk;
        a.bottomRightCorner(rest, rest).noalias() -= lblk * c.transpose();
      }
    }
    k += step;
  }
  return f;
}

}  // namespace qls

#endif  // QLS_LDLT_HPP
