#ifndef QLS_QR_HPP
#define QLS_QR_HPP

#include "qls/core.hpp"
#include "qls/triangular.hpp"

#include <vector>

namespace qls {

/// Householder QR of an m×n matrix (m ≥ n), optionally with column pivoting:
/// A·P = Q·R. Reflectors are kept in compact form below the diagonal of
/// `packed` (unit leading entry implicit) with scalar factors in `tau`;
/// `permutation[j]` is the original column placed at position j.
template <typename Scalar>
struct QrFactorization {
  Matrix<Scalar> packed;
  Vector<Scalar> tau;
  std::vector<Index> permutation;

  Index rows() const { return packed.rows(); }
  Index cols() const { return packed.cols(); }

  Matrix<Scalar> R() const
  {
    return packed.topRows(cols()).template triangularView<Eigen::Upper>();
  }

  /// Qᵀ·y without forming Q.
  template <typename Derived>
  Vector<Scalar> apply_qt(const Eigen::MatrixBase<Derived>& y) const
  {
    require_size(y.size(), rows(), "apply_q_transpose: vector length");
    Vector<Scalar> z = y;
    for (Index k = 0; k < cols(); ++k) reflect(k, z);
    return z;
  }

  /// Q·y, with y of length m.
  template <typename Derived>
  Vector<Scalar> apply_q(const Eigen::MatrixBase<Derived>& y) const
  {
    require_size(y.size(), rows(), "apply_q: vector length");
    Vector<Scalar> z = y;
    for (Index k = cols() - 1; k >= 0; --k) reflect(k, z);
    return z;
  }

  /// First `ncols` columns of Q (defaults to the thin factor).
  Matrix<Scalar> q(Index ncols = -1) const
  {
    if (ncols < 0) ncols = cols();
    Matrix<Scalar> out(rows(), ncols);
    Vector<Scalar> e = Vector<Scalar>::Zero(rows());
    for (Index j = 0; j < ncols; ++j) {
      e.setZero();
      e(j) = Scalar(1);
      out.col(j) = apply_q(e);
    }
    return out;
  }

  /// Solves (AᵀA)·x = y as P·R⁻¹·R⁻ᵀ·Pᵀ·y; AᵀA is never formed.
  template <typename Derived>
  Vector<Scalar> solve_normal(const Eigen::MatrixBase<Derived>& y) const
  {
    require_size(y.size(), cols(), "solve_normal: rhs length");
    const Index n = cols();
    Vector<Scalar> py(n);
    for (Index j = 0; j < n; ++j) py(j) = y(permutation[j]);
    const auto r = packed.topRows(n);
    Vector<Scalar> z = solve_triangular(r, Side::Upper, py, /*transpose=*/true);
    z = solve_triangular(r, Side::Upper, z);
    Vector<Scalar> x(n);
    for (Index j = 0; j < n; ++j) x(permutation[j]) = z(j);
    return x;
  }

  /// Least-squares solution argmin ‖A·x − b‖ = P·R⁻¹·(Qᵀb)[0:n].
  template <typename Derived>
  Vector<Scalar> solve_least_squares(const Eigen::MatrixBase<Derived>& b) const
  {
    const Index n = cols();
    Vector<Scalar> qtb = apply_qt(b);
    Vector<Scalar> z = solve_triangular(packed.topRows(n), Side::Upper, qtb.head(n));
    Vector<Scalar> x(n);
    for (Index j = 0; j < n; ++j) x(permutation[j]) = z(j);
    return x;
  }

private:
  void reflect(Index k, Vector<Scalar>& z) const
  {
    if (tau(k) == Scalar(0)) return;
    const Index len = rows() - k;
    Scalar s = z(k);
    for (Index i = 1; i < len; ++i) s += packed(k + i, k) * z(k + i);
    s *= tau(k);
    z(k) -= s;
    for (Index i = 1; i < len; ++i) z(k + i) -= s * packed(k + i, k);
  }
};

namespace detail {

// Householder vector for x: H·x = beta·e₁ with H = I − tau·v·vᵀ, v(0) = 1.
// On return x holds (beta, v(1:)).
template <typename Scalar, typename Derived>
Scalar make_reflector(Eigen::MatrixBase<Derived>&& x)
{
  using std::abs;
  using std::sqrt;
  const Index len = x.size();
  Scalar tail = Scalar(0);
  if (len > 1) tail = x.tail(len - 1).norm();
  const Scalar alpha = x(0);
  if (tail == Scalar(0)) return Scalar(0);
  Scalar beta = sqrt(alpha * alpha + tail * tail);
  if (alpha > Scalar(0)) beta = -beta;
  const Scalar tau = (beta - alpha) / beta;
  x.tail(len - 1) /= (alpha - beta);
  x(0) = beta;
  return tau;
}

}  // namespace detail

/// Householder QR with optional column pivoting (largest remaining column norm,
/// ties resolved to the lowest index). Throws RankDeficient when some
/// |R(k,k)| ≤ n·u·max|R(i,i)|.
template <typename Derived>
QrFactorization<typename Derived::Scalar> qr_factorize(const Eigen::MatrixBase<Derived>& a,
                                                       bool pivoting = false)
{
  using Scalar = typename Derived::Scalar;
  using std::abs;
  require_dense(a, "qr_factorize: A");
  const Index m = a.rows();
  const Index n = a.cols();
  if (m < n) fail(ErrorKind::InvalidParameter, "qr_factorize: requires rows >= cols");

  QrFactorization<Scalar> f;
  f.packed = a;
  f.tau = Vector<Scalar>::Zero(n);
  f.permutation.resize(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) f.permutation[j] = j;

  Matrix<Scalar>& qr = f.packed;
  for (Index k = 0; k < n; ++k) {
    if (pivoting) {
      Index best = k;
      Scalar best_norm = qr.col(k).tail(m - k).squaredNorm();
      for (Index j = k + 1; j < n; ++j) {
        const Scalar nj = qr.col(j).tail(m - k).squaredNorm();
        if (nj > best_norm) {
          best_norm = nj;
          best = j;
        }
      }
      if (best != k) {
        qr.col(k).swap(qr.col(best));
        std::swap(f.permutation[k], f.permutation[best]);
      }
    }
    const Index len = m - k;
    f.tau(k) = detail::make_reflector<Scalar>(qr.col(k).tail(len));
    if (f.tau(k) == Scalar(0) || k + 1 == n) continue;
    // Apply H to the trailing block: B -= tau·v·(vᵀB).
    Vector<Scalar> v(len);
    v(0) = Scalar(1);
    v.tail(len - 1) = qr.col(k).tail(len - 1);
    auto trailing = qr.block(k, k + 1, len, n - k - 1);
    Eigen::Matrix<Scalar, 1, Eigen::Dynamic> w = v.transpose() * trailing;
    trailing.noalias() -= (f.tau(k) * v) * w;
  }

  Scalar dmax = Scalar(0);
  for (Index k = 0; k < n; ++k) dmax = std::max<Scalar>(dmax, abs(qr(k, k)));
  const Scalar threshold = Scalar(n) * unit_roundoff<Scalar>() * dmax;
  for (Index k = 0; k < n; ++k)
    if (abs(qr(k, k)) <= threshold)
      fail(ErrorKind::RankDeficient,
           "qr_factorize: |R(" + std::to_string(k) + "," + std::to_string(k) + ")| below n*u*max|R(i,i)|");
  return f;
}

template <typename Scalar, typename Derived>
Vector<Scalar> apply_q_transpose(const QrFactorization<Scalar>& f, const Eigen::MatrixBase<Derived>& y)
{
  return f.apply_qt(y);
}

}  // namespace qls

#endif  // QLS_QR_HPP
