#ifndef QLS_SYM_EIGEN_HPP
#define QLS_SYM_EIGEN_HPP

#include "qls/core.hpp"

namespace qls {

// Eigenvalues of a symmetric matrix by cyclic two-sided Jacobi rotations.
// Stops once the off-diagonal Frobenius mass is ≤ 1e-14·‖M‖_F.
template <typename Derived>
Vector<typename Derived::Scalar> sym_eigenvalues(const Eigen::MatrixBase<Derived>& m_in)
{
  using Scalar = typename Derived::Scalar;
  using std::abs;
  using std::sqrt;
  require_dense(m_in, "sym_eigenvalues: M");
  const Index n = m_in.rows();
  if (m_in.cols() != n) fail(ErrorKind::DimensionMismatch, "sym_eigenvalues: M must be square");

  const Scalar fro = m_in.norm();
  const Scalar asym = (m_in - m_in.transpose()).norm();
  if (asym > Scalar(10) * unit_roundoff<Scalar>() * fro)
    fail(ErrorKind::NotSymmetric, "sym_eigenvalues: ‖M − Mᵀ‖_F exceeds 10·u·‖M‖_F");

  Matrix<Scalar> a = (m_in + m_in.transpose()) / Scalar(2);
  const Scalar target = Scalar(1e-14) * fro;
  auto off_mass = [&] {
    Scalar s = Scalar(0);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i)
        if (i != j) s += a(i, j) * a(i, j);
    return sqrt(s);
  };

  const Index sweep_budget = 30 * std::max<Index>(n, 1);
  Index sweep = 0;
  while (off_mass() > target) {
    if (sweep++ >= sweep_budget) fail(ErrorKind::NoConvergence, "sym_eigenvalues: sweep budget exhausted");
    for (Index p = 0; p + 1 < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        if (a(p, q) == Scalar(0)) continue;
        const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * a(p, q));
        const Scalar sgn = theta >= Scalar(0) ? Scalar(1) : Scalar(-1);
        const Scalar t = sgn / (abs(theta) + sqrt(Scalar(1) + theta * theta));
        const Scalar c = Scalar(1) / sqrt(Scalar(1) + t * t);
        const Scalar s = t * c;
        // A ← JᵀAJ with J the (p,q) rotation.
        for (Index k = 0; k < n; ++k) {
          const Scalar akp = a(k, p);
          const Scalar akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const Scalar apk = a(p, k);
          const Scalar aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = Scalar(0);
        a(q, p) = Scalar(0);
      }
    }
  }
  return a.diagonal();
}

/// 2-norm of a symmetric matrix, i.e. max |λ|.
template <typename Derived>
typename Derived::Scalar sym_spectral_norm(const Eigen::MatrixBase<Derived>& m)
{
  return sym_eigenvalues(m).cwiseAbs().maxCoeff();
}

}  // namespace qls

#endif  // QLS_SYM_EIGEN_HPP
