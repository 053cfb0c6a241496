#ifndef QLS_SVD_HPP
#define QLS_SVD_HPP

#include "qls/core.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace qls {

// Thin SVD: A = U·diag(sigma)·Vᵀ, sigma nonincreasing.
template <typename Scalar>
struct SvdFactorization {
  Vector<Scalar> singular_values;
  Matrix<Scalar> left;   // m×k, orthonormal columns
  Matrix<Scalar> right;  // n×k, orthonormal columns

  Scalar sigma_max() const { return singular_values(0); }
  Scalar sigma_min() const { return singular_values(singular_values.size() - 1); }
  // κ(A) = σ_max/σ_min (infinite for rank-deficient input).
  Scalar condition_number() const
  {
    const Scalar lo = sigma_min();
    return lo == Scalar(0) ? std::numeric_limits<Scalar>::infinity() : sigma_max() / lo;
  }
};

namespace detail {

// Hestenes one-sided Jacobi on the columns of a tall matrix (rows ≥ cols).
template <typename Scalar>
SvdFactorization<Scalar> one_sided_jacobi(Matrix<Scalar> w)
{
  using std::abs;
  using std::sqrt;
  const Index m = w.rows();
  const Index n = w.cols();
  Matrix<Scalar> v = Matrix<Scalar>::Identity(n, n);

  // Orthogonality threshold: 1e-15, relaxed to m·u for long columns whose
  // computed inner products cannot resolve below that level.
  const Scalar tol = std::max<Scalar>(Scalar(1e-15), Scalar(m) * unit_roundoff<Scalar>());
  const Index sweep_budget = 30 * std::max<Index>(n, 1);

  bool converged = false;
  for (Index sweep = 0; sweep < sweep_budget && !converged; ++sweep) {
    converged = true;
    for (Index p = 0; p + 1 < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const Scalar alpha = w.col(p).squaredNorm();
        const Scalar beta = w.col(q).squaredNorm();
        const Scalar gamma = w.col(p).dot(w.col(q));
        if (alpha == Scalar(0) || beta == Scalar(0)) continue;
        if (abs(gamma) <= tol * sqrt(alpha) * sqrt(beta)) continue;
        converged = false;
        const Scalar zeta = (beta - alpha) / (Scalar(2) * gamma);
        const Scalar sgn = zeta >= Scalar(0) ? Scalar(1) : Scalar(-1);
        const Scalar t = sgn / (abs(zeta) + sqrt(Scalar(1) + zeta * zeta));
        const Scalar c = Scalar(1) / sqrt(Scalar(1) + t * t);
        const Scalar s = c * t;
        for (Index i = 0; i < m; ++i) {
          const Scalar wp = w(i, p);
          const Scalar wq = w(i, q);
          w(i, p) = c * wp - s * wq;
          w(i, q) = s * wp + c * wq;
        }
        for (Index i = 0; i < n; ++i) {
          const Scalar vp = v(i, p);
          const Scalar vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
  }
  if (!converged) fail(ErrorKind::NoConvergence, "svd: sweep budget exhausted");

  Vector<Scalar> sigma(n);
  for (Index j = 0; j < n; ++j) sigma(j) = w.col(j).norm();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return sigma(a) > sigma(b); });

  SvdFactorization<Scalar> out;
  out.singular_values.resize(n);
  out.left.resize(m, n);
  out.right.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    const Index j = order[static_cast<std::size_t>(k)];
    out.singular_values(k) = sigma(j);
    out.right.col(k) = v.col(j);
    if (sigma(j) > Scalar(0)) {
      out.left.col(k) = w.col(j) / sigma(j);
    } else {
      out.left.col(k).setZero();
    }
  }
  // Complete zero-σ left vectors to an orthonormal set via Gram–Schmidt on unit vectors.
  for (Index k = 0; k < n; ++k) {
    if (out.singular_values(k) > Scalar(0)) continue;
    for (Index e = 0; e < m; ++e) {
      Vector<Scalar> cand = Vector<Scalar>::Unit(m, e);
      for (Index j = 0; j < n; ++j)
        if (j != k && out.left.col(j).squaredNorm() > Scalar(0))
          cand -= out.left.col(j).dot(cand) * out.left.col(j);
      const Scalar nrm = cand.norm();
      if (nrm > Scalar(0.5)) {
        out.left.col(k) = cand / nrm;
        break;
      }
    }
  }
  return out;
}

}  // namespace detail

/// Thin SVD by one-sided Jacobi with cyclic sweeps. Wide inputs are handled
/// through the transpose. Throws NoConvergence after 30·n sweeps.
template <typename Derived>
SvdFactorization<typename Derived::Scalar> svd(const Eigen::MatrixBase<Derived>& a)
{
  using Scalar = typename Derived::Scalar;
  require_dense(a, "svd: A");
  if (a.rows() >= a.cols()) return detail::one_sided_jacobi<Scalar>(a);
  auto t = detail::one_sided_jacobi<Scalar>(a.transpose());
  std::swap(t.left, t.right);
  return t;
}

}  // namespace qls

#endif  // QLS_SVD_HPP
