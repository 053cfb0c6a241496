#ifndef QLS_TRIANGULAR_HPP
#define QLS_TRIANGULAR_HPP

#include "qls/core.hpp"

namespace qls {

enum class Side { Upper, Lower };

// Solves T·x = y by substitution, T square and triangular on the given side.
// Only the referenced triangle of T is read. Transposed variants solve Tᵀ·x = y
// without forming Tᵀ.
template <typename DerivedT, typename DerivedY>
Vector<typename DerivedT::Scalar> solve_triangular(const Eigen::MatrixBase<DerivedT>& T, Side side,
                                                   const Eigen::MatrixBase<DerivedY>& y,
                                                   bool transpose = false)
{
  using Scalar = typename DerivedT::Scalar;
  const Index n = T.rows();
  if (T.cols() != n) fail(ErrorKind::DimensionMismatch, "solve_triangular: T must be square");
  require_size(y.size(), n, "solve_triangular: rhs length");
  for (Index i = 0; i < n; ++i)
    if (T(i, i) == Scalar(0))
      fail(ErrorKind::SingularDiagonal, "solve_triangular: zero diagonal at " + std::to_string(i));

  Vector<Scalar> x = y;
  // Effective orientation: Upper, or Lower transposed, is a backward sweep.
  const bool backward = (side == Side::Upper) != transpose;
  auto entry = [&](Index i, Index j) -> Scalar { return transpose ? T(j, i) : T(i, j); };
  if (backward) {
    for (Index i = n - 1; i >= 0; --i) {
      Scalar s = x(i);
      for (Index j = i + 1; j < n; ++j) s -= entry(i, j) * x(j);
      x(i) = s / T(i, i);
    }
  } else {
    for (Index i = 0; i < n; ++i) {
      Scalar s = x(i);
      for (Index j = 0; j < i; ++j) s -= entry(i, j) * x(j);
      x(i) = s / T(i, i);
    }
  }
  return x;
}

}  // namespace qls

#endif  // QLS_TRIANGULAR_HPP
