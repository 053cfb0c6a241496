#ifndef QLS_CORE_HPP
#define QLS_CORE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qls {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;
using Index = Eigen::Index;

// Unit roundoff of the working format (u = eps/2).
template <typename Scalar = double>
inline Scalar unit_roundoff()
{
  return std::numeric_limits<Scalar>::epsilon() / Scalar(2);
}

enum class ErrorKind {
  InvalidParameter,
  DimensionMismatch,
  RankDeficient,
  SingularDiagonal,
  NoConvergence,
  NotSymmetric,
  Breakdown,
  DenominatorVanishes,
  NoRealRoot,
  ZeroVector,
  EmptyInput,
  MissingConfiguration,
  ConfigError,
  IoError,
};

inline const char* to_string(ErrorKind kind)
{
  switch (kind) {
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::SingularDiagonal: return "SingularDiagonal";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::Breakdown: return "Breakdown";
    case ErrorKind::DenominatorVanishes: return "DenominatorVanishes";
    case ErrorKind::NoRealRoot: return "NoRealRoot";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::MissingConfiguration: return "MissingConfiguration";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
  {
  }

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what)
{
  throw Error(kind, what);
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m)
{
  using std::isfinite;
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (!isfinite(m(i, j))) return false;
  return true;
}

// Validates the DenseMatrix contract: nonempty and finite.
template <typename Derived>
void require_dense(const Eigen::MatrixBase<Derived>& m, const char* name)
{
  if (m.rows() < 1 || m.cols() < 1)
    fail(ErrorKind::InvalidParameter, std::string(name) + " must be nonempty");
  if (!all_finite(m))
    fail(ErrorKind::InvalidParameter, std::string(name) + " has non-finite entries");
}

inline void require_size(Index got, Index want, const char* what)
{
  if (got != want)
    fail(ErrorKind::DimensionMismatch,
         std::string(what) + ": expected " + std::to_string(want) + ", got " + std::to_string(got));
}

}  // namespace qls

#endif  // QLS_CORE_HPP
