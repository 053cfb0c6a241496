#include "qls/analysis.hpp"
#include "qls/qr.hpp"
#include "qls/svd.hpp"
#include "qls/sym_eigen.hpp"

#include <cmath>

namespace qls {

namespace {

using Qr = QrFactorization<double>;

// Columns of (AᵀA)⁻¹·Y through the triangular factor.
MatrixXd gram_solve(const Qr& qr, const MatrixXd& Y)
{
  MatrixXd out(Y.rows(), Y.cols());
  for (Index j = 0; j < Y.cols(); ++j) out.col(j) = qr.solve_normal(Y.col(j));
  return out;
}

MatrixXd gram_inverse(const Qr& qr)
{
  const Index n = qr.cols();
  return gram_solve(qr, MatrixXd::Identity(n, n));
}

void check_x(const QlsProblem& p, const VectorXd& x, const char* what)
{
  require_size(x.size(), p.cols(), what);
  if (!all_finite(x)) fail(ErrorKind::InvalidParameter, std::string(what) + " has non-finite entries");
}

void check_theta(double theta1, double theta2)
{
  if (!(theta1 > 0) || !(theta2 > 0) || !std::isfinite(theta1) || !std::isfinite(theta2))
    fail(ErrorKind::InvalidParameter, "theta1, theta2 must be positive");
}

void check_eps(double eps)
{
  if (!(eps > 0) || !std::isfinite(eps)) fail(ErrorKind::InvalidParameter, "eps must be positive");
}

// A-block and b-block of the Jacobian of Aᵀ(b − Ax) + (c-term) in x̃.
MatrixXd jacobian_ab(const MatrixXd& A, const VectorXd& r, const VectorXd& x, double theta1, Index total)
{
  const Index m = A.rows();
  const Index n = A.cols();
  MatrixXd J = MatrixXd::Zero(n, total);
  // (I_n⊗rᵀ − Aᵀ(xᵀ⊗I_m))·vec(E) = Eᵀr − AᵀEx; column (i, j) of vec(E) sits at j·m + i.
  for (Index j = 0; j < n; ++j) {
    J.block(j, j * m, 1, m) += r.transpose();
    J.block(0, j * m, n, m) -= x(j) * A.transpose();
  }
  J.block(0, m * n, n, m) = A.transpose() / theta1;
  return J;
}

// ‖J†h‖ for full-row-rank J, via QR of Jᵀ: J† h = Q·R⁻ᵀ·h.
double min_norm_solution_norm(const MatrixXd& J, const VectorXd& h)
{
  if (h.isZero(0)) return 0.0;
  const Qr qr = qr_factorize(J.transpose().eval());
  return solve_triangular(qr.R(), Side::Upper, h, /*transpose=*/true).norm();
}

// M̄ is symmetric in exact arithmetic; columnwise solves leave O(u) asymmetry.
MatrixXd symmetrized(const MatrixXd& M) { return 0.5 * (M + M.transpose()); }

double relative_eta(const QlsProblem& p, double eta) { return eta / p.data_norm(); }

struct ShermanMorrison {
  VectorXd w;
  double cw = 0;
  double denom = 1;
};

ShermanMorrison sherman_morrison(const QlsProblem& p, double eps)
{
  ShermanMorrison s;
  s.w = qr_factorize(p.A).solve_normal(p.c);
  s.cw = p.c.dot(s.w);
  s.denom = 1.0 + eps * eps * s.cw;
  if (!(s.denom > 0)) fail(ErrorKind::DenominatorVanishes, "1 + eps²·cᵀw ≤ 0");
  return s;
}

}  // namespace

double structured_cond_base(const QlsProblem& p, const VectorXd& x)
{
  validate(p);
  check_x(p, x, "structured_cond_base: x");
  const Qr qr = qr_factorize(p.A);
  const VectorXd r = p.b - p.A * x;
  const MatrixXd G = gram_inverse(qr);
  const MatrixXd G2 = gram_solve(qr, G);
  const VectorXd ar = qr.solve_least_squares(r);
  const MatrixXd B = ar * (G * x).transpose();
  const MatrixXd M = (1.0 + r.squaredNorm()) * G2 + (1.0 + x.squaredNorm()) * G - (B + B.transpose());
  return std::sqrt(sym_spectral_norm(symmetrized(M)));
}

double structured_cond_eps(const QlsProblem& p, double eps, const VectorXd& xeps)
{
  validate(p);
  check_eps(eps);
  check_x(p, xeps, "structured_cond_eps: xeps");
  const Index m = p.rows();
  const Index n = p.cols();
  MatrixXd Ae(m + 1, n);
  Ae.topRows(m) = p.A;
  Ae.row(m) = eps * p.c.transpose();
  const Qr qr = qr_factorize(Ae);
  const VectorXd r = p.b - p.A * xeps;
  const MatrixXd G = gram_inverse(qr);
  const MatrixXd G2 = gram_solve(qr, G);
  const MatrixXd AG = p.A * G;
  const MatrixXd B = (G * (p.A.transpose() * r)) * (G * xeps).transpose();
  const double lead = 1.0 - 2.0 * eps * p.c.dot(xeps);
  const MatrixXd M = (lead * lead + r.squaredNorm()) * G2 + (1.0 + xeps.squaredNorm()) * (AG.transpose() * AG)
                     - (B + B.transpose());
  return std::sqrt(sym_spectral_norm(symmetrized(M)));
}

MatrixXd backward_error_jacobian(const QlsProblem& p, const VectorXd& xtilde, double theta1, double theta2)
{
  validate(p);
  check_theta(theta1, theta2);
  check_x(p, xtilde, "backward_error_jacobian: xtilde");
  const Index m = p.rows();
  const Index n = p.cols();
  MatrixXd J = jacobian_ab(p.A, p.b - p.A * xtilde, xtilde, theta1, m * n + m + n);
  J.rightCols(n) = MatrixXd::Identity(n, n) / theta2;
  return J;
}

double linearized_backward_error(const QlsProblem& p, const VectorXd& xtilde, double theta1, double theta2)
{
  const MatrixXd J = backward_error_jacobian(p, xtilde, theta1, theta2);
  const VectorXd h = p.A.transpose() * (p.b - p.A * xtilde) + p.c;
  return min_norm_solution_norm(J, h);
}

double linearized_backward_error_eps(const QlsProblem& p, double eps, const VectorXd& xeps, double theta1,
                                     double theta2)
{
  validate(p);
  check_eps(eps);
  check_theta(theta1, theta2);
  check_x(p, xeps, "linearized_backward_error_eps: xeps");
  const Index m = p.rows();
  const Index n = p.cols();
  const double e2 = eps * eps;
  const double cx = p.c.dot(xeps);
  const VectorXd r = p.b - p.A * xeps;
  MatrixXd J = jacobian_ab(p.A, r, xeps, theta1, m * n + m + n);
  J.rightCols(n) = ((1.0 - e2 * cx) * MatrixXd::Identity(n, n) - e2 * p.c * xeps.transpose()) / theta2;
  const VectorXd h = p.A.transpose() * r + p.c - (e2 * cx) * p.c;
  return min_norm_solution_norm(J, h);
}

double estimate_cglsi(const QlsProblem& p, const VectorXd& xhat)
{
  const double xn = xhat.norm();
  if (xn == 0) fail(ErrorKind::ZeroVector, "estimate: x̂ = 0");
  const double rel_cond = structured_cond_base(p, xhat) * p.data_norm() / xn;
  return rel_cond * relative_eta(p, linearized_backward_error(p, xhat));
}

double estimate_cg(const QlsProblem& p, const VectorXd& xhat)
{
  const double base = estimate_cglsi(p, xhat);
  const auto s = svd(p.A);
  const double kappa = s.condition_number();
  const double an = s.sigma_max();
  const double m1 = static_cast<double>(p.rows() + 1);
  const double u = unit_roundoff();
  const double eta = relative_eta(p, linearized_backward_error(p, xhat));
  return base + kappa * kappa * eta * (m1 / (1.0 - m1 * u) * p.b.norm() / an + p.c.norm() / (an * an));
}

double estimate_cgls_eps(const QlsProblem& p, const VectorXd& xhat, double eps)
{
  check_eps(eps);
  const double xn = xhat.norm();
  if (xn == 0) fail(ErrorKind::ZeroVector, "estimate: x̂ = 0");
  const ShermanMorrison s = sherman_morrison(p, eps);
  const double e2 = eps * eps;
  const double proximity = e2 * p.c.norm() * s.w.norm() / s.denom;
  const Index n = p.cols();
  const MatrixXd T = MatrixXd::Identity(n, n) - (e2 / s.denom) * s.w * p.c.transpose();
  const double rel_cond = structured_cond_eps(p, eps, xhat) * p.data_norm() / xn;
  const double eta = relative_eta(p, linearized_backward_error_eps(p, eps, xhat));
  return proximity + rel_cond * eta * svd(T).sigma_max();
}

std::map<std::string, double> forward_error_estimates(const QlsProblem& p, const VectorXd& xhat, double eps)
{
  return {{"CG", estimate_cg(p, xhat)},
          {"CGLSI", estimate_cglsi(p, xhat)},
          {"CGLSEPS", estimate_cgls_eps(p, xhat, eps)}};
}

ConditioningReport conditioning_report(const QlsProblem& p, const VectorXd& xhat, double eps)
{
  ConditioningReport rep;
  rep.dataNorm = p.data_norm();
  rep.kappaA = condition_number(p.A);
  rep.absCond = structured_cond_base(p, xhat);
  const double xn = xhat.norm();
  rep.relCond = xn > 0 ? rep.absCond * rep.dataNorm / xn : 0.0;
  rep.etaBar = linearized_backward_error(p, xhat);
  if (xn > 0) rep.estimates = forward_error_estimates(p, xhat, eps);
  return rep;
}

double sm_proximity_bound(const QlsProblem& p, double eps)
{
  validate(p);
  if (!(eps >= 0) || !std::isfinite(eps)) fail(ErrorKind::InvalidParameter, "eps must be finite and ≥ 0");
  const ShermanMorrison s = sherman_morrison(p, eps);
  return eps * eps * p.c.norm() * s.w.norm() / s.denom;
}

double initial_rounding_bound(const QlsProblem& p)
{
  validate(p);
  const double u = unit_roundoff();
  const double m1 = static_cast<double>(p.rows() + 1);
  if (m1 * u >= 1.0) fail(ErrorKind::InvalidParameter, "initial_rounding_bound: (m+1)u ≥ 1");
  const auto s = svd(p.A);
  const double kappa = s.condition_number();
  const double an = s.sigma_max();
  return u * kappa * kappa * (m1 / (1.0 - m1 * u) * p.b.norm() / an + p.c.norm() / (an * an));
}

double cg_inadequacy_indicator(const QlsProblem& p, const VectorXd& x)
{
  validate(p);
  check_x(p, x, "cg_inadequacy_indicator: x");
  const auto s = svd(p.A);
  const double an = s.sigma_max();
  const double pinv_norm = 1.0 / s.sigma_min();
  const double xn = x.norm();
  const double rn = (p.b - p.A * x).norm();
  const double num = p.b.norm() * an + p.c.norm();
  const double den = (1.0 + rn + 2.0 * std::sqrt(p.c.norm() * xn) + (1.0 + xn) / pinv_norm) * p.data_norm();
  return num / den;
}

ConstructedPerturbation construct_perturbation(const QlsProblem& p, const VectorXd& xtilde, const VectorXd& v,
                                               const MatrixXd& Z, RootChoice root)
{
  validate(p);
  const Index m = p.rows();
  const Index n = p.cols();
  check_x(p, xtilde, "construct_perturbation: xtilde");
  require_size(v.size(), m, "construct_perturbation: v length");
  if (Z.rows() != m || Z.cols() != n) fail(ErrorKind::DimensionMismatch, "construct_perturbation: Z must be m×n");
  const double vv = v.squaredNorm();
  const double xx = xtilde.squaredNorm();
  if (vv == 0) fail(ErrorKind::ZeroVector, "construct_perturbation: v = 0");
  if (xx == 0) fail(ErrorKind::ZeroVector, "construct_perturbation: x̃ = 0");

  // α²·‖v‖²cᵀx̃ − α·vᵀb − 1 = 0.
  const double qa = vv * p.c.dot(xtilde);
  const double qb = -v.dot(p.b);
  double alpha = 0;
  if (qa == 0) {
    if (qb == 0) fail(ErrorKind::NoRealRoot, "construct_perturbation: constraint has no solution");
    alpha = 1.0 / qb;
  } else {
    const double disc = qb * qb + 4.0 * qa;
    if (disc < 0) fail(ErrorKind::NoRealRoot, "construct_perturbation: negative discriminant");
    // Cancellation-free pair of roots.
    const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
    const double r1 = q / qa;
    const double r2 = q != 0 ? -1.0 / q : r1;
    const bool first_smaller = std::abs(r1) <= std::abs(r2);
    alpha = (root == RootChoice::Smaller) == first_smaller ? r1 : r2;
  }

  const VectorXd rt = p.b - p.A * xtilde;
  const MatrixXd Pv = MatrixXd::Identity(m, m) - v * v.transpose() / vv;
  const MatrixXd Px = MatrixXd::Identity(n, n) - xtilde * xtilde.transpose() / xx;
  ConstructedPerturbation out;
  out.alpha = alpha;
  out.E = v * (alpha * p.c.transpose() - v.transpose() * p.A / vv) + Pv * (rt * xtilde.transpose() / xx + Z * Px);
  return out;
}

}  // namespace qls
