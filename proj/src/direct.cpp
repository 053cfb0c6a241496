#include "qls/direct.hpp"
#include "qls/ldlt.hpp"
#include "qls/qr.hpp"

namespace qls {

VectorXd solve_qr(const QlsProblem& p)
{
  validate(p);
  return qr_factorize(p.A).solve_normal(p.normal_rhs());
}

VectorXd solve_qr_eps(const QlsProblem& p, double eps)
{
  const EpsSystem sys = build_eps_system(p, eps);
  return qr_factorize(sys.A_eps, true).solve_least_squares(sys.b_eps);
}

VectorXd solve_sm(const QlsProblem& p, double eps)
{
  validate(p);
  if (!(eps >= 0) || !std::isfinite(eps)) fail(ErrorKind::InvalidParameter, "solve_sm: eps must be finite and ≥ 0");
  const auto qr = qr_factorize(p.A);
  const VectorXd x_dagger = qr.solve_least_squares(p.b);
  const VectorXd w = qr.solve_normal(p.c);
  const VectorXd y = x_dagger + w;
  if (eps == 0) return y;
  const double e2 = eps * eps;
  const double denom = 1.0 + e2 * p.c.dot(w);
  if (!(denom > 0)) fail(ErrorKind::DenominatorVanishes, "solve_sm: 1 + eps²·cᵀw ≤ 0");
  const double alpha = e2 / denom;
  return y - (alpha * p.c.dot(y)) * w;
}

VectorXd solve_aug(const QlsProblem& p, std::optional<double> scale)
{
  validate(p);
  const AugmentedSystem sys = build_augmented(p, scale ? *scale : default_augmented_scale(p.A));
  return sys.x_block(ldlt_factorize(sys.K).solve(sys.rhs));
}

}  // namespace qls
