#ifndef QLS_ANALYSIS_HPP
#define QLS_ANALYSIS_HPP

#include "qls/problems.hpp"

#include <map>
#include <string>

namespace qls {

struct ConditioningReport {
  double absCond = 0;   // √‖M̄‖
  double relCond = 0;   // absCond·‖[A,b,c]‖_F/‖x‖
  double etaBar = 0;    // ‖J†h‖ relative to ‖[A,b,c]‖_F
  std::map<std::string, double> estimates;
  double kappaA = 0;
  double dataNorm = 0;  // ‖[A,b,c]‖_F
};

/// Perturbation (E, f, g) of the data (A, b, c).
struct PerturbationTriple {
  MatrixXd E;
  VectorXd f;
  VectorXd g;
};

/// Absolute structured condition number √‖M̄‖ at x, with
/// M̄ = (1+‖r‖²)(AᵀA)⁻² + (1+‖x‖²)(AᵀA)⁻¹ − 2·sym(A†r·xᵀ(AᵀA)⁻¹).
double structured_cond_base(const QlsProblem& p, const VectorXd& x);

/// The same quantity for [A; eps·cᵀ]·x ≈ [b; 1/eps] measured in (A, b, c).
double structured_cond_eps(const QlsProblem& p, double eps, const VectorXd& xeps);

/// J = [I_n⊗r̃ᵀ − Aᵀ(x̃ᵀ⊗I_m), θ₁⁻¹Aᵀ, θ₂⁻¹I_n], the derivative of
/// h = Aᵀ(b − Ax̃) + c with respect to (vec(E), θ₁f, θ₂g). vec stacks columns.
MatrixXd backward_error_jacobian(const QlsProblem& p, const VectorXd& xtilde, double theta1 = 1.0,
                                 double theta2 = 1.0);

/// η̄ = ‖J†h‖ (absolute), via QR of Jᵀ.
double linearized_backward_error(const QlsProblem& p, const VectorXd& xtilde, double theta1 = 1.0,
                                 double theta2 = 1.0);

/// η̄ for (AᵀA + eps²ccᵀ)x = Aᵀb + c: h_eps = Aᵀ(b − Ax) + c − eps²c(cᵀx),
/// whose c-block is (1 − eps²cᵀx)I − eps²c·xᵀ.
double linearized_backward_error_eps(const QlsProblem& p, double eps, const VectorXd& xeps, double theta1 = 1.0,
                                     double theta2 = 1.0);

// First-order forward error estimates, each for that method's own x̂.
double estimate_cglsi(const QlsProblem& p, const VectorXd& xhat);
double estimate_cg(const QlsProblem& p, const VectorXd& xhat);
double estimate_cgls_eps(const QlsProblem& p, const VectorXd& xhat, double eps = 0x1p-47);

/// All three estimates at one x̂, keyed "CG", "CGLSI", "CGLSEPS".
std::map<std::string, double> forward_error_estimates(const QlsProblem& p, const VectorXd& xhat,
                                                      double eps = 0x1p-47);

/// Condition number, backward error and estimates at x̂.
ConditioningReport conditioning_report(const QlsProblem& p, const VectorXd& xhat, double eps = 0x1p-47);

/// eps²‖c‖‖w‖/(1 + eps²cᵀw), w = (AᵀA)⁻¹c: bound on ‖x_eps − x‖/‖x‖.
double sm_proximity_bound(const QlsProblem& p, double eps);

/// u·κ²(A)·((m+1)/(1−(m+1)u)·‖b‖/‖A‖ + ‖c‖/‖A‖²): error committed when
/// forming Aᵀb + c in floating point.
double initial_rounding_bound(const QlsProblem& p);

/// (‖b‖‖A‖ + ‖c‖) / ([1 + ‖r‖ + 2√(‖c‖‖x‖) + (1+‖x‖)/‖A†‖]·‖[A,b,c]‖_F).
/// Values well above 1 mean the rounding of Aᵀb + c dominates.
double cg_inadequacy_indicator(const QlsProblem& p, const VectorXd& x);

enum class RootChoice { Smaller, Larger };

struct ConstructedPerturbation {
  MatrixXd E;
  double alpha = 0;
};

/// A member E of the set of A-perturbations for which x̃ solves the perturbed
/// problem with b and c unchanged: α solves α²‖v‖²cᵀx̃ − α·vᵀb − 1 = 0 and
/// E = v(αcᵀ − v†A) + (I − vv†)(r̃x̃† + Z(I − x̃x̃†)).
ConstructedPerturbation construct_perturbation(const QlsProblem& p, const VectorXd& xtilde, const VectorXd& v,
                                               const MatrixXd& Z, RootChoice root = RootChoice::Smaller);

}  // namespace qls

#endif  // QLS_ANALYSIS_HPP
