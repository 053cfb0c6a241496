#ifndef QLS_ITERATIVE_HPP
#define QLS_ITERATIVE_HPP

#include "qls/problems.hpp"

#include <optional>
#include <vector>

namespace qls {

/// Iteration stops when the recurred residual falls to tol times its initial
/// value, when it has not improved for `stagnationWindow` steps (steady state),
/// or after maxIterations. The iterate with the smallest recurred residual is
/// returned and the histories end there.
struct IterationControl {
  double tol = unit_roundoff() * unit_roundoff();
  Index maxIterations = 0;     // 0 selects 50·n
  std::optional<VectorXd> x0;
  Index stagnationWindow = 0;  // 0 selects max(50, 10·n)

  static IterationControl defaults() { return {}; }
};

enum class SolveStatus { Converged, MaxIterationsReached, Breakdown };

const char* to_string(SolveStatus s);

struct SolveOutcome {
  VectorXd x;
  Index iterations = 0;
  std::vector<double> residualNormHistory;
  std::optional<std::vector<double>> trueResidualGapHistory;
  SolveStatus status = SolveStatus::MaxIterationsReached;
};

/// CG on AᵀA·x = fl(fl(Aᵀb) + c), operator applied as Aᵀ(A·p).
SolveOutcome cg_base(const QlsProblem& p, const IterationControl& ctrl = {});

/// CGLS for min‖A·x − b‖; the residual Aᵀd_k is re-formed every step.
SolveOutcome cgls(const MatrixXd& A, const VectorXd& b, const IterationControl& ctrl = {});

/// CGLS on [A; eps·cᵀ], [b; 1/eps]. eps is snapped to a power of two.
SolveOutcome cgls_eps(const QlsProblem& p, double eps = 0x1p-47, const IterationControl& ctrl = {});

/// CGLSI: CGLS on Â = [A; cᵀ], b̂ = [b; 1] with the appended row masked out of
/// Â·p. Records the gap between the true and the recurred residual when the
/// problem carries its exact solution.
SolveOutcome cgls_i(const QlsProblem& p, const IterationControl& ctrl = {});

/// MINRES on [[I, A], [Aᵀ, 0]]·(r, x) = (b, −c); returns the x block.
SolveOutcome minres_augmented(const QlsProblem& p, const IterationControl& ctrl = {});

}  // namespace qls

#endif  // QLS_ITERATIVE_HPP
