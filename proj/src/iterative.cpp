#include "qls/iterative.hpp"
#include "qls/svd.hpp"

#include <cmath>
#include <limits>

namespace qls {

const char* to_string(SolveStatus s)
{
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterationsReached: return "maxIterationsReached";
    case SolveStatus::Breakdown: return "breakdown";
  }
  return "unknown";
}

namespace {

using LongVector = Vector<long double>;

// Termination bookkeeping shared by all methods. The iterate with the smallest
// recurred residual is the one returned; iterations past it only serve to
// detect steady state and are dropped from the histories.
class Monitor {
public:
  Monitor(const IterationControl& ctrl, Index n, double initial)
      : tol_(ctrl.tol), initial_(initial), best_(initial)
  {
    if (!(ctrl.tol > 0)) fail(ErrorKind::InvalidParameter, "tol must be positive");
    if (ctrl.maxIterations < 0) fail(ErrorKind::InvalidParameter, "maxIterations must be positive");
    if (ctrl.stagnationWindow < 0) fail(ErrorKind::InvalidParameter, "stagnation window must be positive");
    max_ = ctrl.maxIterations > 0 ? ctrl.maxIterations : 50 * n;
    window_ = ctrl.stagnationWindow > 0 ? ctrl.stagnationWindow : std::max<Index>(50, 10 * n);
  }

  // Records ‖r_k‖; `improved()` then tells whether x_k is the new best.
  bool record(SolveOutcome& out, double norm)
  {
    out.residualNormHistory.push_back(norm);
    ++out.iterations;
    improved_ = norm < best_ || out.iterations == 1;
    if (improved_) {
      best_ = norm;
      best_index_ = out.iterations;
    }
    if (norm <= tol_ * initial_) {
      out.status = SolveStatus::Converged;
      return true;
    }
    if (out.iterations - best_index_ >= window_) {
      out.status = SolveStatus::Converged;
      return true;
    }
    if (out.iterations >= max_) {
      out.status = SolveStatus::MaxIterationsReached;
      return true;
    }
    return false;
  }

  bool improved() const { return improved_; }

  // Rewinds the histories to the best iterate.
  void finish(SolveOutcome& out) const
  {
    if (best_index_ >= out.iterations) return;
    out.iterations = best_index_;
    out.residualNormHistory.resize(static_cast<std::size_t>(best_index_));
    if (out.trueResidualGapHistory) out.trueResidualGapHistory->resize(static_cast<std::size_t>(best_index_));
  }

private:
  double tol_;
  double initial_;
  double best_;
  Index window_ = 0;
  Index best_index_ = 0;
  Index max_ = 0;
  bool improved_ = false;
};

VectorXd start_vector(const IterationControl& ctrl, Index n)
{
  if (!ctrl.x0) return VectorXd::Zero(n);
  require_size(ctrl.x0->size(), n, "x0 length");
  if (!all_finite(*ctrl.x0)) fail(ErrorKind::InvalidParameter, "x0 has non-finite entries");
  return *ctrl.x0;
}

// ‖(b − A·x) − d‖ with the true residual accumulated in extended precision.
double residual_gap(const MatrixXd& A, const VectorXd& b, const VectorXd& x, const VectorXd& d)
{
  const LongVector xl = x.cast<long double>();
  LongVector r = b.cast<long double>();
  for (Index j = 0; j < A.cols(); ++j) r -= A.col(j).cast<long double>() * xl(j);
  return static_cast<double>((r - d.cast<long double>()).norm());
}

// CGLS with Â·p evaluated by `apply` (possibly masked) and Âᵀ·d by `apply_t`.
template <typename Apply, typename ApplyT, typename OnStep>
SolveOutcome cgls_core(Index n, VectorXd x, VectorXd d, const Apply& apply, const ApplyT& apply_t,
                       const IterationControl& ctrl, SolveOutcome out, const OnStep& on_step)
{
  VectorXd r = apply_t(d);
  double rr = r.squaredNorm();
  Monitor mon(ctrl, n, std::sqrt(rr));
  out.x = x;
  if (rr == 0) {
    out.status = SolveStatus::Converged;
    return out;
  }
  VectorXd p = r;
  for (;;) {
    const VectorXd t = apply(p);
    const double tt = t.squaredNorm();
    if (!(tt > 0) || !std::isfinite(tt)) {
      out.status = SolveStatus::Breakdown;
      break;
    }
    const double alpha = rr / tt;
    x += alpha * p;
    d -= alpha * t;
    r = apply_t(d);
    const double rr_next = r.squaredNorm();
    on_step(x, d, out);
    const bool stop = mon.record(out, std::sqrt(rr_next));
    if (mon.improved()) out.x = x;
    if (stop || rr_next == 0) break;
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  mon.finish(out);
  return out;
}

}  // namespace

SolveOutcome cg_base(const QlsProblem& p, const IterationControl& ctrl)
{
  validate(p);
  const MatrixXd& A = p.A;
  const Index n = p.cols();
  const VectorXd rhs = p.normal_rhs();
  VectorXd x = start_vector(ctrl, n);
  VectorXd r = rhs - A.transpose() * (A * x);
  double rr = r.squaredNorm();

  SolveOutcome out;
  Monitor mon(ctrl, n, std::sqrt(rr));
  out.x = x;
  if (rr == 0) {
    out.status = SolveStatus::Converged;
    return out;
  }
  VectorXd dir = r;
  for (;;) {
    const VectorXd q = A.transpose() * (A * dir);
    const double curv = dir.dot(q);
    if (!(curv > 0) || !std::isfinite(curv)) {
      out.status = SolveStatus::Breakdown;
      break;
    }
    const double alpha = rr / curv;
    x += alpha * dir;
    r -= alpha * q;
    const double rr_next = r.squaredNorm();
    const bool stop = mon.record(out, std::sqrt(rr_next));
    if (mon.improved()) out.x = x;
    if (stop || rr_next == 0) break;
    dir = r + (rr_next / rr) * dir;
    rr = rr_next;
  }
  mon.finish(out);
  return out;
}

SolveOutcome cgls(const MatrixXd& A, const VectorXd& b, const IterationControl& ctrl)
{
  require_dense(A, "cgls: A");
  require_dense(b, "cgls: b");
  require_size(b.size(), A.rows(), "cgls: b length");
  const Index n = A.cols();
  VectorXd x = start_vector(ctrl, n);
  VectorXd d = b - A * x;
  return cgls_core(
      n, std::move(x), std::move(d), [&](const VectorXd& v) -> VectorXd { return A * v; },
      [&](const VectorXd& v) -> VectorXd { return A.transpose() * v; }, ctrl, SolveOutcome{},
      [](const VectorXd&, const VectorXd&, SolveOutcome&) {});
}

SolveOutcome cgls_eps(const QlsProblem& p, double eps, const IterationControl& ctrl)
{
  const EpsSystem sys = build_eps_system(p, eps);
  return cgls(sys.A_eps, sys.b_eps, ctrl);
}

SolveOutcome cgls_i(const QlsProblem& p, const IterationControl& ctrl)
{
  validate(p);
  const HatSystem h = build_hat_system(p);
  const Index m = p.rows();
  const Index n = p.cols();
  VectorXd x = start_vector(ctrl, n);
  VectorXd d = h.b_hat - h.apply_masked(x);

  SolveOutcome out;
  double scale = 0;
  if (p.x_exact) scale = svd(p.A).sigma_max() * p.x_exact->norm();
  const bool track = p.x_exact && scale > 0;

  const auto apply = [&](const VectorXd& v) -> VectorXd { return h.apply_masked(v); };
  const auto apply_t = [&](const VectorXd& v) -> VectorXd { return h.A_hat.transpose() * v; };
  const auto on_step = [&](const VectorXd& xk, const VectorXd& dk, SolveOutcome& o) {
    // The appended coordinate of both residuals is exactly 1.
    if (track) o.trueResidualGapHistory->push_back(residual_gap(p.A, p.b, xk, dk.head(m)) / scale);
  };
  if (track) out.trueResidualGapHistory.emplace();
  return cgls_core(n, std::move(x), std::move(d), apply, apply_t, ctrl, std::move(out), on_step);
}

SolveOutcome minres_augmented(const QlsProblem& p, const IterationControl& ctrl)
{
  validate(p);
  const MatrixXd& A = p.A;
  const Index m = p.rows();
  const Index n = p.cols();
  const Index N = m + n;
  const auto K = [&](const VectorXd& z) -> VectorXd {
    VectorXd y(N);
    y.head(m) = z.head(m) + A * z.tail(n);
    y.tail(n) = A.transpose() * z.head(m);
    return y;
  };

  VectorXd z = VectorXd::Zero(N);
  VectorXd rhs(N);
  rhs << p.b, -p.c;
  if (ctrl.x0) {
    z.tail(n) = start_vector(ctrl, n);
    z.head(m) = p.b - A * z.tail(n);
  }
  VectorXd r1 = rhs - K(z);
  double beta1 = r1.norm();

  SolveOutcome out;
  Monitor mon(ctrl, n, beta1);
  out.x = z.tail(n);
  if (beta1 == 0) {
    out.status = SolveStatus::Converged;
    return out;
  }

  VectorXd r2 = r1;
  VectorXd w = VectorXd::Zero(N), w1, w2 = VectorXd::Zero(N);
  double oldb = 0, beta = beta1, dbar = 0, epsln = 0, phibar = beta1, cs = -1, sn = 0;
  const double tiny = std::numeric_limits<double>::epsilon();
  for (Index k = 1;; ++k) {
    const VectorXd v = r2 / beta;
    VectorXd y = K(v);
    if (k >= 2) y -= (beta / oldb) * r1;
    const double alfa = v.dot(y);
    y -= (alfa / beta) * r2;
    r1 = r2;
    r2 = y;
    oldb = beta;
    beta = r2.norm();

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::max(std::hypot(gbar, beta), tiny);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    w1 = w2;
    w2 = w;
    w = (v - oldeps * w1 - delta * w2) / gamma;
    z += phi * w;

    if (!std::isfinite(phibar)) {
      out.status = SolveStatus::Breakdown;
      break;
    }
    const bool stop = mon.record(out, std::abs(phibar));
    if (mon.improved()) out.x = z.tail(n);
    if (beta == 0) {
      // Invariant Krylov subspace: exact solution in exact arithmetic.
      out.status = SolveStatus::Converged;
      break;
    }
    if (stop) break;
  }
  mon.finish(out);
  return out;
}

}  // namespace qls
