#include "qls/analysis.hpp"
#include "qls/iterative.hpp"
#include "qls/numkernel.hpp"
#include "oracle.hpp"

#include <gtest/gtest.h>

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <random>

using namespace qls;

namespace {

constexpr double u = 0x1p-53;

QlsProblem make(const MatrixXd& A, const VectorXd& b, const VectorXd& c)
{
  QlsProblem p;
  p.A = A;
  p.b = b;
  p.c = c;
  return p;
}

VectorXd vec(std::initializer_list<double> v)
{
  VectorXd out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

QlsProblem c1(double a, double alpha, std::uint64_t seed = 1)
{
  FamilySpec s;
  s.family = Family::C1;
  s.param1 = a;
  s.zeta = alpha;
  s.seed = seed;
  return make_family_problem(s);
}

QlsProblem random_problem(std::mt19937_64& rng, Index m, Index n)
{
  QlsProblem p = make(oracle::random_matrix(m, n, rng), oracle::random_vector(m, rng), oracle::random_vector(n, rng));
  const MatrixXd gram = p.A.transpose() * p.A;
  p.x_exact = gram.partialPivLu().solve(p.normal_rhs());
  return p;
}

// Solution map (A, b, c) ↦ x through a dense LU of the normal matrix.
VectorXd solve_dense(const MatrixXd& A, const VectorXd& b, const VectorXd& c)
{
  return (A.transpose() * A).partialPivLu().solve(A.transpose() * b + c);
}


}  // namespace

TEST(StructuredCond, IdentityAtOrigin)
{
  const QlsProblem p = make(MatrixXd::Identity(2, 2), VectorXd::Zero(2), VectorXd::Zero(2));
  EXPECT_NEAR(structured_cond_base(p, VectorXd::Zero(2)), std::sqrt(2.0), 1e-15);
}

TEST(StructuredCond, ScaledIdentityAtOrigin)
{
  const QlsProblem p = make(2.0 * MatrixXd::Identity(2, 2), VectorXd::Zero(2), VectorXd::Zero(2));
  EXPECT_NEAR(structured_cond_base(p, VectorXd::Zero(2)), std::sqrt(5.0 / 16.0), 1e-15);
}

TEST(StructuredCond, MatchesExplicitOperatorNorm)
{
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Index m = 2 + static_cast<Index>(rng() % 5);
    const Index n = 1 + static_cast<Index>(rng() % std::min<Index>(3, m));
    const QlsProblem p = random_problem(rng, m, n);
    const VectorXd& x = *p.x_exact;
    const MatrixXd M = oracle::solution_derivative(p.A, p.b, x);
    const double op_norm = Eigen::JacobiSVD<MatrixXd>(M).singularValues()(0);
    EXPECT_NEAR(structured_cond_base(p, x), op_norm, 1e-10 * op_norm) << "trial " << trial;
  }
}

TEST(StructuredCond, OperatorIsTheDerivativeOfTheSolution)
{
  std::mt19937_64 rng(12);
  const Index m = 4, n = 2;
  const QlsProblem p = random_problem(rng, m, n);
  const VectorXd x = *p.x_exact;
  const MatrixXd M = oracle::solution_derivative(p.A, p.b, x);
  const MatrixXd E = oracle::random_matrix(m, n, rng);
  const VectorXd f = oracle::random_vector(m, rng);
  const VectorXd g = oracle::random_vector(n, rng);
  VectorXd z(m * n + m + n);
  z << E.reshaped(), f, g;
  const double t = 1e-6;
  const VectorXd fd = (solve_dense(p.A + t * E, p.b + t * f, p.c + t * g)
                       - solve_dense(p.A - t * E, p.b - t * f, p.c - t * g)) / (2 * t);
  EXPECT_LT((fd - M * z).norm(), 1e-7 * fd.norm());
}

TEST(StructuredCond, EpsVersionReducesToBaseWhenCIsZero)
{
  std::mt19937_64 rng(13);
  QlsProblem p = random_problem(rng, 6, 3);
  p.c.setZero();
  p.x_exact = solve_dense(p.A, p.b, p.c);
  const VectorXd& x = *p.x_exact;
  const double base = structured_cond_base(p, x);
  for (double eps : {1.0, 0x1p-10, 0x1p-47}) EXPECT_NEAR(structured_cond_eps(p, eps, x), base, 1e-12 * base);
}

TEST(StructuredCond, EpsVersionConvergesToBase)
{
  const QlsProblem p = c1(1.2, 1e-2);
  const VectorXd& x = *p.x_exact;
  const double base = structured_cond_base(p, x);
  double prev = INFINITY;
  for (int k = 2; k <= 30; k += 4) {
    const double d = std::abs(structured_cond_eps(p, std::ldexp(1.0, -k), x) - base);
    EXPECT_LE(d, prev * (1 + 1e-6)) << "eps = 2^-" << k;
    prev = d;
  }
  EXPECT_LT(prev, 1e-8 * base);
}

TEST(StructuredCond, RankDeficientThrows)
{
  MatrixXd A(3, 2);
  A << 1, 0, 2, 0, 3, 0;
  const QlsProblem p = make(A, vec({1, 1, 1}), vec({0, 0}));
  try {
    structured_cond_base(p, vec({0, 0}));
    FAIL() << "expected RankDeficient";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RankDeficient);
  }
}

TEST(BackwardError, OneByOne)
{
  const QlsProblem p = make(MatrixXd::Ones(1, 1), vec({1}), vec({0}));
  const MatrixXd J = backward_error_jacobian(p, vec({0}));
  ASSERT_EQ(J.cols(), 3);
  EXPECT_EQ(J, MatrixXd::Ones(1, 3));
  EXPECT_NEAR(linearized_backward_error(p, vec({0})), 1.0 / std::sqrt(3.0), 1e-15);
}

TEST(BackwardError, JacobianMatchesFiniteDifference)
{
  std::mt19937_64 rng(21);
  const Index m = 5, n = 3;
  const QlsProblem p = random_problem(rng, m, n);
  const VectorXd xt = oracle::random_vector(n, rng);
  const double th1 = 0.5, th2 = 3.0;
  const MatrixXd J = backward_error_jacobian(p, xt, th1, th2);
  const MatrixXd E = oracle::random_matrix(m, n, rng);
  const VectorXd f = oracle::random_vector(m, rng);
  const VectorXd g = oracle::random_vector(n, rng);
  const auto h = [&](double t) -> VectorXd {
    const MatrixXd At = p.A + t * E;
    return At.transpose() * (p.b + t * f - At * xt) + p.c + t * g;
  };
  VectorXd z(m * n + m + n);
  z << E.reshaped(), th1 * f, th2 * g;
  const double t = 1e-4;
  // h is quadratic in t, so the central difference is exact up to rounding.
  const VectorXd fd = (h(t) - h(-t)) / (2 * t);
  EXPECT_LT((fd - J * z).norm(), 1e-9 * fd.norm());
}

TEST(BackwardError, ZeroAtExactSolution)
{
  const QlsProblem p = make(2.0 * MatrixXd::Identity(2, 2), vec({2, 4}), vec({0, 0}));
  EXPECT_EQ(linearized_backward_error(p, vec({1, 2})), 0.0);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const QlsProblem q = c1(1.2, 1e-2, seed);
    EXPECT_LE(linearized_backward_error(q, *q.x_exact), 1e3 * u * q.normal_rhs().norm());
  }
}

TEST(BackwardError, EqualsMinimumNormPerturbation)
{
  std::mt19937_64 rng(22);
  const QlsProblem p = random_problem(rng, 4, 2);
  const VectorXd xt = oracle::random_vector(2, rng);
  const MatrixXd J = backward_error_jacobian(p, xt);
  const VectorXd h = p.A.transpose() * (p.b - p.A * xt) + p.c;
  const VectorXd z = J.completeOrthogonalDecomposition().solve(h);
  EXPECT_NEAR(linearized_backward_error(p, xt), z.norm(), 1e-12 * z.norm());
}

TEST(BackwardError, InvalidThetaThrows)
{
  const QlsProblem p = make(MatrixXd::Ones(1, 1), vec({1}), vec({0}));
  EXPECT_THROW(linearized_backward_error(p, vec({0}), 0.0, 1.0), Error);
  EXPECT_THROW(linearized_backward_error(p, vec({0}), 1.0, -1.0), Error);
}

TEST(BackwardError, EpsVersionMatchesFiniteDifference)
{
  std::mt19937_64 rng(23);
  const Index m = 4, n = 2;
  const QlsProblem p = random_problem(rng, m, n);
  const double eps = 0.25;
  const VectorXd xt = oracle::random_vector(n, rng);
  const VectorXd g = oracle::random_vector(n, rng);
  const auto h = [&](double t) -> VectorXd {
    const VectorXd c = p.c + t * g;
    return p.A.transpose() * (p.b - p.A * xt) + c - eps * eps * c * c.dot(xt);
  };
  const double t = 1e-4;
  const VectorXd fd = (h(t) - h(-t)) / (2 * t);
  const VectorXd Jc = ((1 - eps * eps * p.c.dot(xt)) * MatrixXd::Identity(n, n) - eps * eps * p.c * xt.transpose()) * g;
  EXPECT_LT((fd - Jc).norm(), 1e-9 * fd.norm());
  EXPECT_GT(linearized_backward_error_eps(p, eps, xt), 0.0);
}

TEST(Estimates, TableConfigsKappaSquaredEta)
{
  for (const auto& cfg : table_configs()) {
    if (cfg.id != "a=0.5/alpha=1") continue;
    const QlsProblem p = make_family_problem(table_spec(cfg, 0));
    const VectorXd x = cgls_i(p).x;
    const double kappa = condition_number(p.A);
    const double v = kappa * kappa * linearized_backward_error(p, x) / p.data_norm();
    EXPECT_GT(v, 1e-6);
    EXPECT_LT(v, 1e-4);
  }
}

TEST(Estimates, VanishAtExactSolutionWithoutC)
{
  const QlsProblem p = make(2.0 * MatrixXd::Identity(2, 2), vec({2, 4}), vec({0, 0}));
  for (const auto& [name, value] : forward_error_estimates(p, vec({1, 2}), 0x1p-20)) EXPECT_EQ(value, 0.0) << name;
}

TEST(Estimates, DominateMeasuredErrorsOnTableConfigs)
{
  for (const auto& cfg : table_configs()) {
    const QlsProblem p = make_family_problem(table_spec(cfg, 0));
    const VectorXd& x = *p.x_exact;
    const auto rel = [&](const VectorXd& y) { return (y - x).norm() / x.norm(); };
    const VectorXd xg = cg_base(p).x;
    const VectorXd xi = cgls_i(p).x;
    const VectorXd xe = cgls_eps(p).x;
    EXPECT_GE(estimate_cg(p, xg), rel(xg)) << cfg.id;
    EXPECT_GE(estimate_cglsi(p, xi), rel(xi)) << cfg.id;
    EXPECT_GE(estimate_cgls_eps(p, xe), rel(xe)) << cfg.id;
  }
}

TEST(Estimates, ReportFieldsAreConsistent)
{
  const QlsProblem p = c1(1.2, 1e-2);
  const VectorXd x = cgls_i(p).x;
  const ConditioningReport rep = conditioning_report(p, x);
  EXPECT_DOUBLE_EQ(rep.dataNorm, p.data_norm());
  EXPECT_DOUBLE_EQ(rep.relCond, rep.absCond * rep.dataNorm / x.norm());
  EXPECT_EQ(rep.estimates.size(), 3u);
  for (const auto& [name, value] : rep.estimates) {
    EXPECT_TRUE(std::isfinite(value)) << name;
    EXPECT_GE(value, 0.0) << name;
  }
}

TEST(ShermanMorrisonBound, ScalarCase)
{
  const QlsProblem p = make(MatrixXd::Identity(2, 2), vec({0, 0}), vec({1, 0}));
  EXPECT_DOUBLE_EQ(sm_proximity_bound(p, 1.0), 0.5);
  const QlsProblem q = make(MatrixXd::Identity(2, 2), vec({1, 0}), vec({0, 0}));
  EXPECT_EQ(sm_proximity_bound(q, 1.0), 0.0);
}

TEST(ShermanMorrisonBound, DominatesAndQuartersAgainstRationalOracle)
{
  std::mt19937_64 rng(31);
  int checked = 0;
  while (checked < 10) {
    const MatrixXd A = oracle::random_integer_matrix(6, 3, rng);
    const VectorXd b = oracle::random_integer_matrix(6, 1, rng).col(0);
    const VectorXd c = oracle::random_integer_matrix(3, 1, rng).col(0);
    if (condition_number(A) > 1e4 || c.isZero()) continue;
    const QlsProblem p = make(A, b, c);
    const oracle::RatVector x = oracle::solve_qls(A, b, c);
    const double xn = oracle::rational_norm(x);
    double prev_bound = 0, prev_actual = 0;
    for (int k = 20; k <= 40; ++k) {
      const double eps = std::ldexp(1.0, -k);
      oracle::RatVector diff = oracle::solve_qls(A, b, c, eps);
      for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= x[i];
      const double actual = oracle::rational_norm(diff) / xn;
      const double bound = sm_proximity_bound(p, eps);
      EXPECT_LE(actual, bound * (1 + 1e-12)) << "k=" << k;
      EXPECT_LE(bound, 1e3 * actual) << "k=" << k;
      if (k > 20) {
        EXPECT_NEAR(bound / prev_bound, 0.25, 0.05);
        EXPECT_NEAR(actual / prev_actual, 0.25, 0.05);
      }
      prev_bound = bound;
      prev_actual = actual;
    }
    ++checked;
  }
}

TEST(InitialRounding, Examples)
{
  EXPECT_EQ(initial_rounding_bound(make(MatrixXd::Identity(2, 2), vec({0, 0}), vec({0, 0}))), 0.0);
  const double v = initial_rounding_bound(make(MatrixXd::Identity(2, 2), vec({1, 0}), vec({0, 0})));
  EXPECT_DOUBLE_EQ(v, u * 3.0 / (1.0 - 3.0 * u));
}

TEST(InitialRounding, PredictsCgFailureOnIllConditionedC2)
{
  FamilySpec s;
  s.family = Family::C2;
  s.param1 = 1e-8;
  s.param2 = 0.5;
  s.zeta = 1e-14;
  EXPECT_GT(initial_rounding_bound(make_family_problem(s)), 1e-2);
}

TEST(Inadequacy, IdentityExample)
{
  const QlsProblem p = make(MatrixXd::Identity(2, 2), vec({1, 0}), vec({0, 0}));
  EXPECT_NEAR(cg_inadequacy_indicator(p, vec({1, 0})), 1.0 / (3.0 * std::sqrt(3.0)), 1e-15);
}

TEST(Inadequacy, GrowsWithB)
{
  std::mt19937_64 rng(41);
  QlsProblem p = random_problem(rng, 6, 3);
  p.b *= 1e-6;
  p.c.setZero();
  p.x_exact.reset();
  const VectorXd x = VectorXd::Zero(3);
  const double before = cg_inadequacy_indicator(p, x);
  p.b *= 1e6;
  const double after = cg_inadequacy_indicator(p, x);
  EXPECT_GT(after, 1e3 * before);
}

TEST(Inadequacy, FlagsIllConditionedC1)
{
  const QlsProblem p = c1(0.4, 1e-12);
  EXPECT_GT(cg_inadequacy_indicator(p, *p.x_exact), 1.0);
}

namespace {

double membership_residual(const QlsProblem& p, const MatrixXd& E, const VectorXd& x)
{
  const MatrixXd AE = p.A + E;
  return (AE.transpose() * (p.b - AE * x) + p.c).norm();
}

}  // namespace

TEST(Perturbation, LinearCaseForLeastSquares)
{
  std::mt19937_64 rng(51);
  QlsProblem p = random_problem(rng, 4, 2);
  p.c.setZero();
  p.x_exact = solve_dense(p.A, p.b, p.c);
  const VectorXd x = *p.x_exact;
  const VectorXd r = p.b - p.A * x;
  const auto out = construct_perturbation(p, x, r, MatrixXd::Zero(4, 2));
  EXPECT_NEAR(out.alpha * r.squaredNorm() * (r.dot(p.b) / r.squaredNorm()), -1.0, 1e-12);
  EXPECT_LT(membership_residual(p, out.E, x), 1e-10 * std::pow(p.A.norm() + out.E.norm(), 2) * x.norm());
}

TEST(Perturbation, ZeroIsAMemberForConsistentProblem)
{
  const QlsProblem p = make(2.0 * MatrixXd::Identity(2, 2), vec({2, 4}), vec({0, 0}));
  EXPECT_EQ(membership_residual(p, MatrixXd::Zero(2, 2), vec({1, 2})), 0.0);
}

TEST(Perturbation, MembershipOverManySamples)
{
  std::mt19937_64 rng(52);
  int built = 0, no_root = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Index m = 2 + static_cast<Index>(rng() % 5);
    const Index n = 1 + static_cast<Index>(rng() % std::min<Index>(3, m));
    const QlsProblem p = make(oracle::random_integer_matrix(m, n, rng) + MatrixXd::Identity(m, n) * 10,
                              oracle::random_vector(m, rng), oracle::random_vector(n, rng));
    const VectorXd xt = oracle::random_vector(n, rng);
    const VectorXd v = oracle::random_vector(m, rng);
    const MatrixXd Z = oracle::random_matrix(m, n, rng);
    for (RootChoice root : {RootChoice::Smaller, RootChoice::Larger}) {
      try {
        const auto out = construct_perturbation(p, xt, v, Z, root);
        const double tol = 1e-10 * std::pow(p.A.norm() + out.E.norm(), 2) * xt.norm();
        EXPECT_LE(membership_residual(p, out.E, xt), tol) << "trial " << trial;
        ++built;
      } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NoRealRoot);
        ++no_root;
      }
    }
  }
  EXPECT_GT(built, 1000);
}

TEST(Perturbation, RootChoiceOrdersMagnitudes)
{
  std::mt19937_64 rng(53);
  const QlsProblem p = random_problem(rng, 5, 2);
  const VectorXd xt = oracle::random_vector(2, rng);
  VectorXd v = oracle::random_vector(5, rng);
  for (int tries = 0; tries < 100; ++tries) {
    try {
      const auto s = construct_perturbation(p, xt, v, MatrixXd::Zero(5, 2), RootChoice::Smaller);
      const auto l = construct_perturbation(p, xt, v, MatrixXd::Zero(5, 2), RootChoice::Larger);
      EXPECT_LE(std::abs(s.alpha), std::abs(l.alpha));
      return;
    } catch (const Error&) {
      v = oracle::random_vector(5, rng);
    }
  }
  FAIL() << "no sample with real roots";
}

TEST(Perturbation, Errors)
{
  const QlsProblem p = make(MatrixXd::Identity(2, 2), vec({0, 0}), vec({-1, 0}));
  const MatrixXd Z = MatrixXd::Zero(2, 2);
  const auto kind_of = [&](const VectorXd& x, const VectorXd& v) {
    try {
      construct_perturbation(p, x, v, Z);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::InvalidParameter;
  };
  EXPECT_EQ(kind_of(vec({1, 0}), vec({0, 0})), ErrorKind::ZeroVector);
  EXPECT_EQ(kind_of(vec({0, 0}), vec({1, 0})), ErrorKind::ZeroVector);
  // cᵀx̃ = −1 and vᵀb = 0: α² = −1.
  EXPECT_EQ(kind_of(vec({1, 0}), vec({1, 0})), ErrorKind::NoRealRoot);
}
