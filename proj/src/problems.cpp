#include "qls/problems.hpp"

#include "qls/numkernel.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace qls {

double QlsProblem::data_norm() const
{
  return std::sqrt(A.squaredNorm() + b.squaredNorm() + c.squaredNorm());
}

double condition_number(const MatrixXd& a) { return svd(a).condition_number(); }

double construction_residual(const QlsProblem& p)
{
  if (!p.x_exact) return 0.0;
  const VectorXd rhs = p.normal_rhs();
  const VectorXd lhs = p.A.transpose() * (p.A * *p.x_exact);
  const double denom = rhs.norm();
  return denom == 0.0 ? (lhs - rhs).norm() : (lhs - rhs).norm() / denom;
}

void validate(const QlsProblem& p)
{
  require_dense(p.A, "problem A");
  if (p.rows() < p.cols()) fail(ErrorKind::InvalidParameter, "problem: A must have rows >= cols");
  require_size(p.b.size(), p.rows(), "problem b length");
  require_size(p.c.size(), p.cols(), "problem c length");
  if (!all_finite(p.b) || !all_finite(p.c)) fail(ErrorKind::InvalidParameter, "problem: non-finite b or c");
  if (p.x_exact) {
    require_size(p.x_exact->size(), p.cols(), "problem xExact length");
    const double kappa = condition_number(p.A);
    const double tol = 1e3 * unit_roundoff() * kappa * kappa;
    if (!(construction_residual(p) <= tol))
      fail(ErrorKind::InvalidParameter, "problem: xExact inconsistent with (A, b, c)");
  }
}

VectorXd Rng::uniform_vector(Index n)
{
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = uniform();
  return v;
}

MatrixXd Rng::uniform_matrix(Index m, Index n, double lo, double hi)
{
  MatrixXd a(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) a(i, j) = lo + (hi - lo) * uniform();
  return a;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag)
{
  // splitmix64 finalizer over the combined word
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

VectorXd sigma_c1(Index n, double a)
{
  if (n < 1) fail(ErrorKind::InvalidParameter, "sigma_c1: n must be >= 1");
  if (!(a > 0.0) || !std::isfinite(a)) fail(ErrorKind::InvalidParameter, "sigma_c1: a must be > 0");
  VectorXd s(n);
  for (Index i = 0; i < n; ++i) s(i) = std::pow(a, -static_cast<double>(i + 1));
  return s;
}

VectorXd sigma_c2(Index n, double dw, double up)
{
  if (n < 1) fail(ErrorKind::InvalidParameter, "sigma_c2: n must be >= 1");
  if (!(dw > 0.0) || !(dw < up)) fail(ErrorKind::InvalidParameter, "sigma_c2: requires 0 < dw < up");
  VectorXd s(n);
  if (n == 1) {
    s(0) = up;
    return s;
  }
  // Same evaluation as MATLAB linspace: endpoints exact.
  const double step = (up - dw) / static_cast<double>(n - 1);
  for (Index i = 0; i < n; ++i) s(i) = dw + static_cast<double>(i) * step;
  s(n - 1) = up;
  return s;
}

MatrixXd orthogonal_factor(Index dim, int kind, std::uint64_t seed)
{
  if (dim < 1) fail(ErrorKind::InvalidParameter, "orthogonal_factor: dim must be >= 1");
  if (kind < 1 || kind > 6) fail(ErrorKind::InvalidParameter, "orthogonal_factor: kind must be in 1..6");
  const double pi = std::numbers::pi;
  const double n = static_cast<double>(dim);
  MatrixXd q(dim, dim);
  if (kind == 1) {
    const double scale = std::sqrt(2.0 / (n + 1.0));
    for (Index j = 0; j < dim; ++j)
      for (Index i = 0; i < dim; ++i)
        q(i, j) = scale * std::sin(static_cast<double>((i + 1) * (j + 1)) * pi / (n + 1.0));
    return q;
  }
  if (kind == 2) {
    const double scale = 1.0 / std::sqrt(n);
    for (Index j = 0; j < dim; ++j)
      for (Index i = 0; i < dim; ++i) {
        // reduce i·j mod n before the angle so large products stay exact
        const double angle = 2.0 * pi * static_cast<double>((i * j) % dim) / n;
        q(i, j) = scale * (std::sin(angle) + std::cos(angle));
      }
    return q;
  }
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(kind)));
  const MatrixXd g = rng.uniform_matrix(dim, dim, -1.0, 1.0);
  const auto f = qr_factorize(g);
  q = f.q();
  // Fix signs so that R has a positive diagonal.
  const MatrixXd r = f.R();
  for (Index j = 0; j < dim; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

QlsProblem assemble_problem(const MatrixXd& U, const VectorXd& sigma, const MatrixXd& V, const VectorXd& c,
                            std::string label)
{
  const Index n = sigma.size();
  require_dense(U, "assemble_problem: U");
  require_dense(V, "assemble_problem: V");
  if (U.rows() != U.cols() || V.rows() != V.cols())
    fail(ErrorKind::DimensionMismatch, "assemble_problem: U and V must be square");
  require_size(V.rows(), n, "assemble_problem: V order");
  require_size(c.size(), n, "assemble_problem: c length");
  if (U.rows() < n) fail(ErrorKind::DimensionMismatch, "assemble_problem: U order must be >= n");
  for (Index i = 0; i < n; ++i)
    if (!(sigma(i) > 0.0) || !std::isfinite(sigma(i)))
      fail(ErrorKind::InvalidParameter, "assemble_problem: sigma must be positive");

  const auto un = U.leftCols(n);
  QlsProblem p;
  p.A = un * sigma.asDiagonal() * V.transpose();
  VectorXd x(n);
  for (Index i = 0; i < n; ++i) x(i) = static_cast<double>(n - 1 - i);
  const VectorXd pinv_t_c = un * (sigma.cwiseInverse().asDiagonal() * (V.transpose() * c));
  p.b = p.A * x - pinv_t_c;
  p.c = c;
  p.x_exact = x;
  p.label = std::move(label);
  return p;
}

std::string family_label(const FamilySpec& s)
{
  std::ostringstream os;
  os.precision(6);
  if (s.family == Family::C1)
    os << "c1-a=" << s.param1;
  else
    os << "c2-dw=" << s.param1 << "-up=" << s.param2;
  os << "-c=[" << s.gamma << ";" << s.zeta << "]-m=" << s.m << "-n=" << s.n << "-uv=" << s.u_kind << s.v_kind
     << "-seed=" << s.seed;
  return os.str();
}

QlsProblem make_family_problem(const FamilySpec& s)
{
  if (s.m < s.n) fail(ErrorKind::InvalidParameter, "family: m must be >= n");
  const VectorXd sigma = s.family == Family::C1 ? sigma_c1(s.n, s.param1) : sigma_c2(s.n, s.param1, s.param2);
  const MatrixXd U = orthogonal_factor(s.m, s.u_kind, derive_seed(s.seed, 101));
  const MatrixXd V = orthogonal_factor(s.n, s.v_kind, derive_seed(s.seed, 202));
  Rng rng(derive_seed(s.seed, 303));
  const VectorXd c = (s.gamma + (s.zeta - s.gamma) * rng.uniform_vector(s.n).array()).matrix();
  std::string label = s.label.empty() ? family_label(s) : s.label;
  return assemble_problem(U, sigma, V, c, label);
}

bool is_power_of_two(double v)
{
  if (!(v > 0.0) || !std::isfinite(v)) return false;
  int exp = 0;
  return std::frexp(v, &exp) == 0.5;
}

double round_to_power_of_two(double v, bool* rounded)
{
  if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorKind::InvalidParameter, "eps must be positive and finite");
  const bool exact = is_power_of_two(v);
  if (rounded != nullptr) *rounded = !exact;
  if (exact) return v;
  return std::ldexp(1.0, static_cast<int>(std::lround(std::log2(v))));
}

EpsSystem build_eps_system(const QlsProblem& p, double eps)
{
  EpsSystem e;
  e.eps = round_to_power_of_two(eps, &e.eps_rounded);
  const Index m = p.rows(), n = p.cols();
  e.A_eps.resize(m + 1, n);
  e.A_eps.topRows(m) = p.A;
  e.A_eps.row(m) = e.eps * p.c.transpose();
  e.b_eps.resize(m + 1);
  e.b_eps.head(m) = p.b;
  e.b_eps(m) = 1.0 / e.eps;
  return e;
}

VectorXd HatSystem::apply_masked(const VectorXd& x) const
{
  VectorXd y(rows());
  const Index m = rows() - 1;
  y.head(m) = A_hat.topRows(m) * x;
  y(m) = 0.0;
  return y;
}

VectorXd HatSystem::normal_residual(const VectorXd& x) const
{
  return A_hat.transpose() * (apply_masked(x) - b_hat);
}

HatSystem build_hat_system(const QlsProblem& p)
{
  const Index m = p.rows(), n = p.cols();
  HatSystem h;
  h.A_hat.resize(m + 1, n);
  h.A_hat.topRows(m) = p.A;
  h.A_hat.row(m) = p.c.transpose();
  h.b_hat.resize(m + 1);
  h.b_hat.head(m) = p.b;
  h.b_hat(m) = 1.0;
  return h;
}

double default_augmented_scale(const MatrixXd& a) { return svd(a).sigma_min() / std::numbers::sqrt2; }

AugmentedSystem build_augmented(const QlsProblem& p, double scale)
{
  if (!(scale > 0.0) || !std::isfinite(scale)) fail(ErrorKind::InvalidParameter, "build_augmented: scale must be > 0");
  const Index m = p.rows(), n = p.cols();
  AugmentedSystem s;
  s.m = m;
  s.n = n;
  s.scale = scale;
  s.K = MatrixXd::Zero(m + n, m + n);
  s.K.topLeftCorner(m, m).diagonal().setConstant(scale);
  s.K.topRightCorner(m, n) = p.A;
  s.K.bottomLeftCorner(n, m) = p.A.transpose();
  s.rhs.resize(m + n);
  s.rhs.head(m) = p.b;
  s.rhs.tail(n) = -p.c / scale;
  return s;
}

std::vector<FamilySpec> problem_set_P_specs(std::uint64_t seed)
{
  constexpr Index m = 100, n = 50;
  // (gamma, zeta) ranges for c = gamma + (zeta − gamma)·rand.
  const std::array<std::pair<double, double>, 8> c_ranges{{
      {-1e-10, 1e-10},
      {1e-10, 1e-4},
      {-1e-4, 1e-4},
      {1e-4, 1.0},
      {-1.0, 1.0},
      {1.0, 1e2},
      {-1e2, 1e2},
      {-1e2, -1.0},
  }};
  // The rotation proposes a range; smaller ranges are taken while the bound
  // ‖(A†)ᵀc‖/(‖A‖‖x‖) ≤ max|c|·√n/(σ_min·σ_max·‖x‖) exceeds 10.
  const double x_norm = std::sqrt((n - 1.0) * n * (2.0 * n - 1.0) / 6.0);
  const auto pick_range = [&](int proposed, double s_min, double s_max) {
    int i = proposed;
    while (i > 0) {
      const double cmax = std::max(std::abs(c_ranges[i].first), std::abs(c_ranges[i].second));
      if (cmax * std::sqrt(double(n)) / (s_min * s_max * x_norm) <= 10.0) break;
      --i;
    }
    return c_ranges[i];
  };
  std::vector<FamilySpec> specs;
  specs.reserve(40);
  for (int k = 0; k < 20; ++k) {
    // C1: κ = 10^{10k/19}; a > 1 (σ ≤ 1) on even k, a < 1 (σ ≥ 1) on odd k.
    const double log_kappa = 10.0 * k / 19.0;
    const double a_big = std::pow(10.0, log_kappa / static_cast<double>(n - 1));
    FamilySpec s;
    s.family = Family::C1;
    s.m = m;
    s.n = n;
    s.param1 = (k % 2 == 0) ? a_big : 1.0 / a_big;
    const double s_far = std::pow(s.param1, -static_cast<double>(n));
    const auto range = pick_range(k % 8, std::min(1.0 / s.param1, s_far), std::max(1.0 / s.param1, s_far));
    s.gamma = range.first;
    s.zeta = range.second;
    s.u_kind = 1 + (k % 6);
    s.v_kind = 1 + ((k + 3) % 6);
    s.seed = derive_seed(seed, 1000 + k);
    specs.push_back(s);
  }
  const std::array<double, 4> ups{1e-2, 1.0, 1e2, 1e3};
  for (int k = 0; k < 20; ++k) {
    // C2: κ = up/dw = 10^{0.5 + 9.5k/19}
    const double kappa = std::pow(10.0, 0.5 + 9.5 * k / 19.0);
    FamilySpec s;
    s.family = Family::C2;
    s.m = m;
    s.n = n;
    s.param2 = ups[k % 4];
    s.param1 = s.param2 / kappa;
    const auto range = pick_range((k + 3) % 8, s.param1, s.param2);
    s.gamma = range.first;
    s.zeta = range.second;
    s.u_kind = 1 + ((k + 2) % 6);
    s.v_kind = 1 + ((k + 5) % 6);
    s.seed = derive_seed(seed, 2000 + k);
    specs.push_back(s);
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    std::ostringstream os;
    os << "P" << (i < 10 ? "0" : "") << i << "-";
    specs[i].label = os.str() + family_label(specs[i]);
  }
  return specs;
}

std::vector<QlsProblem> generate_problem_set_P(std::uint64_t seed)
{
  std::vector<QlsProblem> out;
  for (const auto& s : problem_set_P_specs(seed)) out.push_back(make_family_problem(s));
  return out;
}

const std::vector<TableConfig>& table_configs()
{
  static const std::vector<TableConfig> configs{
      {"a=2/alpha=1e-10", Family::C1, 2.0, 0.0, 1e-10},
      {"a=0.4/alpha=1e-12", Family::C1, 0.4, 0.0, 1e-12},
      {"a=0.7/alpha=1e-1", Family::C1, 0.7, 0.0, 1e-1},
      {"a=1.3/alpha=1e-4", Family::C1, 1.3, 0.0, 1e-4},
      {"up=1e2/dw=1e-4/alpha=1e-4", Family::C2, 1e-4, 1e2, 1e-4},
      {"up=1e-2/dw=1e-6/alpha=1e-5", Family::C2, 1e-6, 1e-2, 1e-5},
      {"a=1.9/alpha=-1e-6", Family::C1, 1.9, 0.0, -1e-6},
      {"up=1e3/dw=1e-1/alpha=1e2", Family::C2, 1e-1, 1e3, 1e2},
      {"up=1e4/dw=1e-3/alpha=-1e-2", Family::C2, 1e-3, 1e4, -1e-2},
      {"a=0.5/alpha=1", Family::C1, 0.5, 0.0, 1.0},
  };
  return configs;
}

FamilySpec table_spec(const TableConfig& cfg, std::uint64_t seed)
{
  FamilySpec s;
  s.family = cfg.family;
  s.m = 40;
  s.n = 20;
  s.param1 = cfg.param1;
  s.param2 = cfg.param2;
  s.gamma = 0.0;
  s.zeta = cfg.alpha;
  s.u_kind = 1;
  s.v_kind = 1;
  s.seed = seed;
  s.label = "table:" + cfg.id;
  return s;
}

}  // namespace qls
