#ifndef QLS_PROBLEMS_HPP
#define QLS_PROBLEMS_HPP

#include "qls/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace qls {

/// Data of AᵀA·x = Aᵀb + c with A m×n of full column rank.
struct QlsProblem {
  MatrixXd A;
  VectorXd b;
  VectorXd c;
  std::optional<VectorXd> x_exact;
  std::string label;

  Index rows() const { return A.rows(); }
  Index cols() const { return A.cols(); }

  // r = b − A·x
  VectorXd residual(const VectorXd& x) const { return b - A * x; }
  // Aᵀb + c evaluated in working precision.
  VectorXd normal_rhs() const { return A.transpose() * b + c; }
  // ‖[A, b, c]‖_F
  double data_norm() const;
};

/// Shape/finiteness checks, plus the construction-consistency bound
/// ‖AᵀA·x − (Aᵀb + c)‖ ≤ 1e3·u·κ²(A)·‖Aᵀb + c‖ when x_exact is present.
void validate(const QlsProblem& p);

/// Residual of the construction-consistency check, relative to ‖Aᵀb + c‖.
double construction_residual(const QlsProblem& p);

/// κ(A) = σ_max/σ_min from the Jacobi SVD.
double condition_number(const MatrixXd& a);

/// Deterministic uniform [0,1) stream: mt19937_64, top 53 bits.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1p-53; }
  VectorXd uniform_vector(Index n);
  MatrixXd uniform_matrix(Index m, Index n, double lo, double hi);

private:
  std::mt19937_64 engine_;
};

/// Mixes a base seed with a stream tag into an independent seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

// Singular value spectra of the synthetic families.
VectorXd sigma_c1(Index n, double a);                 // (a^{-1}, …, a^{-n})
VectorXd sigma_c2(Index n, double dw, double up);     // linspace(dw, up, n)

/// Square orthogonal factor of order `dim`.
///   kind 1: sine transform √(2/(n+1))·sin(ijπ/(n+1)), symmetric.
///   kind 2: Hartley (sin+cos)(2πij/n)/√n, symmetric.
///   kinds 3–6: Q factor of a seeded uniform random matrix, one stream per kind.
MatrixXd orthogonal_factor(Index dim, int kind, std::uint64_t seed);

/// A = U(:,1:n)·diag(sigma)·Vᵀ, x = (n−1, …, 1, 0), b = A·x − (A†)ᵀc with
/// (A†)ᵀc = U(:,1:n)·diag(1/sigma)·Vᵀc taken from the factors.
QlsProblem assemble_problem(const MatrixXd& U, const VectorXd& sigma, const MatrixXd& V, const VectorXd& c,
                            std::string label);

enum class Family { C1, C2 };

/// One synthetic problem: A = UΣVᵀ with Σ from C1 (param1 = a) or C2
/// (param1 = dw, param2 = up), c = gamma + (zeta − gamma)·rand(n).
struct FamilySpec {
  Family family = Family::C1;
  Index m = 40;
  Index n = 20;
  double param1 = 0.5;
  double param2 = 0.0;
  double gamma = 0.0;
  double zeta = 1.0;
  int u_kind = 1;
  int v_kind = 1;
  std::uint64_t seed = 0;
  std::string label;
};

QlsProblem make_family_problem(const FamilySpec& spec);
std::string family_label(const FamilySpec& spec);

/// Least-squares reformulation min‖A_eps·x − b_eps‖², A_eps = [A; eps·cᵀ],
/// b_eps = [b; 1/eps]. eps is snapped to the nearest power of two.
struct EpsSystem {
  MatrixXd A_eps;
  VectorXd b_eps;
  double eps = 0.0;
  bool eps_rounded = false;  // the requested eps was not a power of two
};

bool is_power_of_two(double v);
/// Nearest 2^i in the logarithmic sense; flags whether rounding happened.
double round_to_power_of_two(double v, bool* rounded = nullptr);

EpsSystem build_eps_system(const QlsProblem& p, double eps);

/// Â = [A; cᵀ], b̂ = [b; 1]; Î zeroes the last coordinate.
struct HatSystem {
  MatrixXd A_hat;
  VectorXd b_hat;

  Index rows() const { return A_hat.rows(); }
  // Î·Â·x
  VectorXd apply_masked(const VectorXd& x) const;
  // Âᵀ(Î·Â·x − b̂)
  VectorXd normal_residual(const VectorXd& x) const;
};

HatSystem build_hat_system(const QlsProblem& p);

/// K = [[s·I, A], [Aᵀ, 0]] with unknowns (r/s, x) and rhs (b, −c/s).
struct AugmentedSystem {
  MatrixXd K;
  VectorXd rhs;
  double scale = 1.0;
  Index m = 0;
  Index n = 0;

  VectorXd x_block(const VectorXd& z) const { return z.tail(n); }
  // Recovers r = b − A·x from the scaled first block.
  VectorXd residual_block(const VectorXd& z) const { return scale * z.head(m); }
};

double default_augmented_scale(const MatrixXd& a);  // σ_min(A)/√2
AugmentedSystem build_augmented(const QlsProblem& p, double scale);

/// The 40-problem robustness set (m = 100, n = 50): 20 from C1 and 20 from C2
/// with κ(A) spread over [1, 1e10], rotating orthogonal kinds and c ranges.
std::vector<FamilySpec> problem_set_P_specs(std::uint64_t seed);
std::vector<QlsProblem> generate_problem_set_P(std::uint64_t seed);

/// The ten synthetic configurations of the forward-error comparison table
/// (m = 40, n = 20, c = alpha·rand(n)).
struct TableConfig {
  std::string id;
  Family family;
  double param1;
  double param2;
  double alpha;
};
const std::vector<TableConfig>& table_configs();
FamilySpec table_spec(const TableConfig& cfg, std::uint64_t seed);

// Text serialization: named blocks, each "rows cols" then row-major hexadecimal
// binary64 literals, so values round-trip exactly.
void write_problem(std::ostream& os, const QlsProblem& p);
QlsProblem read_problem(std::istream& is);
void save_problem(const std::string& path, const QlsProblem& p);
QlsProblem load_problem(const std::string& path);

}  // namespace qls

#endif  // QLS_PROBLEMS_HPP
