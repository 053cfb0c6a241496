#ifndef QLS_BENCH_HPP
#define QLS_BENCH_HPP

#include "qls/iterative.hpp"
#include "qls/problems.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qls {

enum class SolverKind { CG, CGLSI, CGLSEPS, MINRES, QR, QREPS, SM, AUG };

const char* to_string(SolverKind s);
SolverKind parse_solver(const std::string& name);  // case-insensitive; ConfigError otherwise
const std::vector<SolverKind>& all_solvers();
bool is_iterative(SolverKind s);

enum class RecordStatus { ok, failed, error };

const char* to_string(RecordStatus s);
RecordStatus parse_status(const std::string& name);

/// Relative errors above this count as a failed run.
inline constexpr double kFailureThreshold = 1e-2;

struct BenchRecord {
  std::string problemId;
  Index m = 0;
  Index n = 0;
  double kappaA = 0;
  SolverKind solver = SolverKind::CG;
  Index iterations = 0;
  double relError = 0;
  double etaBar = 0;    // ‖J†h‖/‖[A,b,c]‖_F at the computed solution
  double estimate = 0;  // first-order forward error estimate for this solver
  std::optional<double> residualGapFinal;
  std::int64_t wallTimeNanos = 0;
  RecordStatus status = RecordStatus::ok;
};

bool same_except_time(const BenchRecord& a, const BenchRecord& b);

/// One entry of the "families" list of an experiment config.
struct ProblemSource {
  enum class Kind { Family, SetP, Table, File, Inline } kind = Kind::Family;
  FamilySpec spec;            // Family
  bool explicitSeed = false;  // otherwise the config seed applies
  std::string path;           // File
  QlsProblem problem;         // Inline
};

struct ExperimentConfig {
  std::vector<ProblemSource> sources;
  std::vector<SolverKind> solvers;
  double eps = 0x1p-47;
  double tol = unit_roundoff() * unit_roundoff();
  Index maxIterations = 0;
  std::uint64_t seed = 0;
  std::string output;

  IterationControl control() const;
};

/// Parses the JSON config; errors carry the line or the offending field.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Materializes every problem of the config. Problems without a known
/// solution get the semi-normal-equations solution as reference.
std::vector<QlsProblem> build_problems(const ExperimentConfig& config);

struct SolveResult {
  VectorXd x;
  Index iterations = 0;
  std::optional<double> residualGapFinal;
};

SolveResult run_solver(SolverKind s, const QlsProblem& p, double eps, const IterationControl& ctrl);

BenchRecord bench_one(const QlsProblem& p, SolverKind s, double eps, const IterationControl& ctrl);

/// One record per (problem, solver), sorted by problem id then solver.
std::vector<BenchRecord> run_suite(const ExperimentConfig& config);
std::vector<BenchRecord> run_suite(const std::vector<QlsProblem>& problems, const ExperimentConfig& config);

enum class RecordFormat { Csv, Json };

inline constexpr const char* kCsvHeader =
    "problem_id,m,n,kappa,solver,iterations,rel_error,eta_bar,estimate,residual_gap,wall_time_ns,status";

void write_records_csv(std::ostream& os, const std::vector<BenchRecord>& records);
void write_records_json(std::ostream& os, const std::vector<BenchRecord>& records);
std::vector<BenchRecord> read_records_csv(std::istream& is);
void emit_records(const std::vector<BenchRecord>& records, const std::string& path, RecordFormat format);
std::vector<BenchRecord> load_records_csv(const std::string& path);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

struct ProfileCurve {
  SolverKind solver = SolverKind::CG;
  std::vector<std::pair<double, double>> points;  // (tau, fraction)
};

/// τ grid: 10 points per decade on [1, 1e16].
std::vector<double> profile_grid();

/// Ratios are relError / best relError on the problem (errors floored at u);
/// failed and error runs get +∞.
std::vector<ProfileCurve> performance_profile(const std::vector<BenchRecord>& records);

void write_profile_csv(std::ostream& os, const std::vector<ProfileCurve>& curves);
void write_profile_svg(std::ostream& os, const std::vector<ProfileCurve>& curves);
/// Writes the SVG to `path` and the curve points next to it (extension .csv).
void emit_profile_svg(const std::vector<ProfileCurve>& curves, const std::string& path);

/// Text table of κ(A), κ²η̄ and E/Ê for CG, CGLSI and CGLSε on the ten
/// table configurations.
std::string report_table(const std::vector<BenchRecord>& records);

/// CGLSI gap ‖(b̂ − ÎÂx_k) − d̂_k‖/(‖ÎÂ‖‖x‖) per iteration.
std::vector<double> trace_residual_gap(const QlsProblem& p, const IterationControl& ctrl = {});

}  // namespace qls

#endif  // QLS_BENCH_HPP
