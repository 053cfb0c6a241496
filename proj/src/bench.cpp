#include "qls/bench.hpp"
#include "qls/analysis.hpp"
#include "qls/direct.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qls {

namespace {

using json = nlohmann::json;

constexpr const char* kSolverNames[] = {"CG", "CGLSI", "CGLSEPS", "MINRES", "QR", "QREPS", "SM", "AUG"};

std::string upper(std::string s)
{
  for (char& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return s;
}

[[noreturn]] void config_error(const std::string& where, const std::string& what)
{
  fail(ErrorKind::ConfigError, where + ": " + what);
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed)
{
  for (const auto& item : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; }))
      config_error(where + "." + item.key(), "unknown field");
  }
}

double get_number(const json& obj, const char* key, const std::string& where, double fallback)
{
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) config_error(where + "." + key, "expected a number");
  return v.get<double>();
}

std::int64_t get_integer(const json& obj, const char* key, const std::string& where, std::int64_t fallback,
                         std::int64_t lo)
{
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) config_error(where + "." + key, "expected an integer");
  const auto out = v.get<std::int64_t>();
  if (out < lo) config_error(where + "." + key, "must be at least " + std::to_string(lo));
  return out;
}

std::string get_string(const json& obj, const char* key, const std::string& where, const std::string& fallback)
{
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) config_error(where + "." + key, "expected a string");
  return v.get<std::string>();
}

VectorXd get_vector(const json& v, const std::string& where)
{
  if (!v.is_array()) config_error(where, "expected an array of numbers");
  VectorXd out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) config_error(where + "[" + std::to_string(i) + "]", "expected a number");
    out(static_cast<Index>(i)) = v[i].get<double>();
  }
  return out;
}

MatrixXd get_matrix(const json& v, const std::string& where)
{
  if (!v.is_array() || v.empty()) config_error(where, "expected a nonempty array of rows");
  const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
  if (cols == 0) config_error(where + "[0]", "expected a nonempty row");
  MatrixXd out(static_cast<Index>(v.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string row_where = where + "[" + std::to_string(i) + "]";
    const VectorXd row = get_vector(v[i], row_where);
    if (static_cast<std::size_t>(row.size()) != cols) config_error(row_where, "row length differs from row 0");
    out.row(static_cast<Index>(i)) = row.transpose();
  }
  return out;
}

ProblemSource parse_source(const json& e, const std::string& where)
{
  if (!e.is_object()) config_error(where, "expected an object");
  ProblemSource src;
  if (e.contains("set")) {
    check_keys(e, where, {"set"});
    const std::string set = get_string(e, "set", where, "");
    if (set == "P")
      src.kind = ProblemSource::Kind::SetP;
    else if (set == "table")
      src.kind = ProblemSource::Kind::Table;
    else
      config_error(where + ".set", "expected \"P\" or \"table\", got \"" + set + "\"");
    return src;
  }
  if (e.contains("file")) {
    check_keys(e, where, {"file"});
    src.kind = ProblemSource::Kind::File;
    src.path = get_string(e, "file", where, "");
    return src;
  }
  if (e.contains("A")) {
    check_keys(e, where, {"A", "b", "c", "x", "label"});
    src.kind = ProblemSource::Kind::Inline;
    QlsProblem& p = src.problem;
    p.A = get_matrix(e.at("A"), where + ".A");
    if (!e.contains("b")) config_error(where + ".b", "missing");
    p.b = get_vector(e.at("b"), where + ".b");
    p.c = e.contains("c") ? get_vector(e.at("c"), where + ".c") : VectorXd::Zero(p.A.cols());
    if (e.contains("x")) p.x_exact = get_vector(e.at("x"), where + ".x");
    p.label = get_string(e, "label", where, where);
    if (p.b.size() != p.A.rows()) config_error(where + ".b", "length must equal the number of rows of A");
    if (p.c.size() != p.A.cols()) config_error(where + ".c", "length must equal the number of columns of A");
    if (p.x_exact && p.x_exact->size() != p.A.cols())
      config_error(where + ".x", "length must equal the number of columns of A");
    return src;
  }
  if (!e.contains("family")) config_error(where, "expected one of \"family\", \"set\", \"file\" or \"A\"");
  check_keys(e, where, {"family", "m", "n", "a", "dw", "up", "gamma", "zeta", "u_kind", "v_kind", "seed", "label"});
  FamilySpec& s = src.spec;
  const std::string fam = upper(get_string(e, "family", where, ""));
  if (fam == "C1") {
    s.family = Family::C1;
    if (e.contains("dw") || e.contains("up")) config_error(where, "C1 takes \"a\", not \"dw\"/\"up\"");
    s.param1 = get_number(e, "a", where, 0.5);
  } else if (fam == "C2") {
    s.family = Family::C2;
    if (e.contains("a")) config_error(where + ".a", "C2 takes \"dw\" and \"up\"");
    s.param1 = get_number(e, "dw", where, 1e-8);
    s.param2 = get_number(e, "up", where, 0.5);
  } else {
    config_error(where + ".family", "expected \"C1\" or \"C2\"");
  }
  s.m = get_integer(e, "m", where, 40, 1);
  s.n = get_integer(e, "n", where, 20, 1);
  if (s.n > s.m) config_error(where + ".n", "must not exceed m");
  s.gamma = get_number(e, "gamma", where, 0.0);
  s.zeta = get_number(e, "zeta", where, 1.0);
  s.u_kind = static_cast<int>(get_integer(e, "u_kind", where, 1, 0));
  s.v_kind = static_cast<int>(get_integer(e, "v_kind", where, 1, 0));
  src.explicitSeed = e.contains("seed");
  s.seed = static_cast<std::uint64_t>(get_integer(e, "seed", where, 0, 0));
  s.label = get_string(e, "label", where, "");
  return src;
}

std::string line_column(const std::string& text, std::size_t byte)
{
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

double relative_error(const VectorXd& x, const VectorXd& ref)
{
  if (!all_finite(x)) return INFINITY;
  const double rn = ref.norm();
  return rn == 0 ? (x - ref).norm() : (x - ref).norm() / rn;
}

double solver_estimate(SolverKind s, const QlsProblem& p, const VectorXd& x, double eps)
{
  switch (s) {
    case SolverKind::CG: return estimate_cg(p, x);
    case SolverKind::CGLSEPS:
    case SolverKind::QREPS:
    case SolverKind::SM: return estimate_cgls_eps(p, x, eps);
    default: return estimate_cglsi(p, x);
  }
}

}  // namespace

const char* to_string(SolverKind s) { return kSolverNames[static_cast<int>(s)]; }

SolverKind parse_solver(const std::string& name)
{
  const std::string u = upper(name);
  for (SolverKind s : all_solvers())
    if (u == to_string(s)) return s;
  if (u == "CGLSE" || u == "CGLS_EPS") return SolverKind::CGLSEPS;
  if (u == "QRE" || u == "QR_EPS") return SolverKind::QREPS;
  fail(ErrorKind::ConfigError, "unknown solver '" + name + "'");
}

const std::vector<SolverKind>& all_solvers()
{
  static const std::vector<SolverKind> all = {SolverKind::CG, SolverKind::CGLSI, SolverKind::CGLSEPS,
                                              SolverKind::MINRES, SolverKind::QR, SolverKind::QREPS,
                                              SolverKind::SM, SolverKind::AUG};
  return all;
}

bool is_iterative(SolverKind s)
{
  return s == SolverKind::CG || s == SolverKind::CGLSI || s == SolverKind::CGLSEPS || s == SolverKind::MINRES;
}

const char* to_string(RecordStatus s)
{
  switch (s) {
    case RecordStatus::ok: return "ok";
    case RecordStatus::failed: return "failed";
    case RecordStatus::error: return "error";
  }
  return "error";
}

RecordStatus parse_status(const std::string& name)
{
  if (name == "ok") return RecordStatus::ok;
  if (name == "failed") return RecordStatus::failed;
  if (name == "error") return RecordStatus::error;
  fail(ErrorKind::InvalidParameter, "unknown status '" + name + "'");
}

bool same_except_time(const BenchRecord& a, const BenchRecord& b)
{
  const auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
  return a.problemId == b.problemId && a.m == b.m && a.n == b.n && same(a.kappaA, b.kappaA) && a.solver == b.solver
         && a.iterations == b.iterations && same(a.relError, b.relError) && same(a.etaBar, b.etaBar)
         && same(a.estimate, b.estimate) && a.residualGapFinal.has_value() == b.residualGapFinal.has_value()
         && (!a.residualGapFinal || same(*a.residualGapFinal, *b.residualGapFinal)) && a.status == b.status;
}

IterationControl ExperimentConfig::control() const
{
  IterationControl c;
  c.tol = tol;
  c.maxIterations = maxIterations;
  return c;
}

ExperimentConfig parse_config(const std::string& text)
{
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::ConfigError, "config: " + line_column(text, e.byte == 0 ? 0 : e.byte - 1) + ": malformed JSON");
  }
  if (!doc.is_object()) config_error("config", "top level must be an object");
  check_keys(doc, "config", {"families", "solvers", "eps", "tol", "maxIterations", "seed", "output"});

  ExperimentConfig cfg;
  cfg.seed = static_cast<std::uint64_t>(get_integer(doc, "seed", "config", 0, 0));
  cfg.eps = get_number(doc, "eps", "config", cfg.eps);
  if (!(cfg.eps > 0) || !std::isfinite(cfg.eps)) config_error("config.eps", "must be positive");
  cfg.tol = get_number(doc, "tol", "config", cfg.tol);
  if (!(cfg.tol > 0)) config_error("config.tol", "must be positive");
  cfg.maxIterations = get_integer(doc, "maxIterations", "config", 0, 0);
  cfg.output = get_string(doc, "output", "config", "");

  if (!doc.contains("families")) config_error("config.families", "missing");
  const json& fams = doc.at("families");
  if (!fams.is_array() || fams.empty()) config_error("config.families", "expected a nonempty array");
  for (std::size_t i = 0; i < fams.size(); ++i)
    cfg.sources.push_back(parse_source(fams[i], "config.families[" + std::to_string(i) + "]"));

  if (!doc.contains("solvers") || (doc.at("solvers").is_string() && doc.at("solvers").get<std::string>() == "all")) {
    cfg.solvers = all_solvers();
  } else {
    const json& sv = doc.at("solvers");
    if (!sv.is_array() || sv.empty()) config_error("config.solvers", "expected \"all\" or a nonempty array");
    for (std::size_t i = 0; i < sv.size(); ++i) {
      const std::string where = "config.solvers[" + std::to_string(i) + "]";
      if (!sv[i].is_string()) config_error(where, "expected a solver name");
      try {
        cfg.solvers.push_back(parse_solver(sv[i].get<std::string>()));
      } catch (const Error& e) {
        config_error(where, e.what());
      }
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
  std::ifstream is(path);
  if (!is) fail(ErrorKind::IoError, "cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::vector<QlsProblem> build_problems(const ExperimentConfig& config)
{
  std::vector<QlsProblem> out;
  for (const ProblemSource& src : config.sources) {
    switch (src.kind) {
      case ProblemSource::Kind::Family: {
        FamilySpec spec = src.spec;
        if (!src.explicitSeed) spec.seed = config.seed;
        out.push_back(make_family_problem(spec));
        break;
      }
      case ProblemSource::Kind::SetP: {
        auto set = generate_problem_set_P(config.seed);
        for (auto& p : set) out.push_back(std::move(p));
        break;
      }
      case ProblemSource::Kind::Table:
        for (const auto& cfg : table_configs()) out.push_back(make_family_problem(table_spec(cfg, config.seed)));
        break;
      case ProblemSource::Kind::File: {
        QlsProblem p = load_problem(src.path);
        if (p.label.empty()) p.label = src.path;
        out.push_back(std::move(p));
        break;
      }
      case ProblemSource::Kind::Inline: out.push_back(src.problem); break;
    }
  }
  for (QlsProblem& p : out)
    if (!p.x_exact) p.x_exact = solve_qr(p);
  return out;
}

SolveResult run_solver(SolverKind s, const QlsProblem& p, double eps, const IterationControl& ctrl)
{
  SolveResult r;
  const auto take = [&](SolveOutcome o) {
    r.x = std::move(o.x);
    r.iterations = o.iterations;
    if (o.trueResidualGapHistory && !o.trueResidualGapHistory->empty())
      r.residualGapFinal = o.trueResidualGapHistory->back();
  };
  switch (s) {
    case SolverKind::CG: take(cg_base(p, ctrl)); break;
    case SolverKind::CGLSI: take(cgls_i(p, ctrl)); break;
    case SolverKind::CGLSEPS: take(cgls_eps(p, eps, ctrl)); break;
    case SolverKind::MINRES: take(minres_augmented(p, ctrl)); break;
    case SolverKind::QR: r.x = solve_qr(p); break;
    case SolverKind::QREPS: r.x = solve_qr_eps(p, eps); break;
    case SolverKind::SM: r.x = solve_sm(p, eps); break;
    case SolverKind::AUG: r.x = solve_aug(p); break;
  }
  return r;
}

BenchRecord bench_one(const QlsProblem& p, SolverKind s, double eps, const IterationControl& ctrl)
{
  BenchRecord rec;
  rec.problemId = p.label;
  rec.m = p.rows();
  rec.n = p.cols();
  rec.solver = s;
  try {
    rec.kappaA = condition_number(p.A);
    const auto t0 = std::chrono::steady_clock::now();
    const SolveResult r = run_solver(s, p, eps, ctrl);
    const auto t1 = std::chrono::steady_clock::now();
    rec.wallTimeNanos = std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
    rec.iterations = r.iterations;
    rec.residualGapFinal = r.residualGapFinal;
    rec.relError = relative_error(r.x, *p.x_exact);
    if (all_finite(r.x) && r.x.norm() > 0) {
      rec.etaBar = linearized_backward_error(p, r.x) / p.data_norm();
      rec.estimate = solver_estimate(s, p, r.x, eps);
    } else {
      rec.etaBar = NAN;
      rec.estimate = NAN;
    }
    rec.status = rec.relError > kFailureThreshold ? RecordStatus::failed : RecordStatus::ok;
  } catch (const Error&) {
    rec.relError = NAN;
    rec.etaBar = NAN;
    rec.estimate = NAN;
    rec.status = RecordStatus::error;
  }
  return rec;
}

std::vector<BenchRecord> run_suite(const std::vector<QlsProblem>& problems, const ExperimentConfig& config)
{
  if (config.solvers.empty()) fail(ErrorKind::ConfigError, "config.solvers: empty");
  const IterationControl ctrl = config.control();
  std::vector<BenchRecord> out;
  out.reserve(problems.size() * config.solvers.size());
  for (const QlsProblem& p : problems) {
    if (!p.x_exact) fail(ErrorKind::InvalidParameter, "run_suite: problem '" + p.label + "' has no reference solution");
    for (SolverKind s : config.solvers) out.push_back(bench_one(p, s, config.eps, ctrl));
  }
  std::stable_sort(out.begin(), out.end(), [](const BenchRecord& a, const BenchRecord& b) {
    if (a.problemId != b.problemId) return a.problemId < b.problemId;
    return static_cast<int>(a.solver) < static_cast<int>(b.solver);
  });
  return out;
}

std::vector<BenchRecord> run_suite(const ExperimentConfig& config)
{
  return run_suite(build_problems(config), config);
}

std::vector<double> trace_residual_gap(const QlsProblem& p, const IterationControl& ctrl)
{
  if (!p.x_exact) fail(ErrorKind::InvalidParameter, "trace_residual_gap: exact solution required");
  SolveOutcome o = cgls_i(p, ctrl);
  if (!o.trueResidualGapHistory) return {};
  return std::move(*o.trueResidualGapHistory);
}

}  // namespace qls
