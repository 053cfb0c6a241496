#include "qls/bench.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace qls;

namespace {

constexpr double u = 0x1p-53;

BenchRecord record(const std::string& id, SolverKind s, double err)
{
  BenchRecord r;
  r.problemId = id;
  r.m = 4;
  r.n = 2;
  r.kappaA = 10;
  r.solver = s;
  r.relError = err;
  r.status = err > kFailureThreshold ? RecordStatus::failed : RecordStatus::ok;
  return r;
}

std::string csv_of(const std::vector<BenchRecord>& recs)
{
  std::ostringstream os;
  write_records_csv(os, recs);
  return os.str();
}

std::string strip_time(const std::string& csv)
{
  std::istringstream is(csv);
  std::ostringstream os;
  std::string line;
  while (std::getline(is, line)) {
    const auto last = line.rfind(',');
    const auto prev = line.rfind(',', last - 1);
    os << line.substr(0, prev) << line.substr(last) << '\n';
  }
  return os.str();
}

std::size_t count(const std::string& text, const std::string& needle)
{
  std::size_t n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

double fraction_at(const ProfileCurve& c, double tau)
{
  for (const auto& [t, f] : c.points)
    if (std::abs(t - tau) <= 1e-9 * tau) return f;
  ADD_FAILURE() << "tau " << tau << " not on grid";
  return -1;
}

const char* kIdentity = R"({
  "families": [{"A": [[1, 0], [0, 1]], "b": [1, 2], "c": [0.5, -1], "label": "identity"}],
  "solvers": "all"
})";

}  // namespace

TEST(Config, ParsesFamiliesAndDefaults)
{
  const ExperimentConfig cfg = parse_config(R"({
    "families": [{"family": "C1", "a": 0.5, "zeta": 2, "seed": 7}, {"family": "c2", "dw": 1e-6, "up": 1e-2},
                 {"set": "table"}],
    "solvers": ["cg", "CGLSI"], "tol": 1e-10, "maxIterations": 30, "seed": 3
  })");
  ASSERT_EQ(cfg.sources.size(), 3u);
  EXPECT_EQ(cfg.sources[0].spec.family, Family::C1);
  EXPECT_EQ(cfg.sources[0].spec.seed, 7u);
  EXPECT_TRUE(cfg.sources[0].explicitSeed);
  EXPECT_EQ(cfg.sources[1].spec.family, Family::C2);
  EXPECT_FALSE(cfg.sources[1].explicitSeed);
  EXPECT_EQ(cfg.sources[2].kind, ProblemSource::Kind::Table);
  EXPECT_EQ(cfg.solvers, (std::vector<SolverKind>{SolverKind::CG, SolverKind::CGLSI}));
  EXPECT_EQ(cfg.eps, 0x1p-47);
  EXPECT_EQ(cfg.control().tol, 1e-10);
  EXPECT_EQ(cfg.control().maxIterations, 30);
  EXPECT_EQ(build_problems(cfg).size(), 12u);
}

TEST(Config, ErrorsNameTheField)
{
  const auto message = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message(R"({"families": [{"family": "C1", "a": "x"}]})").find("config.families[0].a"), std::string::npos);
  EXPECT_NE(message(R"({"families": [{"set": "P"}], "solvers": ["CG", "LSQR"]})").find("config.solvers[1]"),
            std::string::npos);
  EXPECT_NE(message(R"({"families": [{"set": "P"}], "typo": 1})").find("config.typo"), std::string::npos);
  EXPECT_NE(message(R"({"families": []})").find("config.families"), std::string::npos);
  EXPECT_NE(message("{\n\"families\": [\n{\"set\": \"P\"},\n]\n}").find("line 4"), std::string::npos);
}

TEST(Suite, IdentityProblemAllSolvers)
{
  const auto recs = run_suite(parse_config(kIdentity));
  ASSERT_EQ(recs.size(), 8u);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(recs[i].solver, all_solvers()[i]);
    EXPECT_LE(recs[i].relError, 1e-12) << to_string(recs[i].solver);
    EXPECT_EQ(recs[i].status, RecordStatus::ok);
    EXPECT_EQ(recs[i].iterations == 0, !is_iterative(recs[i].solver));
  }
}

TEST(Suite, TableRowMagnitudes)
{
  ExperimentConfig cfg = parse_config(R"({"families": [{"set": "table"}], "solvers": ["CG", "CGLSI", "CGLSEPS"]})");
  const auto recs = run_suite(cfg);
  ASSERT_EQ(recs.size(), 30u);
  for (const BenchRecord& r : recs) {
    if (r.problemId != "table:a=0.5/alpha=1") continue;
    if (r.solver == SolverKind::CG) {
      EXPECT_GE(r.relError, 1e-9);
      EXPECT_LE(r.relError, 1e-5);
    } else {
      EXPECT_LE(r.relError, 1e-10);
    }
  }
  for (const BenchRecord& r : recs) {
    if (r.problemId != "table:a=1.3/alpha=1e-4") continue;
    EXPECT_GT(r.kappaA, 1e1);
    EXPECT_LT(r.kappaA, 1e3);
  }
}

TEST(Suite, FailureThresholdConsistency)
{
  ExperimentConfig cfg = parse_config(R"({"families": [{"family": "C2", "dw": 1e-8, "up": 0.5, "zeta": 1e-14},
      {"family": "C1", "a": 1.2}], "solvers": "all"})");
  for (const BenchRecord& r : run_suite(cfg)) {
    if (r.status == RecordStatus::error) continue;
    EXPECT_EQ(r.status == RecordStatus::failed, r.relError > kFailureThreshold) << to_string(r.solver);
  }
}

TEST(Suite, DeterministicOutput)
{
  const ExperimentConfig cfg = parse_config(R"({"families": [{"family": "C1", "a": 1.3, "zeta": 1e-4},
      {"family": "C2", "dw": 1e-4, "up": 1e2, "zeta": 1e-4}], "solvers": "all", "seed": 5})");
  EXPECT_EQ(strip_time(csv_of(run_suite(cfg))), strip_time(csv_of(run_suite(cfg))));
}

TEST(Suite, SeedOverrideReachesFamilies)
{
  ExperimentConfig cfg = parse_config(R"({"families": [{"family": "C1", "a": 1.3}], "solvers": ["QR"]})");
  const auto a = build_problems(cfg);
  cfg.seed = 9;
  const auto b = build_problems(cfg);
  EXPECT_NE(a[0].label, b[0].label);
  EXPECT_FALSE(a[0].c.isApprox(b[0].c));
}

TEST(Records, EmptyListIsHeaderOnly) { EXPECT_EQ(csv_of({}), std::string(kCsvHeader) + "\n"); }

TEST(Records, RoundTrip)
{
  BenchRecord r = record("P00-c1-a=1-c=[-1;1]", SolverKind::CGLSI, 0.1 + 0.2);
  r.etaBar = 1.0 / 3.0;
  r.estimate = 6.02214076e23;
  r.residualGapFinal = 3 * u;
  r.wallTimeNanos = 123456789;
  r.iterations = 42;
  BenchRecord q = record("quoted, \"id\"", SolverKind::AUG, NAN);
  q.status = RecordStatus::error;
  q.kappaA = INFINITY;
  const std::string csv = csv_of({r, q});
  EXPECT_EQ(count(csv, "\n"), 3u);
  std::istringstream is(csv);
  const auto back = read_records_csv(is);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_TRUE(same_except_time(back[0], r));
  EXPECT_EQ(back[0].wallTimeNanos, r.wallTimeNanos);
  EXPECT_TRUE(same_except_time(back[1], q));
  EXPECT_EQ(format_double(0.1 + 0.2), "0.30000000000000004");
}

TEST(Records, RejectsMalformedInput)
{
  std::istringstream bad_header("a,b\n");
  EXPECT_THROW(read_records_csv(bad_header), Error);
  std::istringstream bad_field(std::string(kCsvHeader) + "\nid,2,2,x,CG,1,0,0,0,,0,ok\n");
  try {
    read_records_csv(bad_field);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IoError);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Records, JsonMirrorsFields)
{
  std::ostringstream os;
  write_records_json(os, {record("p", SolverKind::SM, 1e-3)});
  const std::string s = os.str();
  for (const char* key : {"problem_id", "m", "n", "kappa", "solver", "iterations", "rel_error", "eta_bar", "estimate",
                          "residual_gap", "wall_time_ns", "status"})
    EXPECT_NE(s.find(std::string("\"") + key + "\""), std::string::npos) << key;
}

TEST(Profile, SingleSolverIsSuccessRate)
{
  const auto curves = performance_profile({record("a", SolverKind::CG, 1e-8), record("b", SolverKind::CG, 0.5),
                                           record("c", SolverKind::CG, 1e-3), record("d", SolverKind::CG, 1e-12)});
  ASSERT_EQ(curves.size(), 1u);
  for (const auto& [tau, frac] : curves[0].points) EXPECT_DOUBLE_EQ(frac, 0.75) << tau;
}

TEST(Profile, TwoSolversRatio)
{
  const auto curves =
      performance_profile({record("p", SolverKind::CG, 1e-8), record("p", SolverKind::CGLSI, 1e-10)});
  ASSERT_EQ(curves.size(), 2u);
  const ProfileCurve& cg = curves[0];
  const ProfileCurve& cgi = curves[1];
  EXPECT_EQ(cgi.solver, SolverKind::CGLSI);
  EXPECT_EQ(fraction_at(cgi, 1.0), 1.0);
  EXPECT_EQ(fraction_at(cg, std::pow(10.0, 1.9)), 0.0);
  EXPECT_EQ(fraction_at(cg, 100.0), 1.0);
}

TEST(Profile, FailedSolverStaysBelowOne)
{
  const auto curves = performance_profile({record("p", SolverKind::CG, 0.5), record("p", SolverKind::CGLSI, 1e-10),
                                           record("p", SolverKind::MINRES, 1e-9), record("q", SolverKind::CG, 1e-6),
                                           record("q", SolverKind::CGLSI, 1e-6), record("q", SolverKind::MINRES, 1e-6)});
  for (const ProfileCurve& c : curves) {
    double prev = 0;
    for (const auto& [tau, frac] : c.points) {
      EXPECT_GE(frac, prev);
      prev = frac;
    }
    if (c.solver == SolverKind::CG) EXPECT_EQ(prev, 0.5);
  }
}

TEST(Profile, EmptyInputThrows)
{
  try {
    performance_profile({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyInput);
  }
}

TEST(Profile, SvgStructure)
{
  std::ostringstream one;
  write_profile_svg(one, performance_profile({record("p", SolverKind::CG, 1e-8)}));
  EXPECT_EQ(count(one.str(), "<polyline"), 1u);

  std::vector<BenchRecord> recs;
  for (SolverKind s : {SolverKind::CG, SolverKind::CGLSI, SolverKind::CGLSEPS, SolverKind::MINRES})
    recs.push_back(record("p", s, 1e-8 * (1 + static_cast<int>(s))));
  std::ostringstream four;
  write_profile_svg(four, performance_profile(recs));
  const std::string svg = four.str();
  EXPECT_EQ(count(svg, "<polyline"), 4u);
  const auto legend = svg.substr(svg.find("class=\"legend\""));
  for (const char* name : {">CG<", ">CGLSI<", ">CGLSEPS<", ">MINRES<"}) EXPECT_EQ(count(legend, name), 1u) << name;
  EXPECT_EQ(svg.rfind("</svg>\n"), svg.size() - 7);
}

TEST(Table, MissingConfigurations)
{
  try {
    report_table({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingConfiguration);
  }
  EXPECT_THROW(report_table({record("table:a=2/alpha=1e-10", SolverKind::CG, 1e-6)}), Error);
}

TEST(Table, LayoutAndDominance)
{
  ExperimentConfig cfg = parse_config(R"({"families": [{"set": "table"}], "solvers": ["CG", "CGLSI", "CGLSEPS"]})");
  const auto recs = run_suite(cfg);
  const std::string text = report_table(recs);
  EXPECT_EQ(count(text, "\n"), 12u);
  EXPECT_NE(text.find("a=1.3/alpha=1e-4"), std::string::npos);
  for (const BenchRecord& r : recs) EXPECT_GE(r.estimate, r.relError) << r.problemId << " " << to_string(r.solver);
}

TEST(Trace, IdentityConvergesInOneStep)
{
  QlsProblem p;
  p.A = MatrixXd::Identity(2, 2);
  p.b = VectorXd::Ones(2);
  p.c = VectorXd::Constant(2, 0.25);
  p.x_exact = p.b + p.c;
  const auto gap = trace_residual_gap(p);
  ASSERT_EQ(gap.size(), 1u);
  EXPECT_LE(gap[0], 10 * u);
}

TEST(Trace, GapStaysAtRoundoffLevel)
{
  FamilySpec s;
  s.family = Family::C1;
  s.param1 = 0.5;
  const QlsProblem p = make_family_problem(s);
  const auto gap = trace_residual_gap(p);
  const auto out = cgls_i(p);
  EXPECT_EQ(gap.size(), static_cast<std::size_t>(out.iterations));
  for (double g : gap) EXPECT_LE(g, 100 * u);
}

TEST(Trace, NeedsExactSolution)
{
  QlsProblem p;
  p.A = MatrixXd::Identity(2, 2);
  p.b = VectorXd::Ones(2);
  p.c = VectorXd::Zero(2);
  EXPECT_THROW(trace_residual_gap(p), Error);
}
