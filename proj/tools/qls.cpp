#include "qls/analysis.hpp"
#include "qls/bench.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace qls;

namespace {

enum Exit { kOk = 0, kConfig = 1, kIo = 2, kNumerical = 3 };

struct Overrides {
  std::optional<double> eps;
  std::optional<double> tol;
  std::optional<long long> maxit;
  std::optional<unsigned long long> seed;
  std::string solvers;
};

void add_overrides(CLI::App* cmd, Overrides& o)
{
  cmd->add_option("--eps", o.eps, "Regularization parameter (rounded to a power of two)");
  cmd->add_option("--tol", o.tol, "Relative tolerance on the recurred residual");
  cmd->add_option("--maxit", o.maxit, "Iteration cap (0 selects 50n)");
  cmd->add_option("--seed", o.seed, "Seed for generated problems");
  cmd->add_option("--solver", o.solvers, "Comma-separated solver names, or 'all'");
}

void apply(const Overrides& o, ExperimentConfig& cfg)
{
  if (o.eps) cfg.eps = *o.eps;
  if (o.tol) {
    if (!(*o.tol > 0)) fail(ErrorKind::ConfigError, "--tol must be positive");
    cfg.tol = *o.tol;
  }
  if (o.maxit) {
    if (*o.maxit < 0) fail(ErrorKind::ConfigError, "--maxit must be nonnegative");
    cfg.maxIterations = static_cast<Index>(*o.maxit);
  }
  if (o.seed) cfg.seed = *o.seed;
  if (!o.solvers.empty()) {
    cfg.solvers.clear();
    if (o.solvers == "all") {
      cfg.solvers = all_solvers();
    } else {
      std::stringstream ss(o.solvers);
      std::string name;
      while (std::getline(ss, name, ','))
        if (!name.empty()) cfg.solvers.push_back(parse_solver(name));
    }
    if (cfg.solvers.empty()) fail(ErrorKind::ConfigError, "--solver: no solver given");
  }
  bool rounded = false;
  if (!(cfg.eps > 0) || !std::isfinite(cfg.eps)) fail(ErrorKind::ConfigError, "eps must be positive");
  cfg.eps = round_to_power_of_two(cfg.eps, &rounded);
  if (rounded) std::cerr << "warning: eps rounded to the power of two " << format_double(cfg.eps) << "\n";
}

ExperimentConfig config_from(const std::string& path, const Overrides& o)
{
  ExperimentConfig cfg = load_config(path);
  apply(o, cfg);
  return cfg;
}

// Writes through `out` if set, else to stdout.
template <typename F>
void with_output(const std::string& out, F&& write)
{
  if (out.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream os(out, std::ios::binary);
  if (!os) fail(ErrorKind::IoError, "cannot open '" + out + "' for writing");
  write(os);
  if (!os) fail(ErrorKind::IoError, "write failed: " + out);
}

std::string file_name_for(const std::string& label)
{
  std::string s;
  for (char ch : label) s += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '.') ? ch : '_';
  return s + ".qls";
}

int exit_code(ErrorKind k)
{
  switch (k) {
    case ErrorKind::ConfigError:
    case ErrorKind::MissingConfiguration:
    case ErrorKind::EmptyInput: return kConfig;
    case ErrorKind::IoError: return kIo;
    default: return kNumerical;
  }
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Quadratic least-squares solvers: problem generation, solving and benchmarking"};
  app.require_subcommand(1);

  std::string config_path, out_path, format = "csv", input_path, solver_name = "CGLSI";
  Overrides ov;

  auto* gen = app.add_subcommand("gen", "Write the problems of a config as problem files");
  gen->add_option("--config", config_path, "Experiment config (JSON)")->required();
  gen->add_option("--out", out_path, "Output directory")->required();
  gen->add_option("--seed", ov.seed, "Seed for generated problems");

  auto* solve = app.add_subcommand("solve", "Solve one problem file with one solver");
  solve->add_option("problem", input_path, "Problem file")->required();
  add_overrides(solve, ov);
  solve->add_option("--out", out_path, "Write x here instead of stdout");

  auto* bench = app.add_subcommand("bench", "Run every solver of a config on every problem");
  bench->add_option("--config", config_path, "Experiment config (JSON)")->required();
  bench->add_option("--out", out_path, "Records file (default: config output, else stdout)");
  bench->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  add_overrides(bench, ov);

  auto* profile = app.add_subcommand("profile", "Performance profile of a records CSV");
  profile->add_option("records", input_path, "Records CSV")->required();
  profile->add_option("--out", out_path, "SVG path; the curve points go next to it as .csv")->required();
  profile->add_option("--solver", ov.solvers, "Restrict to these solvers (comma-separated)");

  auto* table = app.add_subcommand("table", "Error/estimate table from a records CSV");
  table->add_option("records", input_path, "Records CSV")->required();
  table->add_option("--out", out_path, "Output file (default stdout)");

  auto* trace = app.add_subcommand("trace", "CGLSI residual-gap history for each problem of a config");
  trace->add_option("--config", config_path, "Experiment config (JSON)")->required();
  trace->add_option("--out", out_path, "CSV output (default stdout)");
  add_overrides(trace, ov);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*gen) {
      ExperimentConfig cfg = load_config(config_path);
      if (ov.seed) cfg.seed = *ov.seed;
      std::error_code ec;
      std::filesystem::create_directories(out_path, ec);
      if (ec) fail(ErrorKind::IoError, "cannot create '" + out_path + "': " + ec.message());
      for (const QlsProblem& p : build_problems(cfg)) {
        const std::string path = (std::filesystem::path(out_path) / file_name_for(p.label)).string();
        save_problem(path, p);
        std::cout << path << "\n";
      }
      return kOk;
    }

    if (*solve) {
      ExperimentConfig cfg;
      cfg.solvers = {parse_solver(solver_name)};
      apply(ov, cfg);
      if (cfg.solvers.size() != 1) fail(ErrorKind::ConfigError, "solve takes exactly one solver");
      const QlsProblem p = load_problem(input_path);
      const SolverKind s = cfg.solvers.front();
      const SolveResult r = run_solver(s, p, cfg.eps, cfg.control());
      with_output(out_path, [&](std::ostream& os) {
        for (Index i = 0; i < r.x.size(); ++i) os << format_double(r.x(i)) << "\n";
      });
      const ConditioningReport rep = conditioning_report(p, r.x, cfg.eps);
      std::cerr << "solver " << to_string(s) << "\niterations " << r.iterations << "\nkappa " << format_double(rep.kappaA)
                << "\nabs_cond " << format_double(rep.absCond) << "\nrel_cond " << format_double(rep.relCond)
                << "\neta_bar " << format_double(rep.etaBar / rep.dataNorm) << "\n";
      for (const auto& [name, v] : rep.estimates) std::cerr << "estimate_" << name << " " << format_double(v) << "\n";
      if (p.x_exact) std::cerr << "rel_error " << format_double((r.x - *p.x_exact).norm() / p.x_exact->norm()) << "\n";
      if (r.residualGapFinal) std::cerr << "residual_gap " << format_double(*r.residualGapFinal) << "\n";
      return all_finite(r.x) ? kOk : kNumerical;
    }

    if (*bench) {
      const ExperimentConfig cfg = config_from(config_path, ov);
      const auto records = run_suite(cfg);
      const std::string out = out_path.empty() ? cfg.output : out_path;
      with_output(out, [&](std::ostream& os) {
        if (format == "json")
          write_records_json(os, records);
        else
          write_records_csv(os, records);
      });
      const bool any_error = std::any_of(records.begin(), records.end(),
                                         [](const BenchRecord& r) { return r.status == RecordStatus::error; });
      return any_error ? kNumerical : kOk;
    }

    if (*profile) {
      auto records = load_records_csv(input_path);
      if (!ov.solvers.empty()) {
        ExperimentConfig cfg;
        apply(ov, cfg);
        std::erase_if(records, [&](const BenchRecord& r) {
          return std::find(cfg.solvers.begin(), cfg.solvers.end(), r.solver) == cfg.solvers.end();
        });
      }
      emit_profile_svg(performance_profile(records), out_path);
      return kOk;
    }

    if (*table) {
      const std::string text = report_table(load_records_csv(input_path));
      with_output(out_path, [&](std::ostream& os) { os << text; });
      return kOk;
    }

    if (*trace) {
      const ExperimentConfig cfg = config_from(config_path, ov);
      const IterationControl ctrl = cfg.control();
      const auto problems = build_problems(cfg);
      with_output(out_path, [&](std::ostream& os) {
        os << "problem_id,iteration,gap\n";
        for (const QlsProblem& p : problems) {
          const auto gap = trace_residual_gap(p, ctrl);
          for (std::size_t k = 0; k < gap.size(); ++k)
            os << p.label << ',' << (k + 1) << ',' << format_double(gap[k]) << '\n';
        }
      });
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kOk;
}
