#include "qls/bench.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace qls {

namespace {

std::string csv_field(const std::string& s)
{
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line, std::size_t lineno)
{
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (quoted) fail(ErrorKind::IoError, "records line " + std::to_string(lineno) + ": unterminated quote");
  out.push_back(std::move(cur));
  return out;
}

double parse_double(const std::string& s, std::size_t lineno, const char* column)
{
  double v = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && s[0] == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    fail(ErrorKind::IoError, "records line " + std::to_string(lineno) + ": bad " + column + " '" + s + "'");
  return v;
}

std::int64_t parse_int(const std::string& s, std::size_t lineno, const char* column)
{
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    fail(ErrorKind::IoError, "records line " + std::to_string(lineno) + ": bad " + column + " '" + s + "'");
  return v;
}

nlohmann::ordered_json json_number(double v)
{
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double svg_x(double tau) { return 70.0 + 520.0 * std::log10(tau) / 16.0; }
double svg_y(double frac) { return 330.0 - 300.0 * frac; }

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string fixed(double v, int digits)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v)
{
  if (std::isnan(v)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1e", v);
  return buf;
}

}  // namespace

std::string format_double(double v)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_records_csv(std::ostream& os, const std::vector<BenchRecord>& records)
{
  os << kCsvHeader << '\n';
  for (const BenchRecord& r : records) {
    os << csv_field(r.problemId) << ',' << r.m << ',' << r.n << ',' << format_double(r.kappaA) << ','
       << to_string(r.solver) << ',' << r.iterations << ',' << format_double(r.relError) << ','
       << format_double(r.etaBar) << ',' << format_double(r.estimate) << ','
       << (r.residualGapFinal ? format_double(*r.residualGapFinal) : std::string()) << ',' << r.wallTimeNanos << ','
       << to_string(r.status) << '\n';
  }
}

void write_records_json(std::ostream& os, const std::vector<BenchRecord>& records)
{
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const BenchRecord& r : records) {
    arr.push_back({{"problem_id", r.problemId},
                   {"m", r.m},
                   {"n", r.n},
                   {"kappa", json_number(r.kappaA)},
                   {"solver", to_string(r.solver)},
                   {"iterations", r.iterations},
                   {"rel_error", json_number(r.relError)},
                   {"eta_bar", json_number(r.etaBar)},
                   {"estimate", json_number(r.estimate)},
                   {"residual_gap", r.residualGapFinal ? json_number(*r.residualGapFinal) : nlohmann::ordered_json()},
                   {"wall_time_ns", r.wallTimeNanos},
                   {"status", to_string(r.status)}});
  }
  os << arr.dump(2) << '\n';
}

std::vector<BenchRecord> read_records_csv(std::istream& is)
{
  std::string line;
  if (!std::getline(is, line)) fail(ErrorKind::IoError, "records: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) fail(ErrorKind::IoError, "records line 1: unexpected header");
  std::vector<BenchRecord> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line, lineno);
    if (f.size() != 12) fail(ErrorKind::IoError, "records line " + std::to_string(lineno) + ": expected 12 fields");
    BenchRecord r;
    r.problemId = f[0];
    r.m = parse_int(f[1], lineno, "m");
    r.n = parse_int(f[2], lineno, "n");
    r.kappaA = parse_double(f[3], lineno, "kappa");
    try {
      r.solver = parse_solver(f[4]);
      r.status = parse_status(f[11]);
    } catch (const Error& e) {
      fail(ErrorKind::IoError, "records line " + std::to_string(lineno) + ": " + e.what());
    }
    r.iterations = parse_int(f[5], lineno, "iterations");
    r.relError = parse_double(f[6], lineno, "rel_error");
    r.etaBar = parse_double(f[7], lineno, "eta_bar");
    r.estimate = parse_double(f[8], lineno, "estimate");
    if (!f[9].empty()) r.residualGapFinal = parse_double(f[9], lineno, "residual_gap");
    r.wallTimeNanos = parse_int(f[10], lineno, "wall_time_ns");
    out.push_back(std::move(r));
  }
  return out;
}

void emit_records(const std::vector<BenchRecord>& records, const std::string& path, RecordFormat format)
{
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorKind::IoError, "cannot open '" + path + "' for writing");
  if (format == RecordFormat::Csv)
    write_records_csv(os, records);
  else
    write_records_json(os, records);
  if (!os) fail(ErrorKind::IoError, "write failed: " + path);
}

std::vector<BenchRecord> load_records_csv(const std::string& path)
{
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::IoError, "cannot open '" + path + "'");
  return read_records_csv(is);
}

std::vector<double> profile_grid()
{
  std::vector<double> tau;
  for (int k = 0; k <= 160; ++k) tau.push_back(std::pow(10.0, k / 10.0));
  return tau;
}

std::vector<ProfileCurve> performance_profile(const std::vector<BenchRecord>& records)
{
  if (records.empty()) fail(ErrorKind::EmptyInput, "performance_profile: no records");
  const double floor = unit_roundoff();
  std::set<SolverKind> solvers;
  std::map<std::string, std::map<SolverKind, double>> ratio;
  for (const BenchRecord& r : records) {
    solvers.insert(r.solver);
    ratio[r.problemId][r.solver] = r.status == RecordStatus::ok ? std::max(r.relError, floor) : INFINITY;
  }
  for (auto& [id, by_solver] : ratio) {
    double best = INFINITY;
    for (const auto& [s, e] : by_solver) best = std::min(best, e);
    for (auto& [s, e] : by_solver) e = std::isfinite(best) ? e / best : INFINITY;
  }
  const std::vector<double> grid = profile_grid();
  const double count = static_cast<double>(ratio.size());
  std::vector<ProfileCurve> curves;
  for (SolverKind s : solvers) {
    ProfileCurve c;
    c.solver = s;
    for (double tau : grid) {
      std::size_t hits = 0;
      for (const auto& [id, by_solver] : ratio) {
        const auto it = by_solver.find(s);
        if (it != by_solver.end() && it->second <= tau * (1 + 1e-12)) ++hits;
      }
      c.points.emplace_back(tau, static_cast<double>(hits) / count);
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

void write_profile_csv(std::ostream& os, const std::vector<ProfileCurve>& curves)
{
  os << "solver,tau,fraction\n";
  for (const ProfileCurve& c : curves)
    for (const auto& [tau, frac] : c.points)
      os << to_string(c.solver) << ',' << format_double(tau) << ',' << format_double(frac) << '\n';
}

void write_profile_svg(std::ostream& os, const std::vector<ProfileCurve>& curves)
{
  if (curves.empty()) fail(ErrorKind::EmptyInput, "profile svg: no curves");
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"760\" height=\"380\" viewBox=\"0 0 760 380\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"760\" height=\"380\" fill=\"white\"/>\n"
     << "<g stroke=\"#999\" stroke-width=\"0.5\">\n";
  for (int d = 0; d <= 16; d += 2) {
    const std::string x = fixed(svg_x(std::pow(10.0, d)), 1);
    os << "<line x1=\"" << x << "\" y1=\"30\" x2=\"" << x << "\" y2=\"330\"/>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const std::string y = fixed(svg_y(k / 4.0), 1);
    os << "<line x1=\"70\" y1=\"" << y << "\" x2=\"590\" y2=\"" << y << "\"/>\n";
  }
  os << "</g>\n<g text-anchor=\"middle\">\n";
  for (int d = 0; d <= 16; d += 2)
    os << "<text x=\"" << fixed(svg_x(std::pow(10.0, d)), 1) << "\" y=\"348\">1e" << d << "</text>\n";
  os << "<text x=\"330\" y=\"370\">tau</text>\n</g>\n<g text-anchor=\"end\">\n";
  for (int k = 0; k <= 4; ++k)
    os << "<text x=\"64\" y=\"" << fixed(svg_y(k / 4.0) + 4, 1) << "\">" << fixed(k / 4.0, 2) << "</text>\n";
  os << "</g>\n";

  for (std::size_t i = 0; i < curves.size(); ++i) {
    const ProfileCurve& c = curves[i];
    const char* color = kColors[i % std::size(kColors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    double prev = -1;
    for (const auto& [tau, frac] : c.points) {
      const std::string x = fixed(svg_x(tau), 2);
      if (prev >= 0 && frac != prev) os << x << ',' << fixed(svg_y(prev), 2) << ' ';
      os << x << ',' << fixed(svg_y(frac), 2) << ' ';
      prev = frac;
    }
    os << "\"/>\n";
  }

  os << "<g class=\"legend\">\n";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const double y = 44.0 + 18.0 * static_cast<double>(i);
    os << "<line x1=\"606\" y1=\"" << fixed(y, 1) << "\" x2=\"630\" y2=\"" << fixed(y, 1) << "\" stroke=\""
       << kColors[i % std::size(kColors)] << "\" stroke-width=\"2\"/>"
       << "<text x=\"636\" y=\"" << fixed(y + 4, 1) << "\">" << to_string(curves[i].solver) << "</text>\n";
  }
  os << "</g>\n</svg>\n";
}

void emit_profile_svg(const std::vector<ProfileCurve>& curves, const std::string& path)
{
  std::filesystem::path csv_path(path);
  csv_path.replace_extension(".csv");
  if (csv_path == std::filesystem::path(path)) csv_path += ".points.csv";
  {
    std::ofstream os(path, std::ios::binary);
    if (!os) fail(ErrorKind::IoError, "cannot open '" + path + "' for writing");
    write_profile_svg(os, curves);
    if (!os) fail(ErrorKind::IoError, "write failed: " + path);
  }
  std::ofstream os(csv_path, std::ios::binary);
  if (!os) fail(ErrorKind::IoError, "cannot open '" + csv_path.string() + "' for writing");
  write_profile_csv(os, curves);
  if (!os) fail(ErrorKind::IoError, "write failed: " + csv_path.string());
}

std::string report_table(const std::vector<BenchRecord>& records)
{
  if (records.empty()) fail(ErrorKind::MissingConfiguration, "report_table: no records");
  std::map<std::pair<std::string, SolverKind>, const BenchRecord*> index;
  for (const BenchRecord& r : records) index[{r.problemId, r.solver}] = &r;
  const auto find = [&](const std::string& id, SolverKind s) -> const BenchRecord& {
    const auto it = index.find({"table:" + id, s});
    if (it == index.end())
      fail(ErrorKind::MissingConfiguration, "report_table: no " + std::string(to_string(s)) + " record for " + id);
    return *it->second;
  };

  char line[256];
  std::ostringstream os;
  std::snprintf(line, sizeof line, "%-28s %9s %11s | %9s %9s | %9s %9s | %9s %9s\n", "configuration", "kappa(A)",
                "kappa^2*eta", "E_CG", "Est_CG", "E_CGLSI", "Est_CGLSI", "E_CGLSe", "Est_CGLSe");
  os << line << std::string(124, '-') << '\n';
  for (const TableConfig& cfg : table_configs()) {
    const BenchRecord& cg = find(cfg.id, SolverKind::CG);
    const BenchRecord& ci = find(cfg.id, SolverKind::CGLSI);
    const BenchRecord& ce = find(cfg.id, SolverKind::CGLSEPS);
    const double k = ci.kappaA;
    std::snprintf(line, sizeof line, "%-28s %9s %11s | %9s %9s | %9s %9s | %9s %9s\n", cfg.id.c_str(),
                  sci(k).c_str(), sci(k * k * ci.etaBar).c_str(), sci(cg.relError).c_str(), sci(cg.estimate).c_str(),
                  sci(ci.relError).c_str(), sci(ci.estimate).c_str(), sci(ce.relError).c_str(),
                  sci(ce.estimate).c_str());
    os << line;
  }
  return os.str();
}

}  // namespace qls
