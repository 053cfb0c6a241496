#include "qls/problems.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace qls {

namespace {

std::string hex(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

void write_block(std::ostream& os, const char* name, const MatrixXd& a)
{
  os << name << '\n' << a.rows() << ' ' << a.cols() << '\n';
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) os << (j ? " " : "") << hex(a(i, j));
    os << '\n';
  }
}

// Next non-empty, non-comment line.
bool next_line(std::istream& is, std::string& line)
{
  while (std::getline(is, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    line = line.substr(first);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    return true;
  }
  return false;
}

double parse_real(const std::string& tok)
{
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') fail(ErrorKind::IoError, "problem file: bad number '" + tok + "'");
  return v;
}

MatrixXd read_block(std::istream& is)
{
  std::string line;
  if (!next_line(is, line)) fail(ErrorKind::IoError, "problem file: missing block header");
  std::istringstream hs(line);
  long long rows = 0, cols = 0;
  if (!(hs >> rows >> cols) || rows < 1 || cols < 1) fail(ErrorKind::IoError, "problem file: bad header '" + line + "'");
  MatrixXd a(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    if (!next_line(is, line)) fail(ErrorKind::IoError, "problem file: truncated block");
    std::istringstream ls(line);
    for (Index j = 0; j < cols; ++j) {
      std::string tok;
      if (!(ls >> tok)) fail(ErrorKind::IoError, "problem file: short row");
      a(i, j) = parse_real(tok);
    }
  }
  return a;
}

}  // namespace

void write_problem(std::ostream& os, const QlsProblem& p)
{
  os << "# qls problem\n";
  os << "label " << p.label << '\n';
  write_block(os, "A", p.A);
  write_block(os, "b", p.b);
  write_block(os, "c", p.c);
  if (p.x_exact) write_block(os, "x", *p.x_exact);
}

QlsProblem read_problem(std::istream& is)
{
  QlsProblem p;
  bool have_a = false, have_b = false, have_c = false;
  std::string line;
  while (next_line(is, line)) {
    if (line.rfind("label", 0) == 0) {
      p.label = line.size() > 6 ? line.substr(6) : "";
    } else if (line == "A") {
      p.A = read_block(is);
      have_a = true;
    } else if (line == "b") {
      p.b = read_block(is).col(0);
      have_b = true;
    } else if (line == "c") {
      p.c = read_block(is).col(0);
      have_c = true;
    } else if (line == "x") {
      p.x_exact = read_block(is).col(0);
    } else {
      fail(ErrorKind::IoError, "problem file: unknown section '" + line + "'");
    }
  }
  if (!have_a || !have_b || !have_c) fail(ErrorKind::IoError, "problem file: A, b and c blocks are required");
  require_size(p.b.size(), p.rows(), "problem file: b length");
  require_size(p.c.size(), p.cols(), "problem file: c length");
  if (p.x_exact) require_size(p.x_exact->size(), p.cols(), "problem file: x length");
  return p;
}

void save_problem(const std::string& path, const QlsProblem& p)
{
  std::ofstream os(path);
  if (!os) fail(ErrorKind::IoError, "cannot open '" + path + "' for writing");
  write_problem(os, p);
  if (!os) fail(ErrorKind::IoError, "write failed: " + path);
}

QlsProblem load_problem(const std::string& path)
{
  std::ifstream is(path);
  if (!is) fail(ErrorKind::IoError, "cannot open '" + path + "'");
  return read_problem(is);
}

}  // namespace qls
