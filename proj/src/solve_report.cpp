#include "bilyap/solve_report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace bilyap {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_dimension: return "max_dimension";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::stagnated: return "stagnated";
    case SolveStatus::diverged: return "diverged";
    case SolveStatus::degenerate: return "degenerate";
  }
  return "unknown";
}

namespace {

// %.17g round-trips doubles exactly; "nan" is pinned to one spelling so the
// output is byte-identical across platforms.
std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

void SolveReport::write_csv(std::ostream& out, bool detail) const {
  if (detail) {
    out << "dim,rel_residual,rel_error,shift_re,shift_im,kept,millis\n";
    for (const SolveRecord& r : records)
      out << r.dim << ',' << fmt(r.rel_residual) << ',' << fmt(r.rel_error) << ','
          << fmt(r.shift_re) << ',' << fmt(r.shift_im) << ',' << r.kept << ',' << fmt(r.millis)
          << '\n';
  } else {
    out << "dim,rel_residual,rel_error,millis\n";
    for (const SolveRecord& r : records)
      out << r.dim << ',' << fmt(r.rel_residual) << ',' << fmt(r.rel_error) << ',' << fmt(r.millis)
          << '\n';
  }
}

void SolveReport::write_csv(const std::filesystem::path& path, bool detail) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path.string());
  write_csv(out, detail);
}

}  // namespace bilyap
