#pragma once

// Per-iteration solver records and their CSV serialization. The CSV output is
// byte-deterministic: doubles are printed with %.17g, non-values as "nan", and
// timings stay zero unless explicitly collected.

#include <filesystem>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace bilyap {

enum class SolveStatus {
  converged,      // stopping tolerance met
  max_dimension,  // subspace budget exhausted
  max_iterations, // iteration budget exhausted
  stagnated,      // no further progress at the achievable accuracy
  diverged,       // residual grew persistently
  degenerate,     // the method hit a structural dead end (rank loss, ...)
};

std::string to_string(SolveStatus status);

inline double report_nan() { return std::numeric_limits<double>::quiet_NaN(); }

struct SolveRecord {
  int dim = 0;                     // subspace dimension (or iteration index)
  double rel_residual = report_nan();
  double rel_error = report_nan(); // vs an oracle solution; nan when unknown
  double shift_re = report_nan();  // expansion shift that produced this step
  double shift_im = report_nan();
  int kept = 0;                    // basis columns the step actually added
  double millis = 0.0;             // wall time; 0 unless timing was requested
};

struct SolveReport {
  std::string method;
  SolveStatus status = SolveStatus::converged;
  int iterations = 0;  // method-specific count (sweeps, cycles, steps)
  std::vector<SolveRecord> records;

  // detail=false: dim,rel_residual,rel_error,millis
  // detail=true:  dim,rel_residual,rel_error,shift_re,shift_im,kept,millis
  void write_csv(std::ostream& out, bool detail = false) const;
  void write_csv(const std::filesystem::path& path, bool detail = false) const;
};

}  // namespace bilyap
