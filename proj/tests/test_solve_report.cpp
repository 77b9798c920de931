#include <bilyap/solve_report.hpp>

#include <doctest.h>

#include <sstream>

using bilyap::SolveRecord;
using bilyap::SolveReport;
using bilyap::SolveStatus;

TEST_SUITE("solve_report") {

TEST_CASE("status names") {
  CHECK(bilyap::to_string(SolveStatus::converged) == "converged");
  CHECK(bilyap::to_string(SolveStatus::max_dimension) == "max_dimension");
  CHECK(bilyap::to_string(SolveStatus::max_iterations) == "max_iterations");
  CHECK(bilyap::to_string(SolveStatus::stagnated) == "stagnated");
  CHECK(bilyap::to_string(SolveStatus::diverged) == "diverged");
  CHECK(bilyap::to_string(SolveStatus::degenerate) == "degenerate");
}

TEST_CASE("csv output is byte-pinned") {
  SolveReport report;
  report.method = "demo";
  SolveRecord a;
  a.dim = 1;
  a.rel_residual = 0.5;
  a.rel_error = 0.001;
  SolveRecord b;
  b.dim = 3;
  b.rel_residual = 1.25e-9;
  b.shift_re = -2.0;
  b.shift_im = 0.5;
  b.kept = 2;
  report.records = {a, b};

  std::ostringstream basic;
  report.write_csv(basic, false);
  CHECK(basic.str() ==
        "dim,rel_residual,rel_error,millis\n"
        "1,0.5,0.001,0\n"
        "3,1.25e-09,nan,0\n");

  std::ostringstream detail;
  report.write_csv(detail, true);
  CHECK(detail.str() ==
        "dim,rel_residual,rel_error,shift_re,shift_im,kept,millis\n"
        "1,0.5,0.001,nan,nan,0,0\n"
        "3,1.25e-09,nan,-2,0.5,2,0\n");
}

TEST_CASE("doubles survive a csv round trip exactly") {
  SolveReport report;
  SolveRecord r;
  r.dim = 7;
  r.rel_residual = 1.0 / 3.0;
  r.rel_error = 6.02214076e23;
  report.records = {r};
  std::ostringstream out;
  report.write_csv(out, false);
  std::istringstream in(out.str());
  std::string header, line;
  std::getline(in, header);
  std::getline(in, line);
  const auto c1 = line.find(',');
  const auto c2 = line.find(',', c1 + 1);
  const auto c3 = line.find(',', c2 + 1);
  CHECK(std::stod(line.substr(c1 + 1, c2 - c1 - 1)) == 1.0 / 3.0);
  CHECK(std::stod(line.substr(c2 + 1, c3 - c2 - 1)) == 6.02214076e23);
}

}  // TEST_SUITE
