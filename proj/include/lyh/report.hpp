// Result records shared across the verification suites and their CSV/JSON
// serialization (fixed column schema, deterministic formatting).
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lyh/grid.hpp"

namespace lyh {

enum class Direction { LessEqZero, GreaterEqZero };

// Pointwise inequality scan: margin >= 0 means the asserted sign holds on
// every unmasked cell (up to the recorded tolerance).
struct HarnackReport {
  std::string quantity;
  std::string background;
  int resolution = 0;
  double time = 0.0;  // tau or t of the scan
  double min_val = 0.0;
  double max_val = 0.0;
  Direction dir = Direction::LessEqZero;
  double margin = 0.0;  // LessEq: -max_val; GreaterEq: +min_val
  double tol = 0.0;
  int masked = 0;
  bool pass = false;
  bool advisory = false;  // inequality not asserted by theory for this input
  Field values;           // optional per-cell values (may be empty)

  void finalize();  // fills margin and pass from min/max/dir/tol
};

struct MonotonicityCurve {
  std::string quantity;
  std::string param;  // "tau", "t" or "r"
  std::vector<double> grid;
  std::vector<double> value;
  std::vector<double> deriv;      // derivative estimate per node
  std::vector<double> deriv_err;  // step-doubling error bars
  std::vector<double> companion;  // the identity's right-hand side, if any
};

struct LimitReport {
  std::string quantity;
  std::vector<double> schedule;  // parameter values, decreasing toward 0
  std::vector<double> value;
  double limit = 0.0;  // Richardson-extrapolated
  double error = 0.0;  // error bar: spread of the last two extrapolants
};

// Linear-in-parameter Richardson extrapolation on a decreasing schedule.
// Fills limit/error from schedule/value.
void extrapolate_limit(LimitReport& rep);

// CSV rows: quantity,background,resolution,time,min,max,margin,masked_count,
// tolerance,verdict
std::string csv_header();
std::string csv_row(const HarnackReport& r);
void write_curve_csv(std::ostream& os, const MonotonicityCurve& c);

// Deterministic shortest-roundtrip double formatting.
std::string format_double(double v);

}  // namespace lyh
