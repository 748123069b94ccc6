#include "lyh/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace lyh {

void HarnackReport::finalize() {
  margin = dir == Direction::LessEqZero ? -max_val : min_val;
  pass = margin >= -tol;
}

void extrapolate_limit(LimitReport& rep) {
  const auto& x = rep.schedule;
  const auto& v = rep.value;
  if (x.size() != v.size() || x.size() < 2)
    throw std::invalid_argument("limit extrapolation needs >= 2 schedule points");
  for (size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] < x[i - 1])) throw std::invalid_argument("schedule must decrease");
    const double r = x[i - 1] / x[i];
    if (r < 1.3 || r > 8.0)
      throw std::invalid_argument("schedule must be (roughly) geometric");
  }
  auto extrap = [&](size_t i) {  // eliminate the O(x) term from nodes i-1, i
    return (v[i] * x[i - 1] - v[i - 1] * x[i]) / (x[i - 1] - x[i]);
  };
  const size_t k = x.size() - 1;
  const double e_last = extrap(k);
  rep.limit = e_last;
  if (k >= 2) {
    rep.error = std::abs(e_last - extrap(k - 1));
  } else {
    rep.error = std::abs(e_last - v[k]);
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_header() {
  return "quantity,background,resolution,time,min,max,margin,masked_count,"
         "tolerance,verdict";
}

std::string csv_row(const HarnackReport& r) {
  std::ostringstream os;
  os << r.quantity << ',' << r.background << ',' << r.resolution << ','
     << format_double(r.time) << ',' << format_double(r.min_val) << ','
     << format_double(r.max_val) << ',' << format_double(r.margin) << ','
     << r.masked << ',' << format_double(r.tol) << ','
     << (r.advisory ? "advisory" : (r.pass ? "pass" : "fail"));
  return os.str();
}

void write_curve_csv(std::ostream& os, const MonotonicityCurve& c) {
  os << c.param << ",value,deriv,deriv_err,companion\n";
  for (size_t i = 0; i < c.grid.size(); ++i) {
    os << format_double(c.grid[i]) << ',' << format_double(c.value[i]) << ','
       << format_double(i < c.deriv.size() ? c.deriv[i] : 0.0) << ','
       << format_double(i < c.deriv_err.size() ? c.deriv_err[i] : 0.0) << ','
       << format_double(i < c.companion.size() ? c.companion[i] : 0.0) << '\n';
  }
}

}  // namespace lyh
