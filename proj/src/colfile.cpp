#include "lyh/colfile.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "lyh/report.hpp"

namespace lyh {

namespace {

constexpr const char* kMagic = "lyhlab-columns";
constexpr int kVersion = 1;

void write_spec(std::ostream& os, const BackgroundSpec& s) {
  os << "kind " << kind_name(s.kind) << '\n';
  os << "n " << s.n << '\n';
  os << "res " << s.res << '\n';
  os << "zonal_res " << s.zonal_res << '\n';
  os << "sides " << format_double(s.lx) << ' ' << format_double(s.ly) << '\n';
  os << "rho0 " << format_double(s.rho0) << '\n';
  os << "horizon " << format_double(s.horizon) << '\n';
}

std::string expect_key(std::istream& is, const std::string& key) {
  std::string k;
  if (!(is >> k) || k != key)
    throw std::runtime_error("column file: expected key '" + key + "', got '" + k + "'");
  std::string rest;
  std::getline(is, rest);
  if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
  return rest;
}

BackgroundSpec read_spec(std::istream& is) {
  BackgroundSpec s;
  s.kind = kind_from_name(expect_key(is, "kind"));
  s.n = std::stoi(expect_key(is, "n"));
  s.res = std::stoi(expect_key(is, "res"));
  s.zonal_res = std::stoi(expect_key(is, "zonal_res"));
  {
    std::istringstream ls(expect_key(is, "sides"));
    ls >> s.lx >> s.ly;
  }
  s.rho0 = std::stod(expect_key(is, "rho0"));
  s.horizon = std::stod(expect_key(is, "horizon"));
  return s;
}

void write_fields(std::ostream& os, const std::vector<Field>& fields) {
  for (size_t k = 0; k < fields.size(); ++k) {
    os << "field " << k << ' ' << fields[k].size() << '\n';
    for (double v : fields[k]) os << format_double(v) << '\n';
  }
}

std::vector<Field> read_fields(std::istream& is, size_t count) {
  std::vector<Field> out(count);
  for (size_t k = 0; k < count; ++k) {
    std::string key;
    size_t idx, cells;
    if (!(is >> key >> idx >> cells) || key != "field" || idx != k)
      throw std::runtime_error("column file: bad field block");
    out[k].resize(cells);
    for (size_t c = 0; c < cells; ++c)
      if (!(is >> out[k][c])) throw std::runtime_error("column file: short field");
  }
  return out;
}

void write_times(std::ostream& os, const std::vector<double>& ts) {
  os << "nodes " << ts.size() << '\n';
  os << "t";
  for (double t : ts) os << ' ' << format_double(t);
  os << '\n';
}

std::vector<double> read_times(std::istream& is) {
  const size_t n = std::stoul(expect_key(is, "nodes"));
  std::string key;
  is >> key;
  if (key != "t") throw std::runtime_error("column file: expected time row");
  std::vector<double> ts(n);
  for (size_t k = 0; k < n; ++k)
    if (!(is >> ts[k])) throw std::runtime_error("column file: short time row");
  return ts;
}

void check_header(std::istream& is) {
  std::string magic;
  int ver;
  if (!(is >> magic >> ver) || magic != kMagic)
    throw std::runtime_error("not a lyhlab column file");
  if (ver != kVersion) throw std::runtime_error("unsupported column file version");
}

}  // namespace

void write_flow(std::ostream& os, const FlowSolution& flow) {
  os << kMagic << ' ' << kVersion << "\nobject flow\n";
  write_spec(os, flow.spec);
  os << "flow_residual " << format_double(flow.flow_residual) << '\n';
  write_times(os, flow.times);
  os << "phi_nodes " << flow.phi_nodes.size() << '\n';
  write_fields(os, flow.phi_nodes);
  os << "end\n";
}

FlowSolution read_flow(std::istream& is) {
  check_header(is);
  if (expect_key(is, "object") != "flow")
    throw std::runtime_error("column file does not hold a flow");
  BackgroundSpec spec = read_spec(is);
  const double resid = std::stod(expect_key(is, "flow_residual"));
  std::vector<double> times = read_times(is);
  const size_t n_phi = std::stoul(expect_key(is, "phi_nodes"));
  std::vector<Field> phis = read_fields(is, n_phi);

  FlowSolution out = spec.kind == Kind::shrinking_sphere
                         ? FlowSolution::make_sphere(spec)
                         : FlowSolution::make_static([&] {
                             BackgroundSpec s = spec;
                             if (s.kind == Kind::conformal_torus_flow)
                               s.kind = Kind::flat_torus_static;
                             return s;
                           }());
  out.spec = spec;
  out.times = std::move(times);
  out.phi_nodes = std::move(phis);
  out.flow_residual = resid;
  if (spec.kind == Kind::conformal_torus_flow && !out.phi_nodes.empty())
    out.spec.phi0 = out.phi_nodes.front();
  if (expect_key(is, "end").empty() && is) return out;
  return out;
}

void write_history(std::ostream& os, const FieldHistory& h) {
  os << kMagic << ' ' << kVersion << "\nobject history\n";
  write_spec(os, h.flow->spec);
  os << "direction "
     << (h.dir == TimeDirection::conjugate_tau ? "conjugate" : "forward") << '\n';
  os << "center " << (h.has_center ? 1 : 0) << ' ' << format_double(h.center.x)
     << ' ' << format_double(h.center.y) << ' ' << format_double(h.t_center) << '\n';
  os << "t_init " << format_double(h.t_init) << '\n';
  os << "width_error " << format_double(h.width_error) << '\n';
  write_times(os, h.times);
  write_fields(os, h.values);
  os << "end\n";
}

FieldHistory read_history(std::istream& is, FlowPtr flow) {
  check_header(is);
  if (expect_key(is, "object") != "history")
    throw std::runtime_error("column file does not hold a history");
  const BackgroundSpec spec = read_spec(is);
  if (kind_name(spec.kind) != kind_name(flow->spec.kind) || spec.res != flow->spec.res)
    throw std::runtime_error("history/flow background mismatch");
  FieldHistory h;
  h.flow = std::move(flow);
  h.dir = expect_key(is, "direction") == "conjugate" ? TimeDirection::conjugate_tau
                                                     : TimeDirection::forward_t;
  {
    std::istringstream ls(expect_key(is, "center"));
    int has;
    ls >> has >> h.center.x >> h.center.y >> h.t_center;
    h.has_center = has != 0;
  }
  h.t_init = std::stod(expect_key(is, "t_init"));
  h.width_error = std::stod(expect_key(is, "width_error"));
  h.times = read_times(is);
  h.values = read_fields(is, h.times.size());
  h.mass.resize(h.nodes());
  for (int k = 0; k < h.nodes(); ++k)
    h.mass[k] = field_integral(*h.flow, h.values[k], h.t_abs(k));
  return h;
}

void write_flow_file(const std::string& path, const FlowSolution& flow) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_flow(os, flow);
}

FlowSolution read_flow_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  return read_flow(is);
}

void write_history_file(const std::string& path, const FieldHistory& h) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_history(os, h);
}

FieldHistory read_history_file(const std::string& path, FlowPtr flow) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  return read_history(is, std::move(flow));
}

}  // namespace lyh
