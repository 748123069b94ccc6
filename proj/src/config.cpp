#include "lyh/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "lyh/report.hpp"

namespace lyh {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

}  // namespace

std::uint64_t fnv1a_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void ExperimentConfig::finalize() {
  if (background.kind == Kind::conformal_torus_flow) {
    const GridShape g = background.grid();
    background.phi0.assign(g.cells(), 0.0);
    if (phi0_preset == "cos_x") {
      for (int c = 0; c < g.cells(); ++c)
        background.phi0[c] =
            phi0_amplitude * std::cos(2.0 * M_PI * g.point(c).x / g.lx);
    } else if (phi0_preset == "cos_xy") {
      for (int c = 0; c < g.cells(); ++c) {
        const Vec2 p = g.point(c);
        background.phi0[c] = phi0_amplitude *
                             std::cos(2.0 * M_PI * p.x / g.lx) *
                             std::cos(2.0 * M_PI * p.y / g.ly);
      }
    } else if (phi0_preset != "zero") {
      throw std::invalid_argument("unknown phi0 preset: " + phi0_preset);
    }
  }
  background.validate();

  std::ostringstream compat;
  compat << "kind=" << kind_name(background.kind) << "\nn=" << background.n
         << "\nsides=" << format_double(background.lx) << ' '
         << format_double(background.ly) << "\nrho0=" << format_double(background.rho0)
         << "\nhorizon=" << format_double(background.horizon)
         << "\nphi0=" << phi0_preset << ' ' << format_double(phi0_amplitude)
         << "\nseed=" << seed << "\nsuites=";
  for (const auto& s : suites) compat << s << ' ';
  compat << "\nschedules=";
  for (const auto& [k, v] : schedules) {
    compat << k << ':';
    for (double x : v) compat << format_double(x) << ' ';
    compat << ';';
  }
  if (!inject_fault.empty()) compat << "\nfault=" << inject_fault;
  compat_text = compat.str();

  std::ostringstream canon;
  canon << compat_text << "\nres=" << background.res
        << "\nzonal_res=" << background.zonal_res
        << "\ntol=" << format_double(tol_c1) << ' ' << format_double(tol_c2);
  for (const auto& [k, v] : tol_overrides)
    canon << "\ntol_" << k << '=' << format_double(v);
  canonical_text = canon.str();
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config parse failure at line " +
                                  std::to_string(lineno) + ": missing '='");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    auto num = [&] { return std::stod(val); };

    if (section == "background") {
      if (key == "kind") cfg.background.kind = kind_from_name(val);
      else if (key == "n") cfg.background.n = (int)num();
      else if (key == "sides") {
        auto parts = split_ws(val);
        if (parts.size() != 2) throw std::invalid_argument("sides needs two values");
        cfg.background.lx = std::stod(parts[0]);
        cfg.background.ly = std::stod(parts[1]);
      } else if (key == "rho0") cfg.background.rho0 = num();
      else if (key == "horizon") cfg.background.horizon = num();
      else if (key == "resolution") cfg.background.res = (int)num();
      else if (key == "zonal_resolution") cfg.background.zonal_res = (int)num();
      else if (key == "phi0") cfg.phi0_preset = val;
      else if (key == "phi0_amplitude") cfg.phi0_amplitude = num();
      else throw std::invalid_argument("unknown background key: " + key);
    } else if (section == "run") {
      if (key == "suites") cfg.suites = split_ws(val);
      else if (key == "out") cfg.out_dir = val;
      else if (key == "seed") cfg.seed = std::stoull(val);
      else if (key == "budget_seconds") cfg.budget_seconds = num();
      else if (key == "inject_fault") cfg.inject_fault = val;
      else throw std::invalid_argument("unknown run key: " + key);
    } else if (section == "schedules") {
      std::vector<double> xs;
      for (const auto& tok : split_ws(val)) xs.push_back(std::stod(tok));
      if (xs.empty()) throw std::invalid_argument("empty schedule: " + key);
      cfg.schedules[key] = xs;
    } else if (section == "tolerances") {
      if (key == "c1") cfg.tol_c1 = num();
      else if (key == "c2") cfg.tol_c2 = num();
      else cfg.tol_overrides[key] = num();
    } else {
      throw std::invalid_argument("unknown config section: " + section);
    }
  }
  cfg.finalize();
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read config " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

std::vector<double> schedule_or(const ExperimentConfig& cfg, const std::string& name,
                                std::vector<double> def) {
  auto it = cfg.schedules.find(name);
  return it == cfg.schedules.end() ? def : it->second;
}

}  // namespace lyh
