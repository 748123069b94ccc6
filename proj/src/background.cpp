#include "lyh/background.hpp"

#include <cmath>
#include <stdexcept>

namespace lyh {

std::string kind_name(Kind k) {
  switch (k) {
    case Kind::euclidean_static: return "euclidean_static";
    case Kind::flat_torus_static: return "flat_torus_static";
    case Kind::shrinking_sphere: return "shrinking_sphere";
    case Kind::conformal_torus_flow: return "conformal_torus_flow";
  }
  return "?";
}

Kind kind_from_name(const std::string& s) {
  if (s == "euclidean_static") return Kind::euclidean_static;
  if (s == "flat_torus_static") return Kind::flat_torus_static;
  if (s == "shrinking_sphere") return Kind::shrinking_sphere;
  if (s == "conformal_torus_flow") return Kind::conformal_torus_flow;
  throw std::invalid_argument("unknown background kind: " + s);
}

void BackgroundSpec::validate() const {
  if (n < 1) throw std::invalid_argument("dimension must be >= 1");
  if (horizon <= 0) throw std::invalid_argument("horizon must be positive");
  if (is_grid_kind()) {
    if (lx <= 0 || ly <= 0) throw std::invalid_argument("torus sides must be positive");
    if (res < 4) throw std::invalid_argument("grid resolution too small");
    if (n != 2) throw std::invalid_argument("grid kinds are implemented for n = 2");
  }
  if (kind == Kind::shrinking_sphere) {
    if (rho0 <= 0) throw std::invalid_argument("sphere radius must be positive");
    if (n < 2) throw std::invalid_argument("sphere dimension must be >= 2");
    if (horizon >= rho0 * rho0 / (2.0 * (n - 1)))
      throw std::invalid_argument("horizon too large: sphere degenerates before T");
  }
  if (kind == Kind::conformal_torus_flow) {
    if ((int)phi0.size() != res * res)
      throw std::invalid_argument("phi0 field does not match the grid resolution");
    for (double v : phi0)
      if (!std::isfinite(v)) throw std::invalid_argument("phi0 must be finite");
  }
}

BackgroundSpec BackgroundSpec::euclidean(int res, double side, double T) {
  BackgroundSpec s;
  s.kind = Kind::euclidean_static;
  s.res = res;
  s.lx = s.ly = side;
  s.horizon = T;
  s.validate();
  return s;
}

BackgroundSpec BackgroundSpec::torus(int res, double lx, double ly, double T) {
  BackgroundSpec s;
  s.kind = Kind::flat_torus_static;
  s.res = res;
  s.lx = lx;
  s.ly = ly;
  s.horizon = T;
  s.validate();
  return s;
}

BackgroundSpec BackgroundSpec::sphere(int n, double rho0, double T, int zonal_res) {
  BackgroundSpec s;
  s.kind = Kind::shrinking_sphere;
  s.n = n;
  s.rho0 = rho0;
  s.horizon = T;
  s.zonal_res = zonal_res;
  s.validate();
  return s;
}

BackgroundSpec BackgroundSpec::conformal(Field phi0, int res, double T, double lx,
                                         double ly) {
  BackgroundSpec s;
  s.kind = Kind::conformal_torus_flow;
  s.res = res;
  s.lx = lx;
  s.ly = ly;
  s.horizon = T;
  s.phi0 = std::move(phi0);
  s.validate();
  return s;
}

double sphere_rho_sq(const BackgroundSpec& spec, double t) {
  return spec.rho0 * spec.rho0 - 2.0 * (spec.n - 1) * t;
}

}  // namespace lyh
