// Model backgrounds: declarative description of the four geometries the lab
// runs on, and the closed-form metric/curvature data they carry.
#pragma once

#include <optional>
#include <string>

#include "lyh/grid.hpp"

namespace lyh {

enum class Kind {
  euclidean_static,     // flat R^n sampled on a large periodic patch
  flat_torus_static,    // flat torus, sides (lx, ly)
  shrinking_sphere,     // round S^n with rho(t)^2 = rho0^2 - 2(n-1)t
  conformal_torus_flow  // g = e^{2 phi} delta on the 2-torus, Ricci flow
};

std::string kind_name(Kind k);
Kind kind_from_name(const std::string& s);

struct BackgroundSpec {
  Kind kind = Kind::flat_torus_static;
  int n = 2;             // real dimension
  double lx = 1.0;       // torus sides / patch side
  double ly = 1.0;
  double rho0 = 1.0;     // initial sphere radius
  double horizon = 0.25; // T
  int res = 128;         // grid cells per side (grid kinds)
  int zonal_res = 512;   // polar cells (sphere kind)
  Field phi0;            // initial conformal factor (conformal kind), res x res

  bool is_grid_kind() const {
    return kind != Kind::shrinking_sphere;
  }
  bool is_static() const {
    return kind == Kind::euclidean_static || kind == Kind::flat_torus_static;
  }
  GridShape grid() const { return {res, res, lx, ly}; }
  ZonalShape zonal() const { return {zonal_res, n}; }

  // Throws std::invalid_argument when an invariant fails (n >= 1, positive
  // lengths and horizon, sphere smoothness horizon < rho0^2 / (2(n-1))).
  void validate() const;

  static BackgroundSpec euclidean(int res = 128, double side = 10.0, double T = 0.25);
  static BackgroundSpec torus(int res = 128, double lx = 1.0, double ly = 1.0,
                              double T = 0.25);
  static BackgroundSpec sphere(int n = 2, double rho0 = 1.0, double T = 0.2,
                               int zonal_res = 512);
  static BackgroundSpec conformal(Field phi0, int res, double T = 0.05,
                                  double lx = 1.0, double ly = 1.0);
};

// Sphere scale factor: rho(t)^2 = rho0^2 - 2(n-1) t.
double sphere_rho_sq(const BackgroundSpec& spec, double t);

struct MetricSample {
  double t = 0.0;
  // e^{2 phi} for grid kinds (1 when flat); rho(t)^2 for the sphere.
  double coeff = 1.0;
  double mu_weight = 0.0;  // measure of the sample's cell at time t
};

struct CurvatureSample {
  double R = 0.0;           // scalar curvature
  double ricci_lower = 0.0; // smallest eigenvalue multiplier: Ric >= (this) g
  double grad_R_sq = 0.0;   // |grad R|^2
};

}  // namespace lyh
