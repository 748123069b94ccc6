// Ricci flow solutions on the model backgrounds.  Static metrics are carried
// as flows with zero curvature so that every flow formula specializes to the
// linear case without separate code paths.
#pragma once

#include <memory>

#include "lyh/background.hpp"

namespace lyh {

struct MeasureEvolutionReport {
  double max_residual = 0.0;  // max |d/dt(dmu) + R dmu| / dmu over samples
  int samples = 0;
};

class FlowSolution {
 public:
  BackgroundSpec spec;
  std::vector<double> times;        // strictly increasing, covers [0, T]
  std::vector<Field> phi_nodes;     // conformal factor per node (grid kinds)
  double flow_residual = 0.0;       // declared sup of the discrete flow residual

  const GridShape& grid() const { return grid_; }
  const ZonalShape& zonal() const { return zonal_; }

  // Conformal factor field at arbitrary t (linear interpolation in time).
  Field phi_at(double t) const;
  // e^{2 phi} at a cell; 1 for flat kinds.
  double metric_coeff(int cell, double t) const;
  double rho_sq(double t) const;  // sphere only

  // Scalar curvature field at time t (grid kinds; spatially constant value
  // broadcast for the sphere is available via curvature_at).
  Field scalar_curvature(double t) const;

  // Measure weight of a cell at time t (cell area x e^{2 phi}, or the zonal
  // weight on the sphere).
  double mu_weight(int cell, double t) const;
  // All weights at once.
  Field mu_weights(double t) const;

  int cells() const {
    return spec.is_grid_kind() ? grid_.cells() : zonal_.m;
  }

  void check_time(double t) const;  // throws outside [0, T]

  static FlowSolution make_static(const BackgroundSpec& spec);
  static FlowSolution make_sphere(const BackgroundSpec& spec);

 private:
  GridShape grid_;
  ZonalShape zonal_;
  friend FlowSolution evolve_conformal_flow(const BackgroundSpec&, int, double);
};

using FlowPtr = std::shared_ptr<const FlowSolution>;

// Builds the flow appropriate to the spec's kind.  For the conformal kind the
// step count is derived from the stability constraint.
FlowPtr make_flow(const BackgroundSpec& spec);

// Integrates d phi/dt = e^{-2 phi} lap0 phi by RK4 with trigonometric lap0.
// `steps` must satisfy dt <= cfl * h^2 * min e^{2 phi}; throws on violation
// or blow-up.  Node storage is thinned to ~O(h) spacing.
FlowSolution evolve_conformal_flow(const BackgroundSpec& spec, int steps,
                                   double cfl = 0.2);

// Closed-form shrinking sphere solution.
FlowSolution shrinking_sphere_solution(const BackgroundSpec& spec);

// Max over sampled space-time of |d/dt(dmu) + R dmu| / dmu (centered
// differences between stored nodes).  t_min restricts the sampled window so
// refinement studies compare matching times.
MeasureEvolutionReport check_measure_evolution(const FlowSolution& flow,
                                               double t_min = 0.0);

// --- model_geometries operations -------------------------------------------

MetricSample metric_at(const FlowSolution& flow, double t, int cell);
CurvatureSample curvature_at(const FlowSolution& flow, double t, int cell);

// Smallest grid-measured (k1, k2) with Ric >= -k1 g and max(R, |grad R|^2)
// <= k2 over [t0, t1].
std::pair<double, double> curvature_bounds(const FlowSolution& flow, double t0,
                                           double t1);

// Geodesic distance under g(t).  Closed form for static and sphere kinds;
// Dijkstra on an 8-neighbor grid graph with one coarse-grid Richardson
// refinement step for the conformal kind.
double distance(const FlowSolution& flow, double t, Vec2 x, Vec2 y);

// Distance field from a source point to every cell (same method).
Field distance_field(const FlowSolution& flow, double t, Vec2 source);

// Zonal geodesic distance from the pole: rho(t) * theta.
double sphere_distance_from_pole(const FlowSolution& flow, double t, double theta);

}  // namespace lyh
