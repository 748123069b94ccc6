// Geometry-aware derivative bundles of sampled positive fields.  All
// f-quantities differentiate log u rather than u; the backend is chosen per
// background: trigonometric differentiation where the log is smooth and
// periodic (torus kinds), centered finite differences on the Euclidean patch
// (exact on the log-Gaussian core), zonal finite differences on the sphere.
#pragma once

#include "lyh/flow.hpp"

namespace lyh {

// Per-cell derivative data of w = log u in an orthonormal frame of g(t).
struct GeomLog {
  Field w;         // log u (mask-floored input)
  Field grad_sq;   // |grad w|^2_g
  Field lap;       // lap_g w
  // Orthonormal-frame Hessian of w.  Grid kinds: full symmetric 2x2
  // (h11, h12, h22).  Zonal sphere: h11 = theta-theta component, h22 = the
  // azimuthal component carried with multiplicity mult2 = n-1; h12 = 0.
  Field h11, h12, h22;
  int mult2 = 1;
  bool zonal = false;
};

GeomLog geom_log_derivs(const FlowSolution& flow, const Field& u, double t_abs);

// Laplace-Beltrami of a (not necessarily positive) field.
Field laplace_beltrami(const FlowSolution& flow, const Field& f, double t_abs);

// Ricci curvature in an orthonormal frame: isotropic multiplier per cell
// (R/2 on 2-D grids, (n-1)/rho^2 on the sphere, 0 for flat kinds).
Field ricci_multiplier(const FlowSolution& flow, double t_abs);

// Squared frame norm of (ric g + sign * Hess w + c g): per-cell sum over the
// orthonormal frame of the squared components.  sign = -1 turns the log-u
// Hessian into the Hessian of f = -log u - const.
Field frame_norm_sq(const GeomLog& gl, const Field& ric, double c, double sign = 1.0);

// Discretization scale h_metric of the flow (used by tolerance models):
// grid spacing times min e^phi, or rho_min * h_theta on the sphere.
double metric_resolution(const FlowSolution& flow);

}  // namespace lyh
