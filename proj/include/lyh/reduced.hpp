// Perelman reduced distance: discretized L-length in the sigma = sqrt(s)
// parametrization, path minimization by gradient descent with backtracking,
// per-cell reduced-distance fields, and the bounds/kernel checks built on
// them.  The base point sits at tau = 0 (t = T), matching the conjugate
// kernel's center.
#pragma once

#include "lyh/harnack.hpp"

namespace lyh {

struct LGeodesicPath {
  // sigma nodes ascending from 0 to sqrt(tau); endpoints pinned.
  std::vector<double> sigma;
  std::vector<Vec2> pts;     // grid kinds
  std::vector<double> thetas;  // zonal sphere (polar angle per node)
  double L = 0.0;
  double ell = 0.0;  // L / (2 sqrt(tau))
  bool converged = false;
};

struct MinimizeOptions {
  int segments = 32;
  int max_iters = 400;
  double rel_tol = 1e-10;  // converged when relative decrease stays below
  int patience = 5;        // ... for this many iterations
  int wrap_extent = 2;     // torus initializations span [-k, k]^2 wraps
};

// Quadrature of the L-functional along a fixed path (per-segment Simpson).
double L_length(const FlowSolution& flow, const LGeodesicPath& path);

// Locally minimal path from (x, tau=0) to (y, tau); the best over the
// initialization set is returned, flagged when the iteration cap is hit.
LGeodesicPath minimize_L(const FlowSolution& flow, Vec2 x, Vec2 y, double tau,
                         const MinimizeOptions& opts = {});
// Zonal variant: from the pole to polar angle theta_y.
LGeodesicPath minimize_L_zonal(const FlowSolution& flow, double theta_y,
                               double tau, const MinimizeOptions& opts = {});

struct ReducedDistanceField {
  Field ell;
  Vec2 center;
  double tau = 0.0;
  std::vector<uint8_t> flagged;  // non-converged cells
  int flagged_cells = 0;
};

// ell on every cell at fixed tau; throws when more than 5% of cells flag.
ReducedDistanceField reduced_distance_field(const FlowSolution& flow, Vec2 x,
                                            double tau,
                                            const MinimizeOptions& opts = {});

// Margins of L_bar <= e^{2 k2 tau} d0^2 + (4 k2 n/3) tau^2 and
// d0^2 <= e^{2 k1 tau} (L_bar + (4 k1 n/3) tau^2), L_bar = 4 tau ell.
struct ReducedBoundsReport {
  HarnackReport upper;  // inequality (L_bar vs d0^2 side)
  HarnackReport lower;
};
ReducedBoundsReport bounds_check(const FlowSolution& flow,
                                 const ReducedDistanceField& field, double k1,
                                 double k2, double tol);

// Margin of f <= ell per cell, f from the kernel history node at field.tau.
HarnackReport kernel_lower_bound_check(const FieldHistory& H,
                                       const ReducedDistanceField& field,
                                       double tol);

// Weak-form supersolution pairing of e^{-ell}/(4 pi tau)^{n/2} against a
// suite of smooth nonnegative space-time test functions (all derivatives on
// the test function); each pairing should be <= +tol.
struct WeakFormReport {
  std::vector<double> pairings;
  double max_pairing = 0.0;
};
WeakFormReport supersolution_weak_check(
    const std::vector<ReducedDistanceField>& fields, const FlowSolution& flow,
    int n_tests, unsigned seed);

}  // namespace lyh
