// Closed-form heat kernels used as oracles and as exact field generators:
// the Euclidean Gaussian, its periodization over torus lattice wraps (theta
// sum), and the Legendre-series conjugate-heat kernel on the shrinking
// 2-sphere.
#pragma once

#include "lyh/background.hpp"

namespace lyh {

// One-dimensional periodized Gaussian factor and its first two derivatives
// in d.  L <= 0 disables wrapping (plain Gaussian factor).  Terms are added
// until they fall below 1e-16 of the accumulated value.
struct Kernel1D {
  double k = 0, kd = 0, kdd = 0;
};
Kernel1D theta_factor_1d(double d, double L, double tau);

// Pointwise kernel data at displacement (from -> to) and time tau.
struct KernelPoint {
  double u = 0;        // kernel value
  Vec2 grad_log;       // grad log u
  double lap_log = 0;  // lap log u
  double hxx = 0, hxy = 0, hyy = 0;  // Hessian of log u
};

// Flat 2-D kernel: exact Gaussian (unwrapped) or torus theta product.
// `wrap` selects periodization; sides are taken from `g`.
KernelPoint flat_kernel_point(const GridShape& g, bool wrap, Vec2 from, Vec2 to,
                              double tau);

// Kernel value only (n may differ from 2 for the plain Gaussian).
double gaussian_kernel_value(double dist, double tau, int n);

// Conjugate-heat fundamental solution on the shrinking n=2 sphere, zonal
// about the center pole, as a Legendre series.  Exact unit mass for every
// tau > 0.  rhoT_sq is rho(T)^2; rho~(tau)^2 = rhoT_sq + 2 tau.
Field sphere_conjugate_kernel(const ZonalShape& z, double rhoT_sq, double tau);

// Forward heat kernel on the shrinking sphere centered at the pole at time
// t_center evaluated at time t > t_center (modes decay by the
// time-integrated eigenvalues).
Field sphere_forward_kernel(const ZonalShape& z, const BackgroundSpec& spec,
                            double t_center, double t);

// Legendre polynomial values P_0..P_kmax at x via the three-term recurrence.
void legendre_column(double x, int kmax, std::vector<double>& out);

}  // namespace lyh
