// Pointwise and integral Harnack/entropy quantities for the conjugate heat
// equation under Ricci flow and their linear (static-metric) counterparts:
// the v_H sign check, the localized entropy and its dissipation identity,
// the conjugate-evolution residual, Li-Yau and linear-entropy quantities,
// gradient-estimate and mean-value bounds, small-tau limits, the weighted
// Li-Yau monotonicity series, and the representation identity that sharpens
// v_H <= 0.
#pragma once

#include "lyh/fields.hpp"
#include "lyh/heat.hpp"
#include "lyh/report.hpp"

namespace lyh {

struct PotentialField {
  Field f;     // -log u - (n/2) log(4 pi tau)
  double tau;
  std::vector<uint8_t> masked;
  int masked_cells = 0;
};

PotentialField potential_f(const Field& u, double tau, int n);

// v_H = [tau (2 lap f - |grad f|^2 + R) + f - n] u per cell of a conjugate
// history node.  Fails when more than half the cells are masked.
Field v_H_values(const FieldHistory& u, int node);
HarnackReport v_H_field(const FieldHistory& u, int node, double tol);

// Localized entropy W_h = integral v_H h dmu at the node nearest tau.
double entropy_W_h(const FieldHistory& u, const FieldHistory& h, double tau);

// Dissipation D(tau) = 2 tau * integral |Ric + Hess f - g/(2 tau)|^2 u h dmu;
// the entropy identity is d W_h / d tau = -D(tau).
double dissipation(const FieldHistory& u, const FieldHistory& h, double tau);

// h-weighted L1 norm of (d/dtau - lap + R) v_u + 2 tau |Ric + Hess f -
// g/(2tau)|^2 u at an interior node (3-point time differencing).
double conjugate_evolution_residual(const FieldHistory& u, int node,
                                    const FieldHistory& h);

// Li-Yau quantity Q = u (lap log u + n/(2t)) with t the age of the node;
// requires a static nonneg-Ricci background.  upsilon = Hess u + (u/2t) g -
// grad u grad u / u in frame components (h11,h12,h22 layout of GeomLog).
struct LiYauResult {
  HarnackReport report;     // Q >= 0 scan
  Field upsilon11, upsilon12, upsilon22;
};
LiYauResult li_yau_Q(const FieldHistory& u, int node, double tol);

// Linear entropy quantity W = t(2 lap f - |grad f|^2) + f - n (age t);
// advisory unless u approximates a fundamental solution.
HarnackReport linear_W(const FieldHistory& u, int node, double tol);

// Lemma-2-style explicit gradient estimate at measured curvature bounds.
struct GradientEstimateReport {
  double margin_explicit = 0.0;   // min over cells/nodes of RHS - LHS
  double margin_packaged = 0.0;   // same for the packaged corollary form
  int violations_explicit = 0;    // cells with margin < -tol
  double A = 0.0;                 // sup of u over the checked range
  std::vector<double> taus;
  double tol = 0.0;
  bool pass = false;
};
GradientEstimateReport gradient_estimate_check(const FieldHistory& u, double k1,
                                               double k2, double tau_lo,
                                               double tau_hi, double tol);

// Empirical constant of the mean-value claim: sup tau^{n/2} u / mass.
struct MeanValueReport {
  double B_emp = 0.0;
  double arg_tau = 0.0;
  int arg_cell = 0;
};
MeanValueReport mean_value_bound_check(const FieldHistory& u, double tau_lo,
                                       double tau_hi);

// Smallest empirical C(delta) for the fixed-metric kernel derivative bounds,
// per tau node, plus a no-blow-up trend flag as tau -> 0.
struct KernelGradientReport {
  std::vector<double> taus;
  std::vector<double> C_grad;   // |grad H|^2/H bound constant
  std::vector<double> C_lap;    // lap H + |grad H|^2/H bound constant
  double C_grad_max = 0.0;
  double C_lap_max = 0.0;
  bool bounded_trend = false;   // constants do not grow as tau halves
};
KernelGradientReport kernel_gradient_checks(const FieldHistory& H, double delta,
                                            double tau_lo, double tau_hi);

// Small-tau limits of the synthesis: (a) integral (d0^2/4tau) H h -> (n/2)
// h(x,T); (b) integral (f - n/2) H h; (c) W_h; (d) II = -2 tau int u lap h
// and III = tau int R u h.
struct SmallTimeLimits {
  LimitReport moment;   // (a)
  LimitReport f_mean;   // (b)
  LimitReport entropy;  // (c)
  LimitReport term_II;  // (d)
  LimitReport term_III; // (d)
  double h_at_center = 0.0;  // h(x, T)
};
SmallTimeLimits small_time_limits(const FieldHistory& H, const FieldHistory& h,
                                  const std::vector<double>& tau_schedule);

// Weighted Li-Yau series t -> integral t^2 Q Hhat dmu against the pseudo
// backward kernel centered (x0, t0); companion carries the identity RHS
// 2 t^2 int (|Hess log u + g/2t|^2 + Ric(grad log u, grad log u)) u Hhat.
MonotonicityCurve prop7_monotonicity_series(const FieldHistory& u, Vec2 x0,
                                            double t0,
                                            const std::vector<double>& ts);

// Lower bound of the sharpened Li-Yau estimate at (x0, t0): the curve's RHS
// integrated over (0, t0] versus t0^2 Q(x0, t0).
struct Prop7PointBound {
  double lhs = 0.0;  // u lap log u + (n/2t) u at (x0, t0)
  double rhs = 0.0;  // (2/t0^2) int_0^{t0} t^2 (...) dt
};
Prop7PointBound prop7_point_bound(const FieldHistory& u, Vec2 x0, double t0,
                                  const std::vector<double>& ts);

// Representation identity: v_H(x0,t0) against
// -2 int_{t0}^{T} (T-t) int |Ric + Hess f - g/(2(T-t))|^2 H h dmu dt.
struct RepresentationResult {
  double direct = 0.0;
  double integral = 0.0;
  double rel_gap = 0.0;
};
RepresentationResult vH_representation_check(const FieldHistory& H,
                                             const FieldHistory& h_fund,
                                             int cell0, double t0);

// Leading-order parametrix ratio (4 pi tau)^{n/2} e^{d0^2/4tau} H -> 1 at
// y = x (d0 = 0) or at the cell displaced by (fixed_d, 0) from the center.
LimitReport parametrix_leading_order_check(const FieldHistory& H,
                                           const std::vector<double>& taus,
                                           double fixed_d = 0.0);

}  // namespace lyh
