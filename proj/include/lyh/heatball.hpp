// Local monotonicity machinery: pseudo backward heat kernels, heat-ball
// regions E_r = {v >= r^{-n}, t < t0} with sub-cell boundary weights, the
// local quantities P(r) and I(r) = P(r)/r^n, monotonicity curves, and the
// Euclidean caloric constancy check that pins the normalization.
#pragma once

#include <functional>

#include "lyh/harnack.hpp"
#include "lyh/reduced.hpp"

namespace lyh {

enum class KernelMode { distance, reduced, exact_backward };

// Pointwise space-time evaluator of the level-set kernel v centered at
// (x0, t0) on a grid background, with analytic |grad log v|^2 and the
// bracket (d/dt + lap - tr kappa) v where a closed form exists.
class BallKernel {
 public:
  static BallKernel pseudo_distance(FlowPtr flow, Vec2 x0, double t0);
  static BallKernel exact_backward(FlowPtr flow, Vec2 x0, double t0);
  static BallKernel from_reduced(FlowPtr flow, Vec2 x0, double t0,
                                 std::vector<ReducedDistanceField> fields);

  double value(Vec2 y, double t) const;
  double grad_log_sq(Vec2 y, double t) const;  // |grad log v|^2_{g(t)}
  // (d/dt + lap - tr kappa) v; closed form for distance/exact modes on
  // static backgrounds, centered finite differences otherwise.
  double bracket(Vec2 y, double t) const;

  Vec2 x0() const { return x0_; }
  double t0() const { return t0_; }
  KernelMode mode() const { return mode_; }
  const FlowSolution& flow() const { return *flow_; }

 private:
  FlowPtr flow_;
  Vec2 x0_;
  double t0_ = 0.0;
  KernelMode mode_ = KernelMode::distance;
  std::vector<ReducedDistanceField> ell_;  // reduced mode, ascending tau
  double ell_at(Vec2 y, double tau) const;
};

// Space-time quantity evaluator.
using QField = std::function<double(Vec2, double)>;

QField make_const_qfield(double c);
// t^2 Q of the exact flat kernel aged from (center, t_center); Q is the
// Li-Yau quantity of the kernel.
QField make_kernel_liyau_qfield(FlowPtr flow, Vec2 center, double t_center);
// -u W of the exact flat kernel (linear entropy quantity).
QField make_kernel_minus_uW_qfield(FlowPtr flow, Vec2 center, double t_center);
// t^2 Q interpolated from a positive forward history (Q per node cached).
QField make_history_liyau_qfield(const FieldHistory& u);
// Plain interpolation of a history (e.g. a caloric test function).
QField make_history_qfield(const FieldHistory& u);
// Analytic caloric test functions on the Euclidean patch.
QField make_linear_caloric_qfield(double a, Vec2 slope, Vec2 origin);
QField make_gaussian_caloric_qfield(FlowPtr flow, Vec2 source, double t_source);

// One geometric-in-tau slab of the heat-ball quadrature.
struct BallSlab {
  double tau_mid = 0.0;  // t = t0 - tau_mid
  double dtau = 0.0;
  struct Point {
    Vec2 y;
    double w;     // area fraction x cell area x dtau
    double psi;   // psi_r at the cell center (clamped below at 0)
    double glsq;  // |grad psi_r|^2 = |grad log v|^2
  };
  std::vector<Point> points;
};

struct HeatBall {
  double r = 0.0;
  double tau_top = 0.0;  // time extent: t0 - t in (0, tau_top]
  std::vector<BallSlab> slabs;
  double measure = 0.0;        // integral of the weights
  double psi_weight = 0.0;     // integral of |grad psi_r|^2 (Q == 1 -> P(r))
};

struct BallOptions {
  int slab_res = 40;        // spatial lattice per slab side
  double slab_ratio = 0.86; // geometric tau refinement toward the pinch
  double tau_floor_rel = 1e-10;
  double pad = 1.3;         // spatial bounding-box padding
};

// Builds E_r around (x0, t0) with marching-squares spatial weights on
// geometric tau slabs.  Throws when E_r touches the domain's time or space
// limits (radius too large).
HeatBall heat_ball_region(const BallKernel& v, double r,
                          const BallOptions& opts = {});

// P(r) = integral over E_r of (|grad psi_r|^2 + psi_r tr kappa) Q dmu dt.
// kappa = Ric on flow backgrounds, 0 on static ones.
double local_quantity_P(const HeatBall& ball, const BallKernel& v, const QField& Q);

// I(r) = P(r)/r^n over a radius grid, with dI/dr estimated on log r.
MonotonicityCurve monotonicity_curve(const BallKernel& v, const QField& Q,
                                     const std::vector<double>& radii,
                                     const BallOptions& opts = {});

struct WatsonReport {
  double center_value = 0.0;        // Q(x0, t0)
  std::vector<double> radii;
  std::vector<double> I;
  double max_rel_dev = 0.0;         // max |I(r) - center| / |center|
};

// Caloric constancy on the Euclidean patch: I(r) == Q(x0,t0) for caloric Q
// against the exact backward kernel; empirically pins the normalization.
WatsonReport watson_mean_value_check(const BallKernel& v, const QField& Q,
                                     double center_value,
                                     const std::vector<double>& radii,
                                     const BallOptions& opts = {});

}  // namespace lyh
