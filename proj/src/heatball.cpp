#include "lyh/heatball.hpp"

#include <cmath>
#include <stdexcept>

namespace lyh {

namespace {

void require_grid(const FlowSolution& F, const char* what) {
  if (!F.spec.is_grid_kind())
    throw std::invalid_argument(std::string(what) +
                                ": heat balls are implemented on grid backgrounds");
}

}  // namespace

BallKernel BallKernel::pseudo_distance(FlowPtr flow, Vec2 x0, double t0) {
  require_grid(*flow, "pseudo kernel");
  BallKernel k;
  k.flow_ = std::move(flow);
  k.x0_ = x0;
  k.t0_ = t0;
  k.mode_ = KernelMode::distance;
  return k;
}

BallKernel BallKernel::exact_backward(FlowPtr flow, Vec2 x0, double t0) {
  require_grid(*flow, "exact backward kernel");
  if (!flow->spec.is_static())
    throw std::invalid_argument("exact backward kernel needs a static background");
  BallKernel k;
  k.flow_ = std::move(flow);
  k.x0_ = x0;
  k.t0_ = t0;
  k.mode_ = KernelMode::exact_backward;
  return k;
}

BallKernel BallKernel::from_reduced(FlowPtr flow, Vec2 x0, double t0,
                                    std::vector<ReducedDistanceField> fields) {
  require_grid(*flow, "reduced kernel");
  if (fields.empty()) throw std::invalid_argument("reduced mode needs ell fields");
  BallKernel k;
  k.flow_ = std::move(flow);
  k.x0_ = x0;
  k.t0_ = t0;
  k.mode_ = KernelMode::reduced;
  k.ell_ = std::move(fields);
  return k;
}

double BallKernel::ell_at(Vec2 y, double tau) const {
  const GridShape g = flow_->grid();
  // linear in tau between stored fields, clamped at the ends
  if (tau <= ell_.front().tau) return interp_periodic(g, ell_.front().ell, y);
  if (tau >= ell_.back().tau) return interp_periodic(g, ell_.back().ell, y);
  size_t k = 0;
  while (k + 2 < ell_.size() && ell_[k + 1].tau < tau) ++k;
  const double a = (tau - ell_[k].tau) / (ell_[k + 1].tau - ell_[k].tau);
  return (1 - a) * interp_periodic(g, ell_[k].ell, y) +
         a * interp_periodic(g, ell_[k + 1].ell, y);
}

double BallKernel::value(Vec2 y, double t) const {
  if (t >= t0_) throw std::invalid_argument("heat-ball kernel needs t < t0");
  const double tau = t0_ - t;
  const GridShape g = flow_->grid();
  const int n = flow_->spec.n;
  switch (mode_) {
    case KernelMode::distance: {
      double d;
      if (flow_->spec.kind == Kind::conformal_torus_flow)
        d = distance(*flow_, t0_, x0_, y);
      else
        d = flow_->spec.kind == Kind::flat_torus_static
                ? wrap_distance(g, x0_, y)
                : std::sqrt(norm_sq(y - x0_));
      return gaussian_kernel_value(d, tau, n);
    }
    case KernelMode::exact_backward:
      return flat_kernel_point(g, flow_->spec.kind == Kind::flat_torus_static,
                               x0_, y, tau)
          .u;
    case KernelMode::reduced:
      return std::exp(-ell_at(y, tau)) / std::pow(4.0 * M_PI * tau, 0.5 * n);
  }
  throw std::logic_error("unreachable");
}

double BallKernel::grad_log_sq(Vec2 y, double t) const {
  const double tau = t0_ - t;
  const GridShape g = flow_->grid();
  switch (mode_) {
    case KernelMode::distance: {
      double d;
      double e2phi = 1.0;
      if (flow_->spec.kind == Kind::conformal_torus_flow) {
        d = distance(*flow_, t0_, x0_, y);  // d0 held fixed along the ball
        const Field phi = flow_->phi_at(t);
        e2phi = std::exp(2.0 * interp_periodic(g, phi, y));
      } else {
        d = flow_->spec.kind == Kind::flat_torus_static
                ? wrap_distance(g, x0_, y)
                : std::sqrt(norm_sq(y - x0_));
      }
      const double gd = d / (2.0 * tau);
      return gd * gd / e2phi;
    }
    case KernelMode::exact_backward: {
      const KernelPoint kp = flat_kernel_point(
          g, flow_->spec.kind == Kind::flat_torus_static, x0_, y, tau);
      return norm_sq(kp.grad_log);
    }
    case KernelMode::reduced: {
      // centered differences of the interpolated ell (Lipschitz data)
      const double h = 0.5 * g.hx();
      const double ex =
          (ell_at({y.x + h, y.y}, tau) - ell_at({y.x - h, y.y}, tau)) / (2 * h);
      const double ey =
          (ell_at({y.x, y.y + h}, tau) - ell_at({y.x, y.y - h}, tau)) / (2 * h);
      return ex * ex + ey * ey;
    }
  }
  throw std::logic_error("unreachable");
}

double BallKernel::bracket(Vec2 y, double t) const {
  const double tau = t0_ - t;
  const int n = flow_->spec.n;
  if (flow_->spec.is_static()) {
    if (mode_ == KernelMode::exact_backward) return 0.0;
    if (mode_ == KernelMode::distance) {
      // v (2n - lap d^2)/(4 tau); flat: lap d^2 = 2n away from the cut locus
      // (the cut-locus contribution is a nonnegative singular measure).
      return 0.0;
    }
  }
  // Numerical fallback: FD in t and a 5-point lattice laplacian of v,
  // minus tr kappa v (= R v on flow backgrounds).
  const GridShape g = flow_->grid();
  const double dh = 0.5 * g.hx();
  const double dt = 0.02 * tau;
  const double vc = value(y, t);
  const double vt = (value(y, t + dt) - value(y, t - dt)) / (2 * dt);
  double lap = (value({y.x + dh, y.y}, t) + value({y.x - dh, y.y}, t) +
                value({y.x, y.y + dh}, t) + value({y.x, y.y - dh}, t) - 4 * vc) /
               (dh * dh);
  double trk = 0.0;
  if (!flow_->spec.is_static()) {
    const Field R = flow_->scalar_curvature(t);
    trk = interp_periodic(g, R, y);
    const Field phi = flow_->phi_at(t);
    lap *= std::exp(-2.0 * interp_periodic(g, phi, y));
  }
  (void)n;
  return vt + lap - trk * vc;
}

// ---------------------------------------------------------------------------
// Q fields

QField make_const_qfield(double c) {
  return [c](Vec2, double) { return c; };
}

QField make_kernel_liyau_qfield(FlowPtr flow, Vec2 center, double t_center) {
  require_grid(*flow, "kernel Q field");
  const GridShape g = flow->grid();
  const bool wrap = flow->spec.kind == Kind::flat_torus_static;
  const int n = flow->spec.n;
  return [g, wrap, center, t_center, n](Vec2 y, double t) {
    const double age = t - t_center;
    if (age <= 0) throw std::invalid_argument("Q field queried before its source");
    const KernelPoint kp = flat_kernel_point(g, wrap, center, y, age);
    const double Q = kp.u * (kp.lap_log + 0.5 * n / age);
    return age * age * Q;
  };
}

QField make_kernel_minus_uW_qfield(FlowPtr flow, Vec2 center, double t_center) {
  require_grid(*flow, "kernel W field");
  const GridShape g = flow->grid();
  const bool wrap = flow->spec.kind == Kind::flat_torus_static;
  const int n = flow->spec.n;
  return [g, wrap, center, t_center, n](Vec2 y, double t) {
    const double age = t - t_center;
    if (age <= 0) throw std::invalid_argument("Q field queried before its source");
    const KernelPoint kp = flat_kernel_point(g, wrap, center, y, age);
    const double f = -std::log(kp.u) - 0.5 * n * std::log(4.0 * M_PI * age);
    const double gradf_sq = norm_sq(kp.grad_log);
    const double W = age * (-2.0 * kp.lap_log - gradf_sq) + f - n;
    return -kp.u * W;
  };
}

QField make_history_liyau_qfield(const FieldHistory& u) {
  require_grid(*u.flow, "history Q field");
  if (u.dir != TimeDirection::forward_t)
    throw std::invalid_argument("Li-Yau Q field needs a forward history");
  auto flow = u.flow;
  const GridShape g = flow->grid();
  const int n = flow->spec.n;
  // Precompute Q per node once.
  auto qs = std::make_shared<std::vector<Field>>();
  auto times = std::make_shared<std::vector<double>>(u.times);
  const double t_init = u.t_init;
  for (int k = 0; k < u.nodes(); ++k) {
    const double age = u.age_of(k);
    if (age <= 0) {
      qs->push_back(Field(g.cells(), 0.0));
      continue;
    }
    const GeomLog gl = geom_log_derivs(*flow, u.values[k], u.t_abs(k));
    Field q(g.cells());
    for (int c = 0; c < g.cells(); ++c)
      q[c] = u.values[k][c] * (gl.lap[c] + 0.5 * n / age);
    qs->push_back(std::move(q));
  }
  return [g, qs, times, t_init](Vec2 y, double t) {
    const auto& ts = *times;
    if (t <= ts.front() || ts.size() == 1) {
      const double age = t - t_init;
      return age * age * interp_periodic(g, qs->front(), y);
    }
    size_t k = 0;
    while (k + 2 < ts.size() && ts[k + 1] < t) ++k;
    const double a = std::clamp((t - ts[k]) / (ts[k + 1] - ts[k]), 0.0, 1.0);
    const double q = (1 - a) * interp_periodic(g, (*qs)[k], y) +
                     a * interp_periodic(g, (*qs)[k + 1], y);
    const double age = t - t_init;
    return age * age * q;
  };
}

QField make_history_qfield(const FieldHistory& u) {
  require_grid(*u.flow, "history field");
  auto values = std::make_shared<std::vector<Field>>(u.values);
  auto times = std::make_shared<std::vector<double>>(u.times);
  const GridShape g = u.flow->grid();
  return [g, values, times](Vec2 y, double t) {
    const auto& ts = *times;
    if (t <= ts.front()) return interp_periodic(g, values->front(), y);
    if (t >= ts.back()) return interp_periodic(g, values->back(), y);
    size_t k = 0;
    while (k + 2 < ts.size() && ts[k + 1] < t) ++k;
    const double a = (t - ts[k]) / (ts[k + 1] - ts[k]);
    return (1 - a) * interp_periodic(g, (*values)[k], y) +
           a * interp_periodic(g, (*values)[k + 1], y);
  };
}

QField make_linear_caloric_qfield(double a, Vec2 slope, Vec2 origin) {
  return [a, slope, origin](Vec2 y, double) {
    return a + slope.x * (y.x - origin.x) + slope.y * (y.y - origin.y);
  };
}

QField make_gaussian_caloric_qfield(FlowPtr flow, Vec2 source, double t_source) {
  const GridShape g = flow->grid();
  const bool wrap = flow->spec.kind == Kind::flat_torus_static;
  return [g, wrap, source, t_source](Vec2 y, double t) {
    return flat_kernel_point(g, wrap, source, y, t - t_source).u;
  };
}

// ---------------------------------------------------------------------------
// Region construction

namespace {

// Area fraction of {psi >= 0} in a cell from its 4 corner values (marching
// squares with linear edge interpolation; saddles split by the mean).
double cell_fraction(double c00, double c10, double c11, double c01) {
  int code = (c00 >= 0) | ((c10 >= 0) << 1) | ((c11 >= 0) << 2) | ((c01 >= 0) << 3);
  if (code == 0) return 0.0;
  if (code == 15) return 1.0;
  auto cut = [](double a, double b) { return a / (a - b); };  // zero on edge a->b
  auto corner = [&](double ca, double cb, double cc) {
    // triangle area at a corner with adjacent edge values
    return 0.5 * cut(ca, cb) * cut(ca, cc);
  };
  switch (code) {
    case 1: return corner(c00, c10, c01);
    case 2: return corner(c10, c00, c11);
    case 4: return corner(c11, c10, c01);
    case 8: return corner(c01, c00, c11);
    case 14: return 1.0 - corner(c00, c10, c01);
    case 13: return 1.0 - corner(c10, c00, c11);
    case 11: return 1.0 - corner(c11, c10, c01);
    case 7: return 1.0 - corner(c01, c00, c11);
    case 3: return 0.5 * (cut(c00, c01) + cut(c10, c11));   // bottom band
    case 12: return 0.5 * (cut(c01, c00) + cut(c11, c10));
    case 9: return 0.5 * (cut(c00, c10) + cut(c01, c11));   // left band
    case 6: return 0.5 * (cut(c10, c00) + cut(c11, c01));
    case 5:   // saddles
    case 10: {
      const double mid = 0.25 * (c00 + c10 + c11 + c01);
      const double a = corner(c00, c10, c01) + corner(c11, c10, c01);
      const double b = corner(c10, c00, c11) + corner(c01, c00, c11);
      if (code == 5) return mid >= 0 ? 1.0 - b : a;
      return mid >= 0 ? 1.0 - a : b;
    }
  }
  return 0.0;
}

}  // namespace

HeatBall heat_ball_region(const BallKernel& v, double r, const BallOptions& opts) {
  const FlowSolution& F = v.flow();
  const GridShape g = F.grid();
  const int n = F.spec.n;
  const double t0 = v.t0();
  const double level = -double(n) * std::log(r);  // log v >= level on E_r
  const Vec2 x0 = v.x0();

  auto psi_at = [&](Vec2 y, double tau) {
    const double val = v.value(y, t0 - tau);
    return std::log(std::max(val, kMaskFloor)) + n * std::log(r);
  };
  (void)level;

  // Time extent: largest tau with psi(x0, tau) >= 0 (bisection from the
  // Euclidean top estimate r^2/(4 pi)).
  double tau_hi = r * r / (4.0 * M_PI);
  while (psi_at(x0, tau_hi) > 0) tau_hi *= 1.3;
  double lo = tau_hi / 2;
  while (psi_at(x0, lo) < 0) lo /= 1.5;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + tau_hi);
    (psi_at(x0, mid) >= 0 ? lo : tau_hi) = mid;
  }
  const double tau_top = lo;
  if (tau_top >= t0 - 1e-12)
    throw std::invalid_argument("heat ball touches the domain's time boundary");

  HeatBall ball;
  ball.r = r;
  ball.tau_top = tau_top;

  // Spatial extent at a given tau by radial bisection.
  auto d_max_at = [&](double tau) {
    if (psi_at(x0, tau) < 0) return 0.0;
    double hi = std::sqrt(std::max(2.0 * n * tau * std::log(r * r / (4.0 * M_PI * tau)), 1e-30));
    hi = std::max(hi, 2.0 * g.hx());
    while (psi_at({x0.x + hi, x0.y}, tau) >= 0) hi *= 1.4;
    double dlo = 0.0;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (dlo + hi);
      (psi_at({x0.x + mid, x0.y}, tau) >= 0 ? dlo : hi) = mid;
    }
    return hi;
  };

  const double half_min = 0.5 * std::min(g.lx, g.ly);
  const int ms = opts.slab_res;
  double tau_a = tau_top;
  while (tau_a > tau_top * opts.tau_floor_rel) {
    const double tau_b = tau_a * opts.slab_ratio;
    const double tau_mid = 0.5 * (tau_a + tau_b);
    const double dtau = tau_a - tau_b;
    const double dmax = d_max_at(tau_mid) * opts.pad + 2.0 * g.hx() / ms;
    if (dmax >= half_min)
      throw std::invalid_argument("heat ball touches the domain's space boundary");
    if (dmax > 0) {
      BallSlab slab;
      slab.tau_mid = tau_mid;
      slab.dtau = dtau;
      const double side = 2.0 * dmax;
      const double hs = side / ms;
      const Vec2 org{x0.x - dmax, x0.y - dmax};
      // corner lattice of psi
      std::vector<double> corners((ms + 1) * (ms + 1));
      for (int i = 0; i <= ms; ++i)
        for (int j = 0; j <= ms; ++j)
          corners[i * (ms + 1) + j] =
              psi_at({org.x + i * hs, org.y + j * hs}, tau_mid);
      const double t_slab = t0 - tau_mid;
      for (int i = 0; i < ms; ++i) {
        for (int j = 0; j < ms; ++j) {
          const double frac =
              cell_fraction(corners[i * (ms + 1) + j], corners[(i + 1) * (ms + 1) + j],
                            corners[(i + 1) * (ms + 1) + j + 1],
                            corners[i * (ms + 1) + j + 1]);
          if (frac <= 0) continue;
          BallSlab::Point pt;
          pt.y = {org.x + (i + 0.5) * hs, org.y + (j + 0.5) * hs};
          pt.w = frac * hs * hs * dtau;
          pt.psi = std::max(0.0, psi_at(pt.y, tau_mid));
          pt.glsq = v.grad_log_sq(pt.y, t_slab);
          slab.points.push_back(pt);
          ball.measure += pt.w;
          ball.psi_weight += pt.w * pt.glsq;
        }
      }
      if (!slab.points.empty()) ball.slabs.push_back(std::move(slab));
    }
    tau_a = tau_b;
  }
  return ball;
}

double local_quantity_P(const HeatBall& ball, const BallKernel& v, const QField& Q) {
  const FlowSolution& F = v.flow();
  const bool flowing = !F.spec.is_static();
  double P = 0.0;
  for (const auto& slab : ball.slabs) {
    const double t = v.t0() - slab.tau_mid;
    Field Rfield;
    Field phi;
    if (flowing) {
      Rfield = F.scalar_curvature(t);
      phi = F.phi_at(t);
    }
    double s = 0.0;
    for (const auto& pt : slab.points) {
      double density = pt.glsq;
      double mu = 1.0;
      if (flowing) {
        const double trk = interp_periodic(F.grid(), Rfield, pt.y);
        density += pt.psi * trk;
        mu = std::exp(2.0 * interp_periodic(F.grid(), phi, pt.y));
      }
      s += pt.w * density * Q(pt.y, t) * mu;
    }
    P += s;
  }
  return P;
}

MonotonicityCurve monotonicity_curve(const BallKernel& v, const QField& Q,
                                     const std::vector<double>& radii,
                                     const BallOptions& opts) {
  if (!std::is_sorted(radii.begin(), radii.end()))
    throw std::invalid_argument("radius grid must increase");
  const int n = v.flow().spec.n;
  MonotonicityCurve curve;
  curve.quantity = "heat_ball_I";
  curve.param = "r";
  for (double r : radii) {
    const HeatBall ball = heat_ball_region(v, r, opts);
    const double P = local_quantity_P(ball, v, Q);
    curve.grid.push_back(r);
    curve.companion.push_back(P);
    curve.value.push_back(P / std::pow(r, n));
  }
  const int m = (int)radii.size();
  curve.deriv.assign(m, 0.0);
  curve.deriv_err.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    if (i == 0 || i == m - 1) {
      const int a = i == 0 ? 0 : m - 2;
      curve.deriv[i] =
          (curve.value[a + 1] - curve.value[a]) / (curve.grid[a + 1] - curve.grid[a]);
      continue;
    }
    curve.deriv[i] = (curve.value[i + 1] - curve.value[i - 1]) /
                     (curve.grid[i + 1] - curve.grid[i - 1]);
    if (i >= 2 && i + 2 < m)
      curve.deriv_err[i] = std::abs((curve.value[i + 2] - curve.value[i - 2]) /
                                        (curve.grid[i + 2] - curve.grid[i - 2]) -
                                    curve.deriv[i]) /
                           3.0;
  }
  return curve;
}

WatsonReport watson_mean_value_check(const BallKernel& v, const QField& Q,
                                     double center_value,
                                     const std::vector<double>& radii,
                                     const BallOptions& opts) {
  WatsonReport rep;
  rep.center_value = center_value;
  const int n = v.flow().spec.n;
  for (double r : radii) {
    const HeatBall ball = heat_ball_region(v, r, opts);
    const double I = local_quantity_P(ball, v, Q) / std::pow(r, n);
    rep.radii.push_back(r);
    rep.I.push_back(I);
    rep.max_rel_dev = std::max(
        rep.max_rel_dev, std::abs(I - center_value) / std::max(std::abs(center_value), 1e-300));
  }
  return rep;
}

}  // namespace lyh
