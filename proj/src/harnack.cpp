#include "lyh/harnack.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lyh {

namespace {

void require_conjugate(const FieldHistory& u) {
  if (u.dir != TimeDirection::conjugate_tau)
    throw std::invalid_argument("operation expects a conjugate-heat history");
}

void require_static_grid(const FieldHistory& u, const char* what) {
  const auto& spec = u.flow->spec;
  if (!(spec.is_static() && spec.is_grid_kind()))
    throw std::invalid_argument(std::string(what) +
                                " requires a static nonneg-Ricci background");
}

void require_same_flow(const FieldHistory& a, const FieldHistory& b) {
  if (a.flow.get() != b.flow.get())
    throw std::invalid_argument("histories live on different flows");
}

// Distance-from-center field in the tau = 0 metric (t = T for conjugate
// centers, t = t_center for forward ones).
Field center_distance_field(const FieldHistory& u) {
  if (!u.has_center) throw std::invalid_argument("history carries no center");
  const FlowSolution& F = *u.flow;
  if (F.spec.is_grid_kind()) {
    if (F.spec.kind == Kind::conformal_torus_flow)
      return distance_field(F, u.t_center, u.center);
    const GridShape g = F.grid();
    const bool wrap = F.spec.kind == Kind::flat_torus_static;
    Field d(g.cells());
    for (int c = 0; c < g.cells(); ++c)
      d[c] = wrap ? wrap_distance(g, u.center, g.point(c))
                  : std::sqrt(norm_sq(g.point(c) - u.center));
    return d;
  }
  const ZonalShape z = F.zonal();
  const double rho = std::sqrt(F.rho_sq(u.t_center));
  Field d(z.m);
  for (int j = 0; j < z.m; ++j) d[j] = rho * z.theta(j);
  return d;
}

// Even-reflection estimate of a zonal field at theta = 0.
double zonal_pole_value(const Field& f) {
  if (f.size() < 2) return f.front();
  return (9.0 * f[0] - f[1]) / 8.0;
}

double center_value(const FieldHistory& u, const Field& field) {
  const FlowSolution& F = *u.flow;
  if (F.spec.is_grid_kind()) return interp_periodic(F.grid(), field, u.center);
  return zonal_pole_value(field);
}

}  // namespace

PotentialField potential_f(const Field& u, double tau, int n) {
  if (tau <= 0) throw std::invalid_argument("potential_f needs tau > 0");
  PotentialField out;
  out.tau = tau;
  out.f.resize(u.size());
  out.masked.resize(u.size());
  const double norm = 0.5 * n * std::log(4.0 * M_PI * tau);
  for (size_t c = 0; c < u.size(); ++c) {
    out.masked[c] = is_masked(u[c]);
    out.masked_cells += out.masked[c];
    out.f[c] = -std::log(std::max(u[c], kMaskFloor)) - norm;
  }
  return out;
}

Field v_H_values(const FieldHistory& u, int node) {
  require_conjugate(u);
  const FlowSolution& F = *u.flow;
  const double tau = u.times[node];
  if (tau <= 0) throw std::invalid_argument("v_H needs tau > 0");
  const double t_abs = u.t_abs(node);
  const Field& uf = u.values[node];
  const int nc = (int)uf.size();
  if (2 * masked_count(uf) > nc)
    throw std::runtime_error("v_H field unusable: masked fraction > 50%");

  const GeomLog gl = geom_log_derivs(F, uf, t_abs);
  const Field R = F.scalar_curvature(t_abs);
  const int n = F.spec.n;
  const double norm = 0.5 * n * std::log(4.0 * M_PI * tau);
  Field out(nc);
  for (int c = 0; c < nc; ++c) {
    const double f = -gl.w[c] - norm;
    const double bracket =
        tau * (-2.0 * gl.lap[c] - gl.grad_sq[c] + R[c]) + f - n;
    out[c] = bracket * uf[c];
  }
  return out;
}

HarnackReport v_H_field(const FieldHistory& u, int node, double tol) {
  const Field v = v_H_values(u, node);
  const Field& uf = u.values[node];
  HarnackReport rep;
  rep.quantity = "v_H";
  rep.background = kind_name(u.flow->spec.kind);
  rep.resolution = u.flow->spec.is_grid_kind() ? u.flow->spec.res : u.flow->spec.zonal_res;
  rep.time = u.times[node];
  rep.dir = Direction::LessEqZero;
  rep.tol = tol;
  rep.min_val = std::numeric_limits<double>::infinity();
  rep.max_val = -rep.min_val;
  for (size_t c = 0; c < v.size(); ++c) {
    if (is_masked(uf[c])) {
      ++rep.masked;
      continue;
    }
    rep.min_val = std::min(rep.min_val, v[c]);
    rep.max_val = std::max(rep.max_val, v[c]);
  }
  rep.values = v;
  rep.finalize();
  return rep;
}

double entropy_W_h(const FieldHistory& u, const FieldHistory& h, double tau) {
  require_same_flow(u, h);
  const int node = u.node_at(tau);
  const Field v = v_H_values(u, node);
  const double t_abs = u.t_abs(node);
  const Field hf = h.at_time(h.dir == TimeDirection::conjugate_tau
                                 ? u.flow->spec.horizon - t_abs
                                 : t_abs);
  const Field w = u.flow->mu_weights(t_abs);
  double s = 0, comp = 0;
  for (size_t c = 0; c < v.size(); ++c) {
    const double y = v[c] * hf[c] * w[c] - comp;
    const double t = s + y;
    comp = (t - s) - y;
    s = t;
  }
  return s;
}

double dissipation(const FieldHistory& u, const FieldHistory& h, double tau) {
  require_same_flow(u, h);
  require_conjugate(u);
  const int node = u.node_at(tau);
  const double t_abs = u.t_abs(node);
  const Field& uf = u.values[node];
  const GeomLog gl = geom_log_derivs(*u.flow, uf, t_abs);
  const Field ric = ricci_multiplier(*u.flow, t_abs);
  const Field fnsq = frame_norm_sq(gl, ric, -0.5 / tau, -1.0);
  const Field hf = h.at_time(h.dir == TimeDirection::conjugate_tau
                                 ? u.flow->spec.horizon - t_abs
                                 : t_abs);
  const Field w = u.flow->mu_weights(t_abs);
  double s = 0, comp = 0;
  for (size_t c = 0; c < uf.size(); ++c) {
    const double y = fnsq[c] * uf[c] * hf[c] * w[c] - comp;
    const double t = s + y;
    comp = (t - s) - y;
    s = t;
  }
  return 2.0 * tau * s;
}

double conjugate_evolution_residual(const FieldHistory& u, int node,
                                    const FieldHistory& h) {
  require_conjugate(u);
  require_same_flow(u, h);
  if (node < 1 || node + 1 >= u.nodes())
    throw std::invalid_argument("residual needs an interior node");
  const double tm = u.times[node - 1], t0 = u.times[node], tp = u.times[node + 1];
  const Field vm = v_H_values(u, node - 1);
  const Field v0 = v_H_values(u, node);
  const Field vp = v_H_values(u, node + 1);

  const double t_abs = u.t_abs(node);
  const Field lap_v = laplace_beltrami(*u.flow, v0, t_abs);
  const Field R = u.flow->scalar_curvature(t_abs);
  const Field& uf = u.values[node];
  const GeomLog gl = geom_log_derivs(*u.flow, uf, t_abs);
  const Field ric = ricci_multiplier(*u.flow, t_abs);
  const Field fnsq = frame_norm_sq(gl, ric, -0.5 / t0, -1.0);

  const Field hf = h.at_time(h.dir == TimeDirection::conjugate_tau
                                 ? u.flow->spec.horizon - t_abs
                                 : t_abs);
  const Field w = u.flow->mu_weights(t_abs);

  // 3-point derivative on a possibly nonuniform grid.
  const double cm = (t0 - tp) / ((tm - t0) * (tm - tp));
  const double c0 = (2 * t0 - tm - tp) / ((t0 - tm) * (t0 - tp));
  const double cp = (t0 - tm) / ((tp - tm) * (tp - t0));

  double s = 0, comp = 0;
  for (size_t c = 0; c < uf.size(); ++c) {
    const double dv = cm * vm[c] + c0 * v0[c] + cp * vp[c];
    const double res = dv - lap_v[c] + R[c] * v0[c] + 2.0 * t0 * fnsq[c] * uf[c];
    const double y = std::abs(res) * hf[c] * w[c] - comp;
    const double t = s + y;
    comp = (t - s) - y;
    s = t;
  }
  return s;
}

LiYauResult li_yau_Q(const FieldHistory& u, int node, double tol) {
  require_static_grid(u, "li_yau_Q");
  if (u.dir != TimeDirection::forward_t)
    throw std::invalid_argument("li_yau_Q expects a forward heat history");
  const double t = u.age_of(node);
  if (t <= 0) throw std::invalid_argument("li_yau_Q needs positive age");
  const Field& uf = u.values[node];
  const GeomLog gl = geom_log_derivs(*u.flow, uf, u.t_abs(node));
  const int n = u.flow->spec.n;
  const int nc = (int)uf.size();

  LiYauResult out;
  out.upsilon11.resize(nc);
  out.upsilon12.resize(nc);
  out.upsilon22.resize(nc);
  HarnackReport& rep = out.report;
  rep.quantity = "li_yau_Q";
  rep.background = kind_name(u.flow->spec.kind);
  rep.resolution = u.flow->spec.res;
  rep.time = t;
  rep.dir = Direction::GreaterEqZero;
  rep.tol = tol;
  rep.values.resize(nc);
  rep.min_val = std::numeric_limits<double>::infinity();
  rep.max_val = -rep.min_val;
  const double i2t = 0.5 / t;
  for (int c = 0; c < nc; ++c) {
    rep.values[c] = uf[c] * (gl.lap[c] + n * i2t);
    out.upsilon11[c] = uf[c] * (gl.h11[c] + i2t);
    out.upsilon12[c] = uf[c] * gl.h12[c];
    out.upsilon22[c] = uf[c] * (gl.h22[c] + i2t);
    if (is_masked(uf[c])) {
      ++rep.masked;
      continue;
    }
    rep.min_val = std::min(rep.min_val, rep.values[c]);
    rep.max_val = std::max(rep.max_val, rep.values[c]);
  }
  rep.finalize();
  return out;
}

HarnackReport linear_W(const FieldHistory& u, int node, double tol) {
  require_static_grid(u, "linear_W");
  if (u.dir != TimeDirection::forward_t)
    throw std::invalid_argument("linear_W expects a forward heat history");
  const double t = u.age_of(node);
  if (t <= 0) throw std::invalid_argument("linear_W needs positive age");
  const Field& uf = u.values[node];
  const GeomLog gl = geom_log_derivs(*u.flow, uf, u.t_abs(node));
  const int n = u.flow->spec.n;
  const double norm = 0.5 * n * std::log(4.0 * M_PI * t);

  HarnackReport rep;
  rep.quantity = "linear_W";
  rep.background = kind_name(u.flow->spec.kind);
  rep.resolution = u.flow->spec.res;
  rep.time = t;
  rep.dir = Direction::LessEqZero;
  rep.tol = tol;
  rep.advisory = !u.has_center;
  rep.values.resize(uf.size());
  rep.min_val = std::numeric_limits<double>::infinity();
  rep.max_val = -rep.min_val;
  for (size_t c = 0; c < uf.size(); ++c) {
    const double f = -gl.w[c] - norm;
    rep.values[c] = t * (-2.0 * gl.lap[c] - gl.grad_sq[c]) + f - n;
    if (is_masked(uf[c])) {
      ++rep.masked;
      continue;
    }
    rep.min_val = std::min(rep.min_val, rep.values[c]);
    rep.max_val = std::max(rep.max_val, rep.values[c]);
  }
  rep.finalize();
  return rep;
}

GradientEstimateReport gradient_estimate_check(const FieldHistory& u, double k1,
                                               double k2, double tau_lo,
                                               double tau_hi, double tol) {
  require_conjugate(u);
  const FlowSolution& F = *u.flow;
  if (tau_hi > std::min(1.0, F.spec.horizon) + 1e-12)
    throw std::invalid_argument("tau range outside the estimate's hypothesis");
  const int n = F.spec.n;
  const double C1 = (4 + n) * k1 + 1.0;
  const double C2 = k2 + n * k1 * std::exp(k2);

  GradientEstimateReport rep;
  rep.tol = tol;
  rep.margin_explicit = std::numeric_limits<double>::infinity();
  rep.margin_packaged = rep.margin_explicit;
  double A = 0.0;
  for (int node = 0; node < u.nodes(); ++node) {
    const double tau = u.times[node];
    if (tau < tau_lo - 1e-14 || tau > tau_hi + 1e-14) continue;
    for (double v : u.values[node]) A = std::max(A, v);
    rep.taus.push_back(tau);
  }
  if (rep.taus.empty()) throw std::invalid_argument("no nodes in the tau range");
  rep.A = A;

  for (int node = 0; node < u.nodes(); ++node) {
    const double tau = u.times[node];
    if (tau < tau_lo - 1e-14 || tau > tau_hi + 1e-14) continue;
    const Field& uf = u.values[node];
    const GeomLog gl = geom_log_derivs(F, uf, u.t_abs(node));
    const double phi = tau / (1.0 + C1 * tau);
    const double ek2t = std::exp(k2 * tau);
    for (size_t c = 0; c < uf.size(); ++c) {
      if (is_masked(uf[c])) continue;
      const double logAu = std::log(A / uf[c]);
      const double lhs = phi * gl.grad_sq[c] * uf[c];
      const double rhs = ek2t * uf[c] * logAu + (k2 + n * k1 * std::exp(k2)) * tau * uf[c];
      const double m = rhs - lhs;
      rep.margin_explicit = std::min(rep.margin_explicit, m);
      if (m < -tol) ++rep.violations_explicit;
      const double lhs6 = tau * gl.grad_sq[c];
      const double rhs6 = (1.0 + C1 * tau) * (logAu + C2 * tau);
      rep.margin_packaged = std::min(rep.margin_packaged, rhs6 - lhs6);
    }
  }
  rep.pass = rep.violations_explicit == 0;
  return rep;
}

MeanValueReport mean_value_bound_check(const FieldHistory& u, double tau_lo,
                                       double tau_hi) {
  require_conjugate(u);
  const int n = u.flow->spec.n;
  MeanValueReport rep;
  for (int node = 0; node < u.nodes(); ++node) {
    const double tau = u.times[node];
    if (tau < tau_lo - 1e-14 || tau > tau_hi + 1e-14 || tau <= 0) continue;
    const double scale = std::pow(tau, 0.5 * n) / u.mass[node];
    const Field& uf = u.values[node];
    for (size_t c = 0; c < uf.size(); ++c) {
      const double v = scale * uf[c];
      if (v > rep.B_emp) {
        rep.B_emp = v;
        rep.arg_tau = tau;
        rep.arg_cell = (int)c;
      }
    }
  }
  return rep;
}

KernelGradientReport kernel_gradient_checks(const FieldHistory& H, double delta,
                                            double tau_lo, double tau_hi) {
  require_static_grid(H, "kernel_gradient_checks");
  if (delta <= 0 || delta >= 4) throw std::invalid_argument("delta must lie in (0,4)");
  const Field d = center_distance_field(H);
  KernelGradientReport rep;
  for (int node = 0; node < H.nodes(); ++node) {
    const double tau =
        H.dir == TimeDirection::conjugate_tau ? H.times[node] : H.age_of(node);
    if (tau < tau_lo - 1e-14 || tau > tau_hi + 1e-14 || tau <= 0) continue;
    const Field& uf = H.values[node];
    const GeomLog gl = geom_log_derivs(*H.flow, uf, H.t_abs(node));
    double cg = -std::numeric_limits<double>::infinity(), cl = cg;
    for (size_t c = 0; c < uf.size(); ++c) {
      if (is_masked(uf[c])) continue;
      const double quad = d[c] * d[c] / ((4.0 - delta) * tau);
      cg = std::max(cg, 0.5 * tau * gl.grad_sq[c] - quad);
      cl = std::max(cl, 0.5 * tau * (gl.lap[c] + 2.0 * gl.grad_sq[c]) - 4.0 * quad);
    }
    rep.taus.push_back(tau);
    rep.C_grad.push_back(cg);
    rep.C_lap.push_back(cl);
  }
  if (rep.taus.empty()) throw std::invalid_argument("no nodes in the tau range");
  rep.C_grad_max = *std::max_element(rep.C_grad.begin(), rep.C_grad.end());
  rep.C_lap_max = *std::max_element(rep.C_lap.begin(), rep.C_lap.end());
  // No blow-up toward tau -> 0: the smallest-tau constant must not exceed the
  // rest of the sweep by more than a modest slack.
  auto small_ok = [&](const std::vector<double>& C) {
    size_t imin = 0;
    for (size_t i = 1; i < rep.taus.size(); ++i)
      if (rep.taus[i] < rep.taus[imin]) imin = i;
    double rest = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < C.size(); ++i)
      if (i != imin) rest = std::max(rest, C[i]);
    return C[imin] <= rest + 0.05 * (1.0 + std::abs(rest));
  };
  rep.bounded_trend = small_ok(rep.C_grad) && small_ok(rep.C_lap);
  return rep;
}

SmallTimeLimits small_time_limits(const FieldHistory& H, const FieldHistory& h,
                                  const std::vector<double>& tau_schedule) {
  require_conjugate(H);
  require_same_flow(H, h);
  const FlowSolution& F = *H.flow;
  const double T = F.spec.horizon;
  const int n = F.spec.n;
  const Field d0 = center_distance_field(H);

  SmallTimeLimits out;
  out.moment.quantity = "moment_d2_4tau";
  out.f_mean.quantity = "f_minus_n2";
  out.entropy.quantity = "entropy_W_h";
  out.term_II.quantity = "term_II";
  out.term_III.quantity = "term_III";

  for (double tau : tau_schedule) {
    const double t_abs = T - tau;
    const Field Hf = H.at_time(tau);
    const Field hf = h.at_time(h.dir == TimeDirection::conjugate_tau ? tau : t_abs);
    const Field w = F.mu_weights(t_abs);
    const Field lap_h = laplace_beltrami(F, hf, t_abs);
    const Field R = F.scalar_curvature(t_abs);
    const double norm = 0.5 * n * std::log(4.0 * M_PI * tau);

    double moment = 0, fmean = 0, II = 0, III = 0;
    for (size_t c = 0; c < Hf.size(); ++c) {
      const double Hh = Hf[c] * hf[c] * w[c];
      moment += d0[c] * d0[c] / (4.0 * tau) * Hh;
      const double f = -std::log(std::max(Hf[c], kMaskFloor)) - norm;
      fmean += (f - 0.5 * n) * Hh;
      II += Hf[c] * lap_h[c] * w[c];
      III += R[c] * Hh;
    }
    II *= -2.0 * tau;
    III *= tau;

    out.moment.schedule.push_back(tau);
    out.moment.value.push_back(moment);
    out.f_mean.schedule.push_back(tau);
    out.f_mean.value.push_back(fmean);
    out.term_II.schedule.push_back(tau);
    out.term_II.value.push_back(II);
    out.term_III.schedule.push_back(tau);
    out.term_III.value.push_back(III);
    // entropy via the shared evaluator (node must exist in H)
    out.entropy.schedule.push_back(tau);
    out.entropy.value.push_back(entropy_W_h(H, h, tau));
  }
  extrapolate_limit(out.moment);
  extrapolate_limit(out.f_mean);
  extrapolate_limit(out.entropy);
  extrapolate_limit(out.term_II);
  extrapolate_limit(out.term_III);
  out.h_at_center = center_value(
      H, h.at_time(h.dir == TimeDirection::conjugate_tau ? 0.0 : T));
  return out;
}

namespace {

Field pseudo_kernel_field(const Field& dist, double tau, int n) {
  Field v(dist.size());
  for (size_t c = 0; c < dist.size(); ++c)
    v[c] = gaussian_kernel_value(dist[c], tau, n);
  return v;
}

}  // namespace

MonotonicityCurve prop7_monotonicity_series(const FieldHistory& u, Vec2 x0,
                                            double t0,
                                            const std::vector<double>& ts) {
  require_static_grid(u, "prop7_monotonicity_series");
  if (u.dir != TimeDirection::forward_t)
    throw std::invalid_argument("prop7 expects a forward heat history");
  const FlowSolution& F = *u.flow;
  const GridShape g = F.grid();
  const int n = F.spec.n;
  const bool wrap = F.spec.kind == Kind::flat_torus_static;
  Field dist(g.cells());
  for (int c = 0; c < g.cells(); ++c)
    dist[c] = wrap ? wrap_distance(g, x0, g.point(c))
                   : std::sqrt(norm_sq(g.point(c) - x0));
  const Field w = F.mu_weights(0.0);
  const Field ric = ricci_multiplier(F, 0.0);

  MonotonicityCurve curve;
  curve.quantity = "prop7_series";
  curve.param = "t";
  for (double t : ts) {
    if (t <= 0 || t >= t0)
      throw std::invalid_argument("t schedule must stay inside (0, t0)");
    const double tau = t0 - t;
    const Field uf = u.at_time(u.t_init + t);
    const GeomLog gl = geom_log_derivs(F, uf, u.t_init + t);
    const Field Hhat = pseudo_kernel_field(dist, tau, n);
    const Field hsq = frame_norm_sq(gl, Field(g.cells(), 0.0), 0.5 / t, 1.0);
    double C = 0, Rhs = 0;
    for (int c = 0; c < g.cells(); ++c) {
      const double Q = uf[c] * (gl.lap[c] + 0.5 * n / t);
      C += t * t * Q * Hhat[c] * w[c];
      Rhs += (hsq[c] + ric[c] * gl.grad_sq[c]) * uf[c] * Hhat[c] * w[c];
    }
    curve.grid.push_back(t);
    curve.value.push_back(C);
    curve.companion.push_back(2.0 * t * t * Rhs);
  }
  // Central-difference derivative with a step-doubling error bar.
  const int m = (int)curve.grid.size();
  curve.deriv.assign(m, 0.0);
  curve.deriv_err.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    if (i == 0 || i == m - 1) {
      const int a = i == 0 ? 0 : m - 2;
      curve.deriv[i] =
          (curve.value[a + 1] - curve.value[a]) / (curve.grid[a + 1] - curve.grid[a]);
      curve.deriv_err[i] = std::abs(curve.deriv[i]);  // one-sided: no bar
      continue;
    }
    const double d1 = (curve.value[i + 1] - curve.value[i - 1]) /
                      (curve.grid[i + 1] - curve.grid[i - 1]);
    curve.deriv[i] = d1;
    if (i >= 2 && i + 2 < m) {
      const double d2 = (curve.value[i + 2] - curve.value[i - 2]) /
                        (curve.grid[i + 2] - curve.grid[i - 2]);
      curve.deriv_err[i] = std::abs(d2 - d1) / 3.0;
    }
  }
  return curve;
}

Prop7PointBound prop7_point_bound(const FieldHistory& u, Vec2 x0, double t0,
                                  const std::vector<double>& ts) {
  const MonotonicityCurve curve = prop7_monotonicity_series(u, x0, t0, ts);
  const FlowSolution& F = *u.flow;
  Prop7PointBound out;
  const Field uf = u.at_time(u.t_init + t0);
  const GeomLog gl = geom_log_derivs(F, uf, u.t_init + t0);
  const int n = F.spec.n;
  Field Qf(uf.size());
  for (size_t c = 0; c < uf.size(); ++c)
    Qf[c] = uf[c] * (gl.lap[c] + 0.5 * n / t0);
  out.lhs = interp_periodic(F.grid(), Qf, x0);

  // integral_0^{t0} of the companion, extended flat at both ends.
  double I = 0.0;
  const auto& t = curve.grid;
  const auto& c = curve.companion;
  I += c.front() * t.front();  // [0, t_first]
  for (size_t i = 0; i + 1 < t.size(); ++i)
    I += 0.5 * (c[i] + c[i + 1]) * (t[i + 1] - t[i]);
  I += c.back() * (t0 - t.back());  // [t_last, t0]
  out.rhs = 2.0 / (t0 * t0) * I;
  return out;
}

RepresentationResult vH_representation_check(const FieldHistory& H,
                                             const FieldHistory& h_fund,
                                             int cell0, double t0) {
  require_conjugate(H);
  require_same_flow(H, h_fund);
  if (h_fund.dir != TimeDirection::forward_t || !h_fund.has_center)
    throw std::invalid_argument("h must be a forward fundamental solution");
  const FlowSolution& F = *H.flow;
  const double T = F.spec.horizon;
  if (t0 >= T) throw std::invalid_argument("t0 must precede the horizon");

  RepresentationResult out;
  {
    const int node = H.node_near(T - t0);
    const Field v = v_H_values(H, node);
    out.direct = v[cell0];
  }

  // Quadrature nodes: h's forward nodes below H's smallest tau.
  std::vector<double> ts;
  const double tau_min = H.times.front() > 0 ? H.times.front() : H.times[1];
  for (double t : h_fund.times)
    if (t > t0 + 1e-14 && t <= T - tau_min + 1e-14) ts.push_back(t);
  if (ts.size() < 3) throw std::invalid_argument("too few overlapping time nodes");

  std::vector<double> integrand(ts.size());
  for (size_t i = 0; i < ts.size(); ++i) {
    const double t = ts[i];
    const double tau = T - t;
    const Field Hf = H.at_time(tau);
    const Field hf = h_fund.at_time(t);
    const GeomLog gl = geom_log_derivs(F, Hf, t);
    const Field ric = ricci_multiplier(F, t);
    const Field fnsq = frame_norm_sq(gl, ric, -0.5 / tau, -1.0);
    const Field w = F.mu_weights(t);
    double s = 0;
    for (size_t c = 0; c < Hf.size(); ++c) s += fnsq[c] * Hf[c] * hf[c] * w[c];
    integrand[i] = tau * s;
  }
  double I = integrand.front() * (ts.front() - t0);  // flat extension to t0
  for (size_t i = 0; i + 1 < ts.size(); ++i)
    I += 0.5 * (integrand[i] + integrand[i + 1]) * (ts[i + 1] - ts[i]);
  I += 0.5 * integrand.back() * (T - ts.back());  // linear decay to 0 at T
  out.integral = -2.0 * I;
  out.rel_gap = std::abs(out.direct - out.integral) /
                std::max({std::abs(out.direct), std::abs(out.integral), 1e-300});
  return out;
}

LimitReport parametrix_leading_order_check(const FieldHistory& H,
                                           const std::vector<double>& taus,
                                           double fixed_d) {
  require_static_grid(H, "parametrix_leading_order_check");
  if (!H.has_center) throw std::invalid_argument("history carries no center");
  const FlowSolution& F = *H.flow;
  const GridShape g = F.grid();
  const int n = F.spec.n;
  const bool wrap = F.spec.kind == Kind::flat_torus_static;
  const Vec2 y = {H.center.x + fixed_d, H.center.y};
  const double d0 = wrap ? wrap_distance(g, H.center, y) : fixed_d;

  LimitReport rep;
  rep.quantity = "parametrix_ratio";
  for (double tau : taus) {
    const Field Hf = H.at_time(H.dir == TimeDirection::conjugate_tau
                                   ? tau
                                   : H.t_init + tau);
    const double val = interp_periodic(g, Hf, y);
    const double ratio =
        std::pow(4.0 * M_PI * tau, 0.5 * n) * std::exp(d0 * d0 / (4.0 * tau)) * val;
    rep.schedule.push_back(tau);
    rep.value.push_back(ratio);
  }
  extrapolate_limit(rep);
  return rep;
}

}  // namespace lyh
