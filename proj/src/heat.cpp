#include "lyh/heat.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace lyh {

int apply_mask_floor(Field& f) {
  int n = 0;
  for (double& v : f)
    if (v <= kMaskFloor) {
      v = kMaskFloor;
      ++n;
    }
  return n;
}

int masked_count(const Field& f) {
  int n = 0;
  for (double v : f)
    if (is_masked(v)) ++n;
  return n;
}

int FieldHistory::node_near(double time) const {
  int best = 0;
  double bd = std::abs(times[0] - time);
  for (int k = 1; k < nodes(); ++k) {
    const double d = std::abs(times[k] - time);
    if (d < bd) {
      bd = d;
      best = k;
    }
  }
  return best;
}

int FieldHistory::node_at(double time) const {
  const int k = node_near(time);
  if (std::abs(times[k] - time) > 1e-9 * std::max(1.0, std::abs(time)))
    throw std::invalid_argument("history has no node at the requested time");
  return k;
}

Field FieldHistory::at_time(double time) const {
  if (nodes() == 0) throw std::logic_error("empty history");
  if (time <= times.front()) return values.front();
  if (time >= times.back()) return values.back();
  auto it = std::upper_bound(times.begin(), times.end(), time);
  const int k = (int)(it - times.begin()) - 1;
  const double a = (time - times[k]) / (times[k + 1] - times[k]);
  Field out(values[k].size());
  for (size_t c = 0; c < out.size(); ++c)
    out[c] = (1 - a) * values[k][c] + a * values[k + 1][c];
  return out;
}

double field_integral(const FlowSolution& flow, const Field& f, double t_abs) {
  const Field w = flow.mu_weights(t_abs);
  return fixed_dot(f, w);
}

double pair_integral(const FieldHistory& u, const FieldHistory& h, double t_abs) {
  const FlowSolution& flow = *u.flow;
  const double T = flow.spec.horizon;
  const Field uf =
      u.at_time(u.dir == TimeDirection::conjugate_tau ? T - t_abs : t_abs);
  const Field hf =
      h.at_time(h.dir == TimeDirection::conjugate_tau ? T - t_abs : t_abs);
  const Field w = flow.mu_weights(t_abs);
  double s = 0.0, comp = 0.0;
  for (size_t c = 0; c < uf.size(); ++c) {
    const double y = uf[c] * hf[c] * w[c] - comp;
    const double t = s + y;
    comp = (t - s) - y;
    s = t;
  }
  return s;
}

// ---------------------------------------------------------------------------
// RK4 method-of-lines core

namespace {

using Rhs = std::function<void(double, const Field&, Field&)>;

// RK4 with a fixed maximum step; stores exactly at the requested target
// times (the step subdivides each target interval evenly).
struct HistorySink {
  std::vector<double>* times;
  std::vector<Field>* values;
};

void rk4_to_targets(const Rhs& rhs, Field& u, double s0,
                    const std::vector<double>& targets, double dt_max,
                    const HistorySink& sink) {
  const int n = (int)u.size();
  Field k1(n), k2(n), k3(n), k4(n), tmp(n);
  double t_cur = s0;
  for (double target : targets) {
    if (target < t_cur - 1e-15) throw std::logic_error("targets must ascend");
    const double span = target - t_cur;
    const int steps = span <= 0 ? 0 : std::max(1, (int)std::ceil(span / dt_max));
    const double dt = steps ? span / steps : 0.0;
    for (int s = 0; s < steps; ++s) {
      const double t = t_cur + s * dt;
      rhs(t, u, k1);
      for (int c = 0; c < n; ++c) tmp[c] = u[c] + 0.5 * dt * k1[c];
      rhs(t + 0.5 * dt, tmp, k2);
      for (int c = 0; c < n; ++c) tmp[c] = u[c] + 0.5 * dt * k2[c];
      rhs(t + 0.5 * dt, tmp, k3);
      for (int c = 0; c < n; ++c) tmp[c] = u[c] + dt * k3[c];
      rhs(t + dt, tmp, k4);
      for (int c = 0; c < n; ++c)
        u[c] += dt / 6.0 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
    }
    t_cur = target;
    for (double v : u)
      if (!std::isfinite(v)) throw std::runtime_error("heat solve diverged");
    if (sink.times) {
      sink.times->push_back(target);
      sink.values->push_back(u);
    }
  }
}

std::vector<double> default_targets(double s0, double s1, double node_dt) {
  const int k = std::max(1, (int)std::ceil((s1 - s0) / node_dt));
  std::vector<double> out(k);
  for (int i = 1; i <= k; ++i) out[i - 1] = s0 + (s1 - s0) * i / k;
  return out;
}

double grid_min_coeff(const FlowSolution& flow) {
  if (flow.phi_nodes.empty()) return 1.0;
  double mn = std::numeric_limits<double>::infinity();
  for (const Field& p : flow.phi_nodes)
    for (double v : p) mn = std::min(mn, v);
  return std::exp(2.0 * mn);
}

struct Discretization {
  double dt_max;    // stability-limited RK4 step
  double node_dt;   // storage spacing
};

Discretization plan(const FlowSolution& F, const SolverOptions& opts) {
  Discretization d;
  double h_sq, h_node;
  if (F.spec.is_grid_kind()) {
    const GridShape g = F.grid();
    const double h = std::min(g.hx(), g.hy());
    const double mc = grid_min_coeff(F);
    h_sq = h * h * mc;
    h_node = h * std::sqrt(mc);
  } else {
    const ZonalShape z = F.zonal();
    const double rmin = std::min(F.rho_sq(0.0), F.rho_sq(F.spec.horizon));
    h_sq = z.h() * z.h() * rmin;
    h_node = z.h() * std::sqrt(rmin);
  }
  d.dt_max = opts.cfl * h_sq;
  d.node_dt = opts.node_dt > 0 ? opts.node_dt : opts.node_factor * h_node;
  return d;
}

void fill_mass(const FlowSolution& flow, TimeDirection dir, FieldHistory& h) {
  h.mass.resize(h.nodes());
  for (int k = 0; k < h.nodes(); ++k) {
    const double t_abs = dir == TimeDirection::conjugate_tau
                             ? flow.spec.horizon - h.times[k]
                             : h.times[k];
    h.mass[k] = field_integral(flow, h.values[k], t_abs);
  }
}

// Conformal solves co-integrate the conformal factor with the same stepper
// so that the reaction term, the Laplacian coefficient and the measure stay
// mutually consistent (this is what makes the discrete conjugate mass an
// invariant).  State layout: [u | phi].
class ConformalSystem {
 public:
  ConformalSystem(const FlowSolution& F, bool conjugate)
      : F_(F), g_(F.grid()), ws_(spectral_workspace(g_)), conjugate_(conjugate) {}

  Field pack(const Field& u, const Field& phi) const {
    Field s(2 * g_.cells());
    std::copy(u.begin(), u.end(), s.begin());
    std::copy(phi.begin(), phi.end(), s.begin() + g_.cells());
    return s;
  }

  void rhs(double, const Field& state, Field& out) const {
    const int n = g_.cells();
    out.resize(2 * n);
    Field u(state.begin(), state.begin() + n);
    Field phi(state.begin() + n, state.end());
    Field lap_u, lap_phi;
    ws_.laplacian(u, lap_u);
    ws_.laplacian(phi, lap_phi);
    const double sgn = conjugate_ ? -1.0 : 1.0;  // d phi/d tau = -d phi/dt
    for (int c = 0; c < n; ++c) {
      const double e2 = std::exp(-2.0 * phi[c]);
      const double R = -2.0 * e2 * lap_phi[c];
      // forward: h_t = lap h; conjugate: u_tau = lap u - R u
      out[c] = e2 * lap_u[c] - (conjugate_ ? R * u[c] : 0.0);
      out[n + c] = sgn * e2 * lap_phi[c];
    }
  }

  double measure_mass(const Field& state) const {
    const int n = g_.cells();
    double s = 0, comp = 0;
    const double area = g_.cell_area();
    for (int c = 0; c < n; ++c) {
      const double y = state[c] * std::exp(2.0 * state[n + c]) * area - comp;
      const double t = s + y;
      comp = (t - s) - y;
      s = t;
    }
    return s;
  }

 private:
  const FlowSolution& F_;
  GridShape g_;
  const SpectralWorkspace& ws_;
  bool conjugate_;
};

FieldHistory solve_grid(FlowPtr flow, const Field& start, bool conjugate,
                        double s0, const std::vector<double>& targets,
                        const SolverOptions& opts) {
  const FlowSolution& F = *flow;
  const Discretization disc = plan(F, opts);
  FieldHistory out;
  out.flow = flow;
  out.dir = conjugate ? TimeDirection::conjugate_tau : TimeDirection::forward_t;
  out.solver_dt = disc.dt_max;

  if (F.spec.kind == Kind::conformal_torus_flow) {
    ConformalSystem sys(F, conjugate);
    const double t_abs0 = conjugate ? F.spec.horizon - s0 : s0;
    Field state = sys.pack(start, F.phi_at(t_abs0));
    std::vector<Field> packed;
    HistorySink sink{&out.times, &packed};
    out.times.push_back(s0);
    packed.push_back(state);
    rk4_to_targets([&](double t, const Field& s, Field& o) { sys.rhs(t, s, o); },
                   state, s0, targets, disc.dt_max, sink);
    const int n = F.grid().cells();
    out.mass.resize(packed.size());
    for (size_t k = 0; k < packed.size(); ++k) {
      out.values.emplace_back(packed[k].begin(), packed[k].begin() + n);
      out.mass[k] = sys.measure_mass(packed[k]);
    }
    return out;
  }

  const auto& ws = spectral_workspace(F.grid());
  Rhs rhs = [&ws](double, const Field& in, Field& o) { ws.laplacian(in, o); };
  Field u = start;
  out.times.push_back(s0);
  out.values.push_back(u);
  HistorySink sink{&out.times, &out.values};
  rk4_to_targets(rhs, u, s0, targets, disc.dt_max, sink);
  fill_mass(F, out.dir, out);
  return out;
}

FieldHistory solve_zonal(FlowPtr flow, const Field& start, bool conjugate,
                         double s0, const std::vector<double>& targets,
                         const SolverOptions& opts) {
  const FlowSolution& F = *flow;
  const ZonalShape z = F.zonal();
  const int n = F.spec.n;
  const double T = F.spec.horizon;
  const Discretization disc = plan(F, opts);
  Rhs rhs;
  if (conjugate) {
    rhs = [&F, z, n, T](double tau, const Field& in, Field& o) {
      zonal_laplacian_unit(z, in, o);
      const double r2 = F.rho_sq(T - tau);
      const double R = n * (n - 1) / r2;
      for (size_t c = 0; c < o.size(); ++c) o[c] = o[c] / r2 - R * in[c];
    };
  } else {
    rhs = [&F, z](double t, const Field& in, Field& o) {
      zonal_laplacian_unit(z, in, o);
      const double r2 = F.rho_sq(t);
      for (double& v : o) v /= r2;
    };
  }
  FieldHistory out;
  out.flow = flow;
  out.dir = conjugate ? TimeDirection::conjugate_tau : TimeDirection::forward_t;
  out.solver_dt = disc.dt_max;
  Field u = start;
  out.times.push_back(s0);
  out.values.push_back(u);
  HistorySink sink{&out.times, &out.values};
  rk4_to_targets(rhs, u, s0, targets, disc.dt_max, sink);
  fill_mass(F, out.dir, out);
  return out;
}

void check_nonneg(const Field& f, const char* what) {
  for (double v : f)
    if (v < 0) throw std::invalid_argument(std::string(what) + " must be nonnegative");
}

}  // namespace

FieldHistory solve_forward_heat(FlowPtr flow, const Field& h0, double t_init,
                                double t_end, const SolverOptions& opts) {
  const FlowSolution& F = *flow;
  F.check_time(t_init);
  F.check_time(t_end);
  if ((int)h0.size() != F.cells()) throw std::invalid_argument("field/flow mismatch");
  check_nonneg(h0, "initial data");
  const Discretization disc = plan(F, opts);
  const auto targets = opts.store_times.empty()
                           ? default_targets(t_init, t_end, disc.node_dt)
                           : opts.store_times;
  FieldHistory out = F.spec.is_grid_kind()
                         ? solve_grid(flow, h0, false, t_init, targets, opts)
                         : solve_zonal(flow, h0, false, t_init, targets, opts);
  out.t_init = t_init;
  return out;
}

FieldHistory solve_conjugate_heat(FlowPtr flow, const Field& uT, double tau_end,
                                  const SolverOptions& opts) {
  const FlowSolution& F = *flow;
  F.check_time(F.spec.horizon - tau_end);
  if ((int)uT.size() != F.cells()) throw std::invalid_argument("field/flow mismatch");
  check_nonneg(uT, "terminal data");
  double m0 = 0;
  for (double v : uT) m0 += v;
  if (m0 <= 0) throw std::invalid_argument("terminal data must have positive mass");
  const Discretization disc = plan(F, opts);
  const auto targets = opts.store_times.empty()
                           ? default_targets(0.0, tau_end, disc.node_dt)
                           : opts.store_times;
  return F.spec.is_grid_kind() ? solve_grid(flow, uT, true, 0.0, targets, opts)
                               : solve_zonal(flow, uT, true, 0.0, targets, opts);
}

// ---------------------------------------------------------------------------
// Fundamental solutions

std::vector<double> default_widths(const FlowSolution& flow) {
  double h_metric;
  if (flow.spec.is_grid_kind()) {
    h_metric = std::min(flow.grid().hx(), flow.grid().hy());
    if (flow.spec.kind == Kind::conformal_torus_flow)
      h_metric *= std::sqrt(grid_min_coeff(flow));
  } else {
    h_metric = flow.zonal().h() * std::sqrt(flow.rho_sq(flow.spec.horizon));
  }
  return {8.0 * h_metric, 4.0 * std::sqrt(2.0) * h_metric, 4.0 * h_metric};
}

namespace {

std::vector<double> shifted(const std::vector<double>& v, double offset) {
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i] + offset;
  return out;
}

Field concentrated_datum(const FlowSolution& F, Vec2 center, double t_abs,
                         double width) {
  Field d2;
  if (F.spec.is_grid_kind()) {
    const GridShape g = F.grid();
    double h_metric = std::min(g.hx(), g.hy());
    if (F.spec.kind == Kind::conformal_torus_flow)
      h_metric *= std::sqrt(grid_min_coeff(F));
    if (width < 4.0 * h_metric)
      throw std::invalid_argument("width not resolved by >= 4 grid cells");
    Field dist;
    if (F.spec.kind == Kind::conformal_torus_flow) {
      dist = distance_field(F, t_abs, center);
    } else {
      dist.resize(g.cells());
      const bool wrap = F.spec.kind == Kind::flat_torus_static;
      for (int c = 0; c < g.cells(); ++c)
        dist[c] = wrap ? wrap_distance(g, center, g.point(c))
                       : std::sqrt(norm_sq(g.point(c) - center));
    }
    d2.resize(dist.size());
    for (size_t c = 0; c < dist.size(); ++c) d2[c] = dist[c] * dist[c];
  } else {
    const ZonalShape z = F.zonal();
    const double rho = std::sqrt(F.rho_sq(t_abs));
    if (width < 4.0 * z.h() * rho)
      throw std::invalid_argument("width not resolved by >= 4 grid cells");
    d2.resize(z.m);
    for (int j = 0; j < z.m; ++j) {
      const double d = rho * z.theta(j);
      d2[j] = d * d;
    }
  }
  Field datum(d2.size());
  for (size_t c = 0; c < d2.size(); ++c)
    datum[c] = std::exp(-d2[c] / (4.0 * width * width));
  const double mass = field_integral(F, datum, t_abs);
  for (double& v : datum) v /= mass;  // discrete unit mass, exactly
  return datum;
}

// A width-w Gaussian datum is the kernel already aged by w^2 (exactly so on
// flat backgrounds).  Each run is therefore reported on the shifted clock
// s + w^2, all runs share the same shifted node grid, and the remaining
// datum-shape defects are extrapolated to width 0 per cell (Neville in w^2).
FieldHistory width_extrapolated(FlowPtr flow, Vec2 center, bool conjugate,
                                double t_center, double span_end,
                                std::vector<double> widths,
                                const SolverOptions& opts) {
  const FlowSolution& F = *flow;
  if (widths.empty()) widths = default_widths(F);
  if (!std::is_sorted(widths.rbegin(), widths.rend()))
    throw std::invalid_argument("widths must decrease");
  const double w1sq = widths.front() * widths.front();
  if (span_end <= 1.5 * w1sq)
    throw std::invalid_argument("span too short for the width schedule");

  const Discretization disc = plan(F, opts);
  std::vector<double> grid =
      opts.store_times.empty()
          ? default_targets(std::max(1.5 * w1sq, disc.node_dt), span_end,
                            disc.node_dt)
          : opts.store_times;
  for (double s : grid)
    if (s < w1sq - 1e-15)
      throw std::invalid_argument("store time precedes the widest datum age");

  std::vector<FieldHistory> runs;
  for (double w : widths) {
    std::vector<double> targets;
    for (double s : grid) targets.push_back(s - w * w);
    SolverOptions o = opts;
    o.store_times = targets;
    const Field datum = concentrated_datum(F, center, t_center, w);
    FieldHistory run;
    if (conjugate) {
      run = F.spec.is_grid_kind() ? solve_grid(flow, datum, true, 0.0, targets, o)
                                  : solve_zonal(flow, datum, true, 0.0, targets, o);
    } else {
      run = F.spec.is_grid_kind()
                ? solve_grid(flow, datum, false, t_center, shifted(targets, t_center), o)
                : solve_zonal(flow, datum, false, t_center, shifted(targets, t_center), o);
    }
    runs.push_back(std::move(run));
  }

  // Assemble on the shifted grid; node 0 of each run is the datum (dropped).
  const int k = (int)widths.size();
  const int nn = (int)grid.size();
  const int nc = F.cells();
  FieldHistory out;
  out.flow = flow;
  out.dir = conjugate ? TimeDirection::conjugate_tau : TimeDirection::forward_t;
  out.solver_dt = runs.back().solver_dt;
  out.has_center = true;
  out.center = center;
  out.t_center = t_center;
  if (!conjugate) out.t_init = t_center;
  out.times.resize(nn);
  for (int i = 0; i < nn; ++i)
    out.times[i] = conjugate ? grid[i] : t_center + grid[i];
  out.values.assign(nn, Field(nc));

  std::vector<double> x(k), tab(k);
  for (int i = 0; i < k; ++i) x[i] = widths[i] * widths[i];
  double err = 0;
  for (int node = 0; node < nn; ++node) {
    double node_err = 0, node_max = 0;
    for (int c = 0; c < nc; ++c) {
      for (int i = 0; i < k; ++i) tab[i] = runs[i].values[node + 1][c];
      double prev = tab[k - 1];
      for (int j = 1; j < k; ++j) {
        if (j == k - 1) prev = tab[k - 1];
        for (int i = k - 1; i >= j; --i)
          tab[i] = tab[i] + (tab[i] - tab[i - 1]) * x[i] / (x[i - j] - x[i]);
      }
      out.values[node][c] = tab[k - 1];
      node_err = std::max(node_err, std::abs(tab[k - 1] - prev));
      node_max = std::max(node_max, std::abs(tab[k - 1]));
    }
    if (node_max > 0) err = std::max(err, node_err / node_max);
  }
  out.width_error = err;
  for (Field& f : out.values) apply_mask_floor(f);
  fill_mass(F, out.dir, out);
  return out;
}

}  // namespace

FieldHistory fundamental_solution(FlowPtr flow, Vec2 center, double tau_end,
                                  std::vector<double> widths,
                                  const SolverOptions& opts) {
  return width_extrapolated(flow, center, true, flow->spec.horizon, tau_end,
                            std::move(widths), opts);
}

FieldHistory forward_fundamental_solution(FlowPtr flow, Vec2 center,
                                          double t_center, double t_end,
                                          std::vector<double> widths,
                                          const SolverOptions& opts) {
  return width_extrapolated(flow, center, false, t_center, t_end - t_center,
                            std::move(widths), opts);
}

FieldHistory constant_history(FlowPtr flow, double value) {
  if (value <= 0) throw std::invalid_argument("constant history must be positive");
  FieldHistory out;
  out.flow = flow;
  out.dir = TimeDirection::forward_t;
  out.times = {0.0, flow->spec.horizon};
  out.values = {Field(flow->cells(), value), Field(flow->cells(), value)};
  fill_mass(*flow, out.dir, out);
  return out;
}

FieldHistory fourier_caloric_history(FlowPtr flow,
                                     const std::vector<FourierMode>& modes,
                                     double t_ref,
                                     const std::vector<double>& t_nodes) {
  const FlowSolution& F = *flow;
  if (!F.spec.is_static() || !F.spec.is_grid_kind())
    throw std::invalid_argument("fourier caloric history needs a static grid");
  const GridShape g = F.grid();
  FieldHistory out;
  out.flow = flow;
  out.dir = TimeDirection::forward_t;
  out.t_init = t_ref;
  out.times = t_nodes;
  for (double t : t_nodes) {
    Field f(g.cells(), 1.0);
    for (const auto& m : modes) {
      const double wx = 2.0 * M_PI * m.kx / g.lx;
      const double wy = 2.0 * M_PI * m.ky / g.ly;
      const double lam = wx * wx + wy * wy;
      const double a = m.amp * std::exp(-lam * (t - t_ref));
      for (int c = 0; c < g.cells(); ++c) {
        const Vec2 p = g.point(c);
        f[c] += a * std::cos(wx * p.x) * std::cos(wy * p.y);
      }
    }
    for (double v : f)
      if (v <= 0)
        throw std::invalid_argument("fourier caloric history went nonpositive");
    out.values.push_back(std::move(f));
  }
  fill_mass(F, out.dir, out);
  return out;
}

// ---------------------------------------------------------------------------
// Closed forms

double closed_form_kernel(const BackgroundSpec& spec, Vec2 x, Vec2 y, double tau) {
  if (tau <= 0) throw std::invalid_argument("closed_form_kernel needs tau > 0");
  switch (spec.kind) {
    case Kind::euclidean_static: {
      const double d = std::sqrt(norm_sq(y - x));
      return gaussian_kernel_value(d, tau, spec.n);
    }
    case Kind::flat_torus_static:
      return flat_kernel_point(spec.grid(), true, x, y, tau).u;
    default:
      throw std::invalid_argument("closed_form_kernel: unsupported kind");
  }
}

FieldHistory exact_kernel_history(FlowPtr flow, Vec2 center,
                                  const std::vector<double>& tau_nodes) {
  const FlowSolution& F = *flow;
  if (!std::is_sorted(tau_nodes.begin(), tau_nodes.end()))
    throw std::invalid_argument("tau nodes must increase");
  FieldHistory out;
  out.flow = flow;
  out.dir = TimeDirection::conjugate_tau;
  out.has_center = true;
  out.center = center;
  out.t_center = F.spec.horizon;
  out.times = tau_nodes;
  out.values.reserve(tau_nodes.size());
  if (F.spec.is_static()) {
    const GridShape g = F.grid();
    const bool wrap = F.spec.kind == Kind::flat_torus_static;
    for (double tau : tau_nodes) {
      Field f(g.cells());
      for (int c = 0; c < g.cells(); ++c)
        f[c] = flat_kernel_point(g, wrap, center, g.point(c), tau).u;
      apply_mask_floor(f);
      out.values.push_back(std::move(f));
    }
  } else if (F.spec.kind == Kind::shrinking_sphere) {
    const double rT2 = F.rho_sq(F.spec.horizon);
    for (double tau : tau_nodes) {
      Field f = sphere_conjugate_kernel(F.zonal(), rT2, tau);
      apply_mask_floor(f);
      out.values.push_back(std::move(f));
    }
  } else {
    throw std::invalid_argument("exact kernel history: no closed form for this kind");
  }
  fill_mass(F, out.dir, out);
  return out;
}

FieldHistory exact_forward_kernel_history(FlowPtr flow, Vec2 center,
                                          double t_center,
                                          const std::vector<double>& t_nodes) {
  const FlowSolution& F = *flow;
  FieldHistory out;
  out.flow = flow;
  out.dir = TimeDirection::forward_t;
  out.has_center = true;
  out.center = center;
  out.t_center = t_center;
  out.t_init = t_center;
  out.times = t_nodes;
  if (F.spec.is_static()) {
    const GridShape g = F.grid();
    const bool wrap = F.spec.kind == Kind::flat_torus_static;
    for (double t : t_nodes) {
      if (t <= t_center) throw std::invalid_argument("forward kernel needs t > center");
      Field f(g.cells());
      for (int c = 0; c < g.cells(); ++c)
        f[c] = flat_kernel_point(g, wrap, center, g.point(c), t - t_center).u;
      apply_mask_floor(f);
      out.values.push_back(std::move(f));
    }
  } else if (F.spec.kind == Kind::shrinking_sphere) {
    for (double t : t_nodes) {
      Field f = sphere_forward_kernel(F.zonal(), F.spec, t_center, t);
      apply_mask_floor(f);
      out.values.push_back(std::move(f));
    }
  } else {
    throw std::invalid_argument("exact kernel history: no closed form for this kind");
  }
  fill_mass(F, out.dir, out);
  return out;
}

}  // namespace lyh
