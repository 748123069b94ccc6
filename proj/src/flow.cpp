#include "lyh/flow.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace lyh {

namespace {

int locate(const std::vector<double>& ts, double t) {
  // Largest k with ts[k] <= t (clamped to [0, size-2]).
  auto it = std::upper_bound(ts.begin(), ts.end(), t);
  int k = (int)(it - ts.begin()) - 1;
  return std::clamp(k, 0, (int)ts.size() - 2);
}

}  // namespace

void FlowSolution::check_time(double t) const {
  const double slack = 1e-12 * std::max(1.0, spec.horizon);
  if (t < -slack || t > spec.horizon + slack)
    throw std::out_of_range("time outside [0, T]");
}

Field FlowSolution::phi_at(double t) const {
  check_time(t);
  if (phi_nodes.empty()) return Field(grid_.cells(), 0.0);
  if (phi_nodes.size() == 1) return phi_nodes[0];
  const int k = locate(times, t);
  const double a = (t - times[k]) / (times[k + 1] - times[k]);
  Field out(grid_.cells());
  for (int c = 0; c < grid_.cells(); ++c)
    out[c] = (1 - a) * phi_nodes[k][c] + a * phi_nodes[k + 1][c];
  return out;
}

double FlowSolution::metric_coeff(int cell, double t) const {
  check_time(t);
  if (phi_nodes.empty()) return 1.0;
  if (phi_nodes.size() == 1) return std::exp(2.0 * phi_nodes[0][cell]);
  const int k = locate(times, t);
  const double a = (t - times[k]) / (times[k + 1] - times[k]);
  const double p = (1 - a) * phi_nodes[k][cell] + a * phi_nodes[k + 1][cell];
  return std::exp(2.0 * p);
}

double FlowSolution::rho_sq(double t) const {
  if (spec.kind != Kind::shrinking_sphere)
    throw std::logic_error("rho_sq is defined for the sphere kind only");
  check_time(t);
  return sphere_rho_sq(spec, t);
}

Field FlowSolution::scalar_curvature(double t) const {
  check_time(t);
  if (spec.kind == Kind::shrinking_sphere)
    return Field(zonal_.m, spec.n * (spec.n - 1) / rho_sq(t));
  if (spec.is_static()) return Field(grid_.cells(), 0.0);
  // R = -2 e^{-2 phi} lap0 phi
  const Field p = phi_at(t);
  Field lap;
  spectral_workspace(grid_).laplacian(p, lap);
  Field out(grid_.cells());
  for (int c = 0; c < grid_.cells(); ++c)
    out[c] = -2.0 * std::exp(-2.0 * p[c]) * lap[c];
  return out;
}

double FlowSolution::mu_weight(int cell, double t) const {
  if (spec.kind == Kind::shrinking_sphere)
    return zonal_weight(zonal_, cell, std::sqrt(rho_sq(t)));
  return grid_.cell_area() * metric_coeff(cell, t);
}

Field FlowSolution::mu_weights(double t) const {
  Field w(cells());
  if (spec.kind == Kind::shrinking_sphere) {
    const double rho = std::sqrt(rho_sq(t));
    for (int j = 0; j < zonal_.m; ++j) w[j] = zonal_weight(zonal_, j, rho);
    return w;
  }
  if (phi_nodes.empty()) {
    std::fill(w.begin(), w.end(), grid_.cell_area());
    return w;
  }
  const Field p = phi_at(t);
  for (int c = 0; c < grid_.cells(); ++c)
    w[c] = grid_.cell_area() * std::exp(2.0 * p[c]);
  return w;
}

FlowSolution FlowSolution::make_static(const BackgroundSpec& spec) {
  spec.validate();
  if (!spec.is_static()) throw std::invalid_argument("make_static: wrong kind");
  FlowSolution f;
  f.spec = spec;
  f.grid_ = spec.grid();
  f.times = {0.0, spec.horizon};
  return f;
}

FlowSolution FlowSolution::make_sphere(const BackgroundSpec& spec) {
  spec.validate();
  if (spec.kind != Kind::shrinking_sphere)
    throw std::invalid_argument("make_sphere: wrong kind");
  FlowSolution f;
  f.spec = spec;
  f.zonal_ = spec.zonal();
  const int nodes = 64;
  f.times.resize(nodes + 1);
  for (int k = 0; k <= nodes; ++k) f.times[k] = spec.horizon * k / nodes;
  return f;
}

FlowSolution shrinking_sphere_solution(const BackgroundSpec& spec) {
  return FlowSolution::make_sphere(spec);
}

FlowPtr make_flow(const BackgroundSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case Kind::euclidean_static:
    case Kind::flat_torus_static:
      return std::make_shared<FlowSolution>(FlowSolution::make_static(spec));
    case Kind::shrinking_sphere:
      return std::make_shared<FlowSolution>(FlowSolution::make_sphere(spec));
    case Kind::conformal_torus_flow: {
      const GridShape g = spec.grid();
      const double h = std::min(g.hx(), g.hy());
      double min_coeff = std::exp(2.0 * *std::min_element(spec.phi0.begin(), spec.phi0.end()));
      const double dt_max = 0.2 * h * h * min_coeff;
      const int steps = std::max(1, (int)std::ceil(spec.horizon / dt_max));
      return std::make_shared<FlowSolution>(evolve_conformal_flow(spec, steps));
    }
  }
  throw std::logic_error("unreachable");
}

FlowSolution evolve_conformal_flow(const BackgroundSpec& spec, int steps, double cfl) {
  spec.validate();
  if (spec.kind != Kind::conformal_torus_flow)
    throw std::invalid_argument("evolve_conformal_flow: wrong kind");
  if (steps < 1) throw std::invalid_argument("steps must be positive");

  const GridShape g = spec.grid();
  const auto& ws = spectral_workspace(g);
  const double h = std::min(g.hx(), g.hy());
  const double dt = spec.horizon / steps;

  auto rhs = [&](const Field& p, Field& out) {
    ws.laplacian(p, out);
    for (int c = 0; c < g.cells(); ++c) out[c] *= std::exp(-2.0 * p[c]);
  };

  auto check_stable = [&](const Field& p) {
    const double mn = *std::min_element(p.begin(), p.end());
    const double limit = cfl * h * h * std::exp(2.0 * mn);
    if (dt > limit)
      throw std::runtime_error("conformal flow step violates the stability constraint");
  };

  // Thin storage down to the finer of ~h-spaced nodes and 32 per horizon
  // (downstream interpolation needs nodes inside the diffusive timescale).
  const double node_dt = std::min(0.5 * h, spec.horizon / 32.0);
  const int thin = std::max(1, (int)std::llround(node_dt / dt));

  FlowSolution flow;
  flow.spec = spec;
  flow.grid_ = g;

  Field p = spec.phi0;
  check_stable(p);
  flow.times.push_back(0.0);
  flow.phi_nodes.push_back(p);

  Field k1, k2, k3, k4, tmp(g.cells());
  for (int s = 0; s < steps; ++s) {
    rhs(p, k1);
    for (int c = 0; c < g.cells(); ++c) tmp[c] = p[c] + 0.5 * dt * k1[c];
    rhs(tmp, k2);
    for (int c = 0; c < g.cells(); ++c) tmp[c] = p[c] + 0.5 * dt * k2[c];
    rhs(tmp, k3);
    for (int c = 0; c < g.cells(); ++c) tmp[c] = p[c] + dt * k3[c];
    rhs(tmp, k4);
    for (int c = 0; c < g.cells(); ++c)
      p[c] += dt / 6.0 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);

    for (double v : p)
      if (!std::isfinite(v))
        throw std::runtime_error("conformal flow blew up before the horizon");
    check_stable(p);

    if ((s + 1) % thin == 0 || s + 1 == steps) {
      flow.times.push_back(dt * (s + 1));
      flow.phi_nodes.push_back(p);
    }
  }
  flow.times.back() = spec.horizon;  // guard against rounding drift

  // Midpoint-evaluated residual between stored nodes.
  double resid = 0.0;
  Field mid(g.cells()), r(g.cells());
  for (size_t k = 0; k + 1 < flow.phi_nodes.size(); ++k) {
    const double dtn = flow.times[k + 1] - flow.times[k];
    for (int c = 0; c < g.cells(); ++c)
      mid[c] = 0.5 * (flow.phi_nodes[k][c] + flow.phi_nodes[k + 1][c]);
    rhs(mid, r);
    for (int c = 0; c < g.cells(); ++c) {
      const double d = (flow.phi_nodes[k + 1][c] - flow.phi_nodes[k][c]) / dtn - r[c];
      resid = std::max(resid, std::abs(d));
    }
  }
  flow.flow_residual = resid;
  return flow;
}

MeasureEvolutionReport check_measure_evolution(const FlowSolution& flow,
                                               double t_min) {
  MeasureEvolutionReport rep;
  const auto& ts = flow.times;
  for (size_t k = 1; k + 1 < ts.size(); ++k) {
    if (ts[k] < t_min) continue;
    const Field wm = flow.mu_weights(ts[k - 1]);
    const Field w0 = flow.mu_weights(ts[k]);
    const Field wp = flow.mu_weights(ts[k + 1]);
    const Field R = flow.scalar_curvature(ts[k]);
    const double tm = ts[k - 1], t0 = ts[k], tp = ts[k + 1];
    const double cm = (t0 - tp) / ((tm - t0) * (tm - tp));
    const double c0 = (2 * t0 - tm - tp) / ((t0 - tm) * (t0 - tp));
    const double cp = (t0 - tm) / ((tp - tm) * (tp - t0));
    for (int c = 0; c < flow.cells(); ++c) {
      const double ddt = cm * wm[c] + c0 * w0[c] + cp * wp[c];
      rep.max_residual =
          std::max(rep.max_residual, std::abs(ddt + R[c] * w0[c]) / w0[c]);
      ++rep.samples;
    }
  }
  return rep;
}

// --- model_geometries operations -------------------------------------------

MetricSample metric_at(const FlowSolution& flow, double t, int cell) {
  flow.check_time(t);
  MetricSample s;
  s.t = t;
  if (flow.spec.kind == Kind::shrinking_sphere) {
    s.coeff = flow.rho_sq(t);
  } else {
    s.coeff = flow.metric_coeff(cell, t);
  }
  if (s.coeff <= 0) throw std::runtime_error("metric degenerated");
  s.mu_weight = flow.mu_weight(cell, t);
  return s;
}

CurvatureSample curvature_at(const FlowSolution& flow, double t, int cell) {
  flow.check_time(t);
  CurvatureSample s;
  if (flow.spec.is_static()) return s;
  if (flow.spec.kind == Kind::shrinking_sphere) {
    const int n = flow.spec.n;
    const double r2 = flow.rho_sq(t);
    s.R = n * (n - 1) / r2;
    s.ricci_lower = (n - 1) / r2;
    s.grad_R_sq = 0.0;
    return s;
  }
  const Field R = flow.scalar_curvature(t);
  Derivs d;
  spectral_workspace(flow.grid()).all_derivs(R, d);
  const double e2p = flow.metric_coeff(cell, t);
  s.R = R[cell];
  s.ricci_lower = 0.5 * R[cell];  // n = 2: Ric = (R/2) g
  s.grad_R_sq = (d.dx[cell] * d.dx[cell] + d.dy[cell] * d.dy[cell]) / e2p;
  return s;
}

std::pair<double, double> curvature_bounds(const FlowSolution& flow, double t0,
                                           double t1) {
  flow.check_time(t0);
  flow.check_time(t1);
  if (t1 < t0) std::swap(t0, t1);
  double k1 = 0.0, k2 = 0.0;
  if (flow.spec.is_static()) return {0.0, 0.0};
  if (flow.spec.kind == Kind::shrinking_sphere) {
    // R(t) = n(n-1)/rho(t)^2 increases with t; Ric > 0.
    const int n = flow.spec.n;
    k2 = n * (n - 1) / flow.rho_sq(t1);
    return {0.0, k2};
  }
  std::vector<double> samples;
  for (double t : flow.times)
    if (t >= t0 - 1e-14 && t <= t1 + 1e-14) samples.push_back(t);
  if (samples.empty()) samples = {t0, t1};
  const auto& ws = spectral_workspace(flow.grid());
  for (double t : samples) {
    const Field R = flow.scalar_curvature(t);
    const Field phi = flow.phi_at(t);
    Derivs d;
    ws.all_derivs(R, d);
    for (int c = 0; c < flow.cells(); ++c) {
      const double e2p = std::exp(2.0 * phi[c]);
      const double gradRsq = (d.dx[c] * d.dx[c] + d.dy[c] * d.dy[c]) / e2p;
      k1 = std::max(k1, -0.5 * R[c]);
      k2 = std::max({k2, R[c], gradRsq});
    }
  }
  return {std::max(0.0, k1), std::max(0.0, k2)};
}

// --- distance ---------------------------------------------------------------

namespace {

// Dijkstra over a 16-neighbor periodic grid graph (axial, diagonal and
// knight moves) with Simpson-rule metric edge lengths.  The knight moves cut
// the worst-case angular bias of the graph metric below 0.6%.
Field dijkstra(const GridShape& g, const Field& phi,
               const std::vector<std::pair<int, double>>& seeds) {
  struct Item {
    double d;
    int cell;
    bool operator>(const Item& o) const { return d > o.d; }
  };
  const int nx = g.nx, ny = g.ny;
  static const int OX[16] = {1, -1, 0, 0, 1, 1, -1, -1, 2, 2, -2, -2, 1, -1, 1, -1};
  static const int OY[16] = {0, 0, 1, -1, 1, -1, 1, -1, 1, -1, 1, -1, 2, 2, -2, -2};
  const double hx = g.hx(), hy = g.hy();
  std::vector<double> dist(g.cells(), std::numeric_limits<double>::infinity());
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  for (const auto& [cell, d0] : seeds) {
    if (d0 < dist[cell]) {
      dist[cell] = d0;
      pq.push({d0, cell});
    }
  }
  while (!pq.empty()) {
    auto [d, c] = pq.top();
    pq.pop();
    if (d > dist[c]) continue;
    const int ci = c / ny, cj = c % ny;
    const Vec2 pc = g.point(c);
    const double ephi_c = std::exp(phi[c]);
    for (int o = 0; o < 16; ++o) {
      const int ni = (ci + OX[o] + nx) % nx;
      const int nj = (cj + OY[o] + ny) % ny;
      const int n = ni * ny + nj;
      const double flat = std::hypot(OX[o] * hx, OY[o] * hy);
      const Vec2 mid{pc.x + 0.5 * OX[o] * hx, pc.y + 0.5 * OY[o] * hy};
      const double w = flat / 6.0 *
                       (ephi_c + 4.0 * std::exp(interp_periodic(g, phi, mid)) +
                        std::exp(phi[n]));
      if (dist[c] + w < dist[n]) {
        dist[n] = dist[c] + w;
        pq.push({dist[n], n});
      }
    }
  }
  return dist;
}

int nearest_cell(const GridShape& g, Vec2 p) {
  int i = (int)std::llround(p.x / g.hx());
  int j = (int)std::llround(p.y / g.hy());
  i = ((i % g.nx) + g.nx) % g.nx;
  j = ((j % g.ny) + g.ny) % g.ny;
  return g.index(i, j);
}

}  // namespace

Field distance_field(const FlowSolution& flow, double t, Vec2 source) {
  flow.check_time(t);
  const GridShape g = flow.grid();
  switch (flow.spec.kind) {
    case Kind::euclidean_static: {
      Field d(g.cells());
      for (int c = 0; c < g.cells(); ++c)
        d[c] = std::sqrt(norm_sq(g.point(c) - source));
      return d;
    }
    case Kind::flat_torus_static: {
      Field d(g.cells());
      for (int c = 0; c < g.cells(); ++c) d[c] = wrap_distance(g, source, g.point(c));
      return d;
    }
    case Kind::conformal_torus_flow: {
      const Field phi = flow.phi_at(t);
      // Seed the four cells around the source with straight-segment metric
      // lengths so endpoint snapping costs O(h^2) only.
      std::vector<std::pair<int, double>> seeds;
      const int i0 = (int)std::floor(source.x / g.hx());
      const int j0 = (int)std::floor(source.y / g.hy());
      for (int di = 0; di <= 1; ++di) {
        for (int dj = 0; dj <= 1; ++dj) {
          const int i = ((i0 + di) % g.nx + g.nx) % g.nx;
          const int j = ((j0 + dj) % g.ny + g.ny) % g.ny;
          const int cell = g.index(i, j);
          const Vec2 p = g.point(cell);
          const Vec2 delta = wrap_delta(g, source, p);
          const Vec2 mid = source + 0.5 * delta;
          const double len = std::sqrt(norm_sq(delta)) / 6.0 *
                             (std::exp(interp_periodic(g, phi, source)) +
                              4.0 * std::exp(interp_periodic(g, phi, mid)) +
                              std::exp(phi[cell]));
          seeds.push_back({cell, len});
        }
      }
      return dijkstra(g, phi, seeds);
    }
    case Kind::shrinking_sphere:
      throw std::invalid_argument("distance_field: use sphere_distance_from_pole");
  }
  throw std::logic_error("unreachable");
}

double distance(const FlowSolution& flow, double t, Vec2 x, Vec2 y) {
  flow.check_time(t);
  const GridShape g = flow.grid();
  switch (flow.spec.kind) {
    case Kind::euclidean_static:
      return std::sqrt(norm_sq(y - x));
    case Kind::flat_torus_static:
      return wrap_distance(g, x, y);
    case Kind::conformal_torus_flow: {
      const Vec2 delta = wrap_delta(g, x, y);
      const double flat = std::sqrt(norm_sq(delta));
      if (flat <= 3.0 * std::max(g.hx(), g.hy())) {
        const Field phi = flow.phi_at(t);
        const Vec2 mid = x + 0.5 * delta;
        return flat / 6.0 *
               (std::exp(interp_periodic(g, phi, x)) +
                4.0 * std::exp(interp_periodic(g, phi, mid)) +
                std::exp(interp_periodic(g, phi, y)));
      }
      const Field d = distance_field(flow, t, x);
      return interp_periodic(g, d, y);
    }
    case Kind::shrinking_sphere:
      throw std::invalid_argument("distance: use sphere_distance_from_pole");
  }
  throw std::logic_error("unreachable");
}

double sphere_distance_from_pole(const FlowSolution& flow, double t, double theta) {
  if (flow.spec.kind != Kind::shrinking_sphere)
    throw std::invalid_argument("sphere_distance_from_pole: wrong kind");
  flow.check_time(t);
  return std::sqrt(flow.rho_sq(t)) * theta;
}

}  // namespace lyh
