#include "lyh/reduced.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace lyh {

namespace {

// Samples phi, R and their gradients at arbitrary (point, t) by blending the
// flow's stored nodes; trivial fast path for static flat backgrounds.
class GridFlowSampler {
 public:
  explicit GridFlowSampler(const FlowSolution& F) : F_(F), g_(F.grid()) {
    trivial_ = F.spec.is_static();
    if (trivial_) return;
    const auto& ws = spectral_workspace(g_);
    for (size_t k = 0; k < F.times.size(); ++k) {
      const double t = F.times[k];
      phi_.push_back(F.phi_at(t));
      Field R = F.scalar_curvature(t);
      Derivs dp, dr;
      ws.all_derivs(phi_.back(), dp);
      ws.all_derivs(R, dr);
      phix_.push_back(std::move(dp.dx));
      phiy_.push_back(std::move(dp.dy));
      Rx_.push_back(std::move(dr.dx));
      Ry_.push_back(std::move(dr.dy));
      R_.push_back(std::move(R));
    }
  }

  struct Sample {
    double e2phi = 1.0;
    Vec2 grad_phi;
    double R = 0.0;
    Vec2 grad_R;
  };

  Sample at(Vec2 p, double t) const {
    Sample s;
    if (trivial_) return s;
    const auto& ts = F_.times;
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    int k = std::clamp((int)(it - ts.begin()) - 1, 0, (int)ts.size() - 2);
    const double a = std::clamp((t - ts[k]) / (ts[k + 1] - ts[k]), 0.0, 1.0);
    auto blend = [&](const std::vector<Field>& f) {
      return (1 - a) * interp_periodic(g_, f[k], p) +
             a * interp_periodic(g_, f[k + 1], p);
    };
    s.e2phi = std::exp(2.0 * blend(phi_));
    s.grad_phi = {blend(phix_), blend(phiy_)};
    s.R = blend(R_);
    s.grad_R = {blend(Rx_), blend(Ry_)};
    return s;
  }

  bool trivial() const { return trivial_; }

 private:
  const FlowSolution& F_;
  GridShape g_;
  bool trivial_ = true;
  std::vector<Field> phi_, phix_, phiy_, R_, Rx_, Ry_;
};

struct SphereCoefs {
  // metric and curvature along the conjugate time axis s (tau): the base
  // point sits at tau = 0, so rho~(s)^2 = rho(T)^2 + 2(n-1)s.
  double rhoT_sq;
  int n;
  double rho_sq(double s) const { return rhoT_sq + 2.0 * (n - 1) * s; }
  double R(double s) const { return n * (n - 1) / rho_sq(s); }
};

constexpr double kSimpsonW[3] = {1.0, 4.0, 1.0};

double grid_L(const FlowSolution& F, const GridFlowSampler& smp,
              const std::vector<Vec2>& pts, double dsig) {
  const double T = F.spec.horizon;
  const int M = (int)pts.size() - 1;
  double L = 0;
  for (int i = 0; i < M; ++i) {
    const Vec2 v = (1.0 / dsig) * (pts[i + 1] - pts[i]);
    const double vsq = norm_sq(v);
    double seg = 0;
    for (int q = 0; q < 3; ++q) {
      const double frac = 0.5 * q;
      const double sig = (i + frac) * dsig;
      const double s = sig * sig;
      if (smp.trivial()) {
        seg += kSimpsonW[q] * 0.5 * vsq;
      } else {
        const Vec2 p = (1 - frac) * pts[i] + frac * pts[i + 1];
        const auto sm = smp.at(p, T - s);
        seg += kSimpsonW[q] * (0.5 * sm.e2phi * vsq + 2.0 * s * sm.R);
      }
    }
    L += dsig / 6.0 * seg;
  }
  return L;
}

void grid_L_grad(const FlowSolution& F, const GridFlowSampler& smp,
                 const std::vector<Vec2>& pts, double dsig,
                 std::vector<Vec2>& grad) {
  const double T = F.spec.horizon;
  const int M = (int)pts.size() - 1;
  grad.assign(pts.size(), Vec2{});
  for (int i = 0; i < M; ++i) {
    const Vec2 v = (1.0 / dsig) * (pts[i + 1] - pts[i]);
    const double vsq = norm_sq(v);
    for (int q = 0; q < 3; ++q) {
      const double frac = 0.5 * q;
      const double sig = (i + frac) * dsig;
      const double s = sig * sig;
      double e2phi = 1.0;
      Vec2 gpos{};
      if (!smp.trivial()) {
        const Vec2 p = (1 - frac) * pts[i] + frac * pts[i + 1];
        const auto sm = smp.at(p, T - s);
        e2phi = sm.e2phi;
        // position derivative of the integrand
        gpos = (vsq * sm.e2phi) * sm.grad_phi + (2.0 * s) * sm.grad_R;
      }
      const double wq = kSimpsonW[q] / 6.0;
      const Vec2 dv = (wq * e2phi) * v;  // d(integrand)/dv * dsig absorbed
      grad[i] = grad[i] - dv;
      grad[i + 1] = grad[i + 1] + dv;
      const Vec2 dp = (dsig * wq) * gpos;
      grad[i] = grad[i] + (1 - frac) * dp;
      grad[i + 1] = grad[i + 1] + frac * dp;
    }
  }
}

double zonal_L(const SphereCoefs& co, const std::vector<double>& th, double dsig) {
  const int M = (int)th.size() - 1;
  double L = 0;
  for (int i = 0; i < M; ++i) {
    const double v = (th[i + 1] - th[i]) / dsig;
    double seg = 0;
    for (int q = 0; q < 3; ++q) {
      const double sig = (i + 0.5 * q) * dsig;
      const double s = sig * sig;
      seg += kSimpsonW[q] * (0.5 * co.rho_sq(s) * v * v + 2.0 * s * co.R(s));
    }
    L += dsig / 6.0 * seg;
  }
  return L;
}

void zonal_L_grad(const SphereCoefs& co, const std::vector<double>& th,
                  double dsig, std::vector<double>& grad) {
  const int M = (int)th.size() - 1;
  grad.assign(th.size(), 0.0);
  for (int i = 0; i < M; ++i) {
    const double v = (th[i + 1] - th[i]) / dsig;
    double coef = 0;
    for (int q = 0; q < 3; ++q) {
      const double sig = (i + 0.5 * q) * dsig;
      coef += kSimpsonW[q] * co.rho_sq(sig * sig);
    }
    const double dv = coef / 6.0 * v;
    grad[i] -= dv;
    grad[i + 1] += dv;
  }
}

// Backtracking descent over the interior nodes.  `eval` and `gradient`
// operate on the flattened interior coordinates.
template <typename EvalF, typename GradF>
std::pair<double, bool> descend(std::vector<double>& x, EvalF eval, GradF gradient,
                                const MinimizeOptions& opts, double scale) {
  double L = eval(x);
  std::vector<double> g, trial(x.size());
  int calm = 0;
  double alpha = 0.0;
  bool converged = false;
  for (int it = 0; it < opts.max_iters; ++it) {
    gradient(x, g);
    double gmax = 0, gsq = 0;
    for (double v : g) {
      gmax = std::max(gmax, std::abs(v));
      gsq += v * v;
    }
    if (gmax < 1e-14 * (1.0 + std::abs(L)) / (scale + 1e-300)) {
      converged = true;
      break;
    }
    if (alpha <= 0) alpha = 0.25 * scale / (gmax + 1e-300);
    double Lnew = L;
    bool accepted = false;
    for (int bt = 0; bt < 50; ++bt) {
      for (size_t i = 0; i < x.size(); ++i) trial[i] = x[i] - alpha * g[i];
      Lnew = eval(trial);
      if (Lnew <= L - 1e-4 * alpha * gsq) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      converged = true;  // no descent direction progress at machine scale
      break;
    }
    const double drop = (L - Lnew) / std::max({std::abs(L), std::abs(Lnew), 1e-300});
    x = trial;
    L = Lnew;
    alpha *= 1.6;
    calm = drop < opts.rel_tol ? calm + 1 : 0;
    if (calm >= opts.patience) {
      converged = true;
      break;
    }
  }
  return {L, converged};
}

}  // namespace

double L_length(const FlowSolution& flow, const LGeodesicPath& path) {
  if (path.sigma.size() < 2) throw std::invalid_argument("path needs >= 2 nodes");
  const double dsig = path.sigma[1] - path.sigma[0];
  const double tau = path.sigma.back() * path.sigma.back();
  if (flow.spec.horizon + 1e-12 < tau)
    throw std::out_of_range("path escapes the flow's time horizon");
  if (flow.spec.kind == Kind::shrinking_sphere) {
    SphereCoefs co{flow.rho_sq(flow.spec.horizon), flow.spec.n};
    return zonal_L(co, path.thetas, dsig);
  }
  GridFlowSampler smp(flow);
  return grid_L(flow, smp, path.pts, dsig);
}

namespace {

LGeodesicPath run_grid_candidates(const FlowSolution& flow,
                                  const GridFlowSampler& smp, Vec2 x, Vec2 y,
                                  double tau, const MinimizeOptions& opts) {
  const int M = opts.segments;
  const double dsig = std::sqrt(tau) / M;
  const GridShape g = flow.grid();
  const bool torus = flow.spec.kind != Kind::euclidean_static;

  std::vector<Vec2> targets;
  if (torus) {
    const Vec2 base = x + wrap_delta(g, x, y);
    for (int mx = -opts.wrap_extent; mx <= opts.wrap_extent; ++mx)
      for (int my = -opts.wrap_extent; my <= opts.wrap_extent; ++my)
        targets.push_back({base.x + mx * g.lx, base.y + my * g.ly});
  } else {
    targets.push_back(y);
  }

  LGeodesicPath best;
  best.L = std::numeric_limits<double>::infinity();

  auto run = [&](const std::vector<Vec2>& init) {
    std::vector<double> xs(2 * (M - 1));
    for (int i = 1; i < M; ++i) {
      xs[2 * (i - 1)] = init[i].x;
      xs[2 * (i - 1) + 1] = init[i].y;
    }
    std::vector<Vec2> pts(M + 1);
    pts[0] = init[0];
    pts[M] = init[M];
    auto unpack = [&](const std::vector<double>& v) {
      for (int i = 1; i < M; ++i) pts[i] = {v[2 * (i - 1)], v[2 * (i - 1) + 1]};
    };
    auto eval = [&](const std::vector<double>& v) {
      unpack(v);
      return grid_L(flow, smp, pts, dsig);
    };
    std::vector<Vec2> gv;
    auto gradf = [&](const std::vector<double>& v, std::vector<double>& out) {
      unpack(v);
      grid_L_grad(flow, smp, pts, dsig, gv);
      out.resize(2 * (M - 1));
      for (int i = 1; i < M; ++i) {
        out[2 * (i - 1)] = gv[i].x;
        out[2 * (i - 1) + 1] = gv[i].y;
      }
    };
    const double scale = std::max(1e-6, std::sqrt(norm_sq(init[M] - init[0])) + dsig);
    auto [L, conv] = descend(xs, eval, gradf, opts, scale);
    if (L < best.L) {
      unpack(xs);
      best.L = L;
      best.pts = pts;
      best.converged = conv;
    }
  };

  for (const Vec2& tgt : targets) {
    std::vector<Vec2> init(M + 1);
    for (int i = 0; i <= M; ++i)
      init[i] = x + (double(i) / M) * (tgt - x);
    run(init);
  }
  // Constant-then-move profile toward the nearest image (helps far targets
  // on positively curved flows).
  {
    const Vec2 tgt = torus ? x + wrap_delta(g, x, y) : y;
    std::vector<Vec2> init(M + 1);
    const int pivot = (7 * M) / 10;
    for (int i = 0; i <= M; ++i) {
      const double a = i <= pivot ? 0.0 : double(i - pivot) / (M - pivot);
      init[i] = x + a * (tgt - x);
    }
    run(init);
  }

  best.sigma.resize(M + 1);
  for (int i = 0; i <= M; ++i) best.sigma[i] = i * dsig;
  best.ell = best.L / (2.0 * std::sqrt(tau));
  return best;
}

}  // namespace

LGeodesicPath minimize_L(const FlowSolution& flow, Vec2 x, Vec2 y, double tau,
                         const MinimizeOptions& opts) {
  if (tau <= 0 || tau > flow.spec.horizon)
    throw std::invalid_argument("tau must lie in (0, T]");
  if (flow.spec.kind == Kind::shrinking_sphere)
    throw std::invalid_argument("use minimize_L_zonal on the sphere");
  GridFlowSampler smp(flow);
  return run_grid_candidates(flow, smp, x, y, tau, opts);
}

LGeodesicPath minimize_L_zonal(const FlowSolution& flow, double theta_y,
                               double tau, const MinimizeOptions& opts) {
  if (flow.spec.kind != Kind::shrinking_sphere)
    throw std::invalid_argument("minimize_L_zonal needs the sphere kind");
  if (tau <= 0 || tau > flow.spec.horizon)
    throw std::invalid_argument("tau must lie in (0, T]");
  const int M = opts.segments;
  const double dsig = std::sqrt(tau) / M;
  SphereCoefs co{flow.rho_sq(flow.spec.horizon), flow.spec.n};

  LGeodesicPath best;
  best.L = std::numeric_limits<double>::infinity();
  auto run = [&](const std::vector<double>& init) {
    std::vector<double> xs(init.begin() + 1, init.end() - 1);
    std::vector<double> th(M + 1);
    th[0] = init[0];
    th[M] = init[M];
    auto unpack = [&](const std::vector<double>& v) {
      for (int i = 1; i < M; ++i) th[i] = v[i - 1];
    };
    auto eval = [&](const std::vector<double>& v) {
      unpack(v);
      return zonal_L(co, th, dsig);
    };
    std::vector<double> gth;
    auto gradf = [&](const std::vector<double>& v, std::vector<double>& out) {
      unpack(v);
      zonal_L_grad(co, th, dsig, gth);
      out.assign(gth.begin() + 1, gth.end() - 1);
    };
    auto [L, conv] = descend(xs, eval, gradf, opts, std::max(theta_y, 0.1));
    if (L < best.L) {
      unpack(xs);
      best.L = L;
      best.thetas = th;
      best.converged = conv;
    }
  };

  std::vector<double> affine(M + 1), lazy(M + 1);
  const int pivot = (7 * M) / 10;
  for (int i = 0; i <= M; ++i) {
    affine[i] = theta_y * double(i) / M;
    lazy[i] = i <= pivot ? 0.0 : theta_y * double(i - pivot) / (M - pivot);
  }
  run(affine);
  run(lazy);

  best.sigma.resize(M + 1);
  for (int i = 0; i <= M; ++i) best.sigma[i] = i * dsig;
  best.ell = best.L / (2.0 * std::sqrt(tau));
  return best;
}

ReducedDistanceField reduced_distance_field(const FlowSolution& flow, Vec2 x,
                                            double tau,
                                            const MinimizeOptions& opts) {
  ReducedDistanceField out;
  out.center = x;
  out.tau = tau;
  if (flow.spec.kind == Kind::shrinking_sphere) {
    const ZonalShape z = flow.zonal();
    out.ell.resize(z.m);
    out.flagged.assign(z.m, 0);
    for (int j = 0; j < z.m; ++j) {
      const LGeodesicPath p = minimize_L_zonal(flow, z.theta(j), tau, opts);
      out.ell[j] = p.ell;
      out.flagged[j] = !p.converged;
      out.flagged_cells += out.flagged[j];
    }
  } else {
    const GridShape g = flow.grid();
    GridFlowSampler smp(flow);
    out.ell.resize(g.cells());
    out.flagged.assign(g.cells(), 0);
    for (int c = 0; c < g.cells(); ++c) {
      const LGeodesicPath p = run_grid_candidates(flow, smp, x, g.point(c), tau, opts);
      out.ell[c] = p.ell;
      out.flagged[c] = !p.converged;
      out.flagged_cells += out.flagged[c];
    }
  }
  if (20 * out.flagged_cells > (int)out.ell.size())
    throw std::runtime_error("reduced-distance field rejected: > 5% cells flagged");
  return out;
}

ReducedBoundsReport bounds_check(const FlowSolution& flow,
                                 const ReducedDistanceField& field, double k1,
                                 double k2, double tol) {
  const double tau = field.tau;
  const int n = flow.spec.n;
  Field d0;
  if (flow.spec.kind == Kind::shrinking_sphere) {
    const ZonalShape z = flow.zonal();
    const double rho = std::sqrt(flow.rho_sq(flow.spec.horizon));
    d0.resize(z.m);
    for (int j = 0; j < z.m; ++j) d0[j] = rho * z.theta(j);
  } else {
    d0 = distance_field(flow, flow.spec.horizon, field.center);
  }

  ReducedBoundsReport rep;
  auto& up = rep.upper;
  auto& lo = rep.lower;
  up.quantity = "reduced_upper_bound";
  lo.quantity = "reduced_lower_bound";
  for (auto* r : {&up, &lo}) {
    r->background = kind_name(flow.spec.kind);
    r->resolution = flow.spec.is_grid_kind() ? flow.spec.res : flow.spec.zonal_res;
    r->time = tau;
    r->dir = Direction::GreaterEqZero;
    r->tol = tol;
    r->min_val = std::numeric_limits<double>::infinity();
    r->max_val = -r->min_val;
  }
  up.values.resize(d0.size());
  lo.values.resize(d0.size());
  for (size_t c = 0; c < d0.size(); ++c) {
    const double Lbar = 4.0 * tau * field.ell[c];
    const double d2 = d0[c] * d0[c];
    up.values[c] = std::exp(2.0 * k2 * tau) * d2 + 4.0 * k2 * n / 3.0 * tau * tau - Lbar;
    lo.values[c] =
        std::exp(2.0 * k1 * tau) * (Lbar + 4.0 * k1 * n / 3.0 * tau * tau) - d2;
    for (auto* r : {&up, &lo}) {
      const double v = (r == &up) ? up.values[c] : lo.values[c];
      r->min_val = std::min(r->min_val, v);
      r->max_val = std::max(r->max_val, v);
    }
  }
  up.finalize();
  lo.finalize();
  return rep;
}

HarnackReport kernel_lower_bound_check(const FieldHistory& H,
                                       const ReducedDistanceField& field,
                                       double tol) {
  const int node = H.node_at(field.tau);
  const Field& uf = H.values[node];
  if (uf.size() != field.ell.size())
    throw std::invalid_argument("kernel/field center or grid mismatch");
  const PotentialField pf = potential_f(uf, field.tau, H.flow->spec.n);

  HarnackReport rep;
  rep.quantity = "kernel_lower_bound";
  rep.background = kind_name(H.flow->spec.kind);
  rep.resolution =
      H.flow->spec.is_grid_kind() ? H.flow->spec.res : H.flow->spec.zonal_res;
  rep.time = field.tau;
  rep.dir = Direction::GreaterEqZero;
  rep.tol = tol;
  rep.values.resize(uf.size());
  rep.min_val = std::numeric_limits<double>::infinity();
  rep.max_val = -rep.min_val;
  for (size_t c = 0; c < uf.size(); ++c) {
    rep.values[c] = field.ell[c] - pf.f[c];
    if (pf.masked[c]) {
      ++rep.masked;
      continue;
    }
    rep.min_val = std::min(rep.min_val, rep.values[c]);
    rep.max_val = std::max(rep.max_val, rep.values[c]);
  }
  rep.finalize();
  return rep;
}

WeakFormReport supersolution_weak_check(
    const std::vector<ReducedDistanceField>& fields, const FlowSolution& flow,
    int n_tests, unsigned seed) {
  if (fields.size() < 3)
    throw std::invalid_argument("weak check needs >= 3 tau nodes");
  const double T = flow.spec.horizon;
  const int n = flow.spec.n;
  const int nc = flow.cells();
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const double tau1 = fields.front().tau, tauK = fields.back().tau;
  const double chi_a = M_PI / (tauK - tau1);
  auto chi = [&](double tau) {
    const double s = std::sin(chi_a * (tau - tau1));
    return s * s;
  };
  auto chi_p = [&](double tau) { return chi_a * std::sin(2.0 * chi_a * (tau - tau1)); };

  WeakFormReport rep;
  for (int test = 0; test < n_tests; ++test) {
    Field psi(nc);
    if (flow.spec.is_grid_kind()) {
      const GridShape g = flow.grid();
      const Vec2 ctr{unif(rng) * g.lx, unif(rng) * g.ly};
      const double kap = 2.0 + 4.0 * unif(rng);
      for (int c = 0; c < nc; ++c) {
        const Vec2 p = g.point(c);
        psi[c] = std::exp(kap * (std::cos(2 * M_PI * (p.x - ctr.x) / g.lx) - 1.0) +
                          kap * (std::cos(2 * M_PI * (p.y - ctr.y) / g.ly) - 1.0));
      }
    } else {
      const ZonalShape z = flow.zonal();
      const double tc = 0.2 * M_PI + 0.6 * M_PI * unif(rng);
      const double kap = 2.0 + 4.0 * unif(rng);
      for (int j = 0; j < nc; ++j) {
        const double th = z.theta(j);
        const double s = std::sin(th);
        psi[j] = s * s * std::exp(kap * (std::cos(th - tc) - 1.0));
      }
    }

    // trapezoid in tau over the field nodes
    double pairing = 0.0;
    std::vector<double> node_val(fields.size());
    for (size_t k = 0; k < fields.size(); ++k) {
      const double tau = fields[k].tau;
      const double t_abs = T - tau;
      const Field lap_psi = laplace_beltrami(flow, psi, t_abs);
      const Field w = flow.mu_weights(t_abs);
      const double norm = std::pow(4.0 * M_PI * tau, -0.5 * n);
      double s = 0;
      for (int c = 0; c < nc; ++c) {
        const double v = norm * std::exp(-fields[k].ell[c]);
        s += v * (-psi[c] * chi_p(tau) - chi(tau) * lap_psi[c]) * w[c];
      }
      node_val[k] = s;
    }
    for (size_t k = 0; k + 1 < fields.size(); ++k)
      pairing += 0.5 * (node_val[k] + node_val[k + 1]) *
                 (fields[k + 1].tau - fields[k].tau);
    rep.pairings.push_back(pairing);
    rep.max_pairing = std::max(rep.max_pairing, pairing);
  }
  return rep;
}

}  // namespace lyh
