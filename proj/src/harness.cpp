#include "lyh/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "lyh/colfile.hpp"
#include "lyh/harnack.hpp"
#include "lyh/heatball.hpp"
#include "lyh/reduced.hpp"

namespace lyh {

const char* kCodeVersion = "lyhlab 0.1.0";

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<double> geometric_schedule(double lo, double hi, int count) {
  std::vector<double> out(count);
  for (int k = 0; k < count; ++k)
    out[k] = lo * std::pow(hi / lo, double(k) / (count - 1));
  return out;
}

std::vector<double> uniform_schedule(double lo, double hi, int count) {
  std::vector<double> out(count);
  for (int k = 0; k < count; ++k) out[k] = lo + (hi - lo) * k / (count - 1);
  return out;
}

struct RunContext {
  const ExperimentConfig& cfg;
  FlowPtr flow;
  Vec2 center;       // on-grid principal center
  double base_tol;   // c1 h_m^2 for exact histories
  // lazily shared artifacts
  std::shared_ptr<FieldHistory> two_bump;

  double tol(double solver_dt = 0.0, const std::string& name = "") const {
    auto it = cfg.tol_overrides.find(name);
    if (it != cfg.tol_overrides.end()) return it->second;
    const double h = metric_resolution(*flow);
    return cfg.tol_c1 * h * h + cfg.tol_c2 * solver_dt;
  }

  const FieldHistory& bump_history() {
    if (!two_bump) {
      const GridShape g = flow->grid();
      Field u0(g.cells());
      const double kap = 6.0;
      auto vm = [&](Vec2 p, Vec2 c) {
        return std::exp(kap * (std::cos(2 * M_PI * (p.x - c.x) / g.lx) - 1.0) +
                        kap * (std::cos(2 * M_PI * (p.y - c.y) / g.ly) - 1.0));
      };
      for (int c = 0; c < g.cells(); ++c) {
        const Vec2 p = g.point(c);
        u0[c] = 1.0 + 0.75 * (vm(p, {0.3, 0.35}) + vm(p, {0.7, 0.6}));
      }
      two_bump = std::make_shared<FieldHistory>(
          solve_forward_heat(flow, u0, 0.0, 0.065, {}));
    }
    return *two_bump;
  }
};

// Exact conjugate solution on a static grid from low Fourier modes (the
// conjugate equation there is the heat equation in tau).
FieldHistory fourier_conjugate_history(FlowPtr flow,
                                       const std::vector<FourierMode>& modes,
                                       const std::vector<double>& taus) {
  FieldHistory h = fourier_caloric_history(flow, modes, 0.0, taus);
  h.dir = TimeDirection::conjugate_tau;
  h.t_init = 0.0;
  h.mass.resize(h.nodes());
  for (int k = 0; k < h.nodes(); ++k)
    h.mass[k] = field_integral(*flow, h.values[k], h.t_abs(k));
  return h;
}

void add_metric(SuiteResult& s, const std::string& name, double value,
                const std::string& kind = "exact") {
  s.metrics.push_back({name, value, kind});
}

void check(SuiteResult& s, bool ok, const std::string& what) {
  if (!ok) {
    s.pass = false;
    s.notes.push_back("FAIL: " + what);
  }
}

// --- suites -----------------------------------------------------------------

void suite_saturation(RunContext& ctx, SuiteResult& out) {
  const auto taus = schedule_or(ctx.cfg, "tau_sweep", geometric_schedule(0.02, 0.16, 6));
  FieldHistory H = exact_kernel_history(ctx.flow, ctx.center, taus);
  FieldHistory one = constant_history(ctx.flow, 1.0);
  const double bar = 1e-8;

  double worst_vh = 0, worst_D = 0, worst_eq2 = 0;
  for (int k = 0; k < H.nodes(); ++k) {
    HarnackReport rep = v_H_field(H, k, bar);
    rep.quantity = "v_H_saturation";
    for (size_t c = 0; c < rep.values.size(); ++c)
      if (!is_masked(H.values[k][c]))
        worst_vh = std::max(worst_vh, std::abs(rep.values[c]));
    rep.values.clear();
    out.rows.push_back(rep);
    worst_D = std::max(worst_D, std::abs(dissipation(H, one, taus[k])));
    if (k > 0 && k + 1 < H.nodes())
      worst_eq2 = std::max(worst_eq2, conjugate_evolution_residual(H, k, one));
  }

  FieldHistory F = exact_forward_kernel_history(ctx.flow, ctx.center, 0.0, taus);
  double worst_q = 0, worst_w = 0;
  for (int k = 0; k < F.nodes(); ++k) {
    const LiYauResult q = li_yau_Q(F, k, bar);
    const HarnackReport w = linear_W(F, k, bar);
    worst_q = std::max(worst_q, std::max(std::abs(q.report.min_val),
                                         std::abs(q.report.max_val)));
    worst_w = std::max(worst_w, std::max(std::abs(w.min_val), std::abs(w.max_val)));
  }

  add_metric(out, "max_abs_vH", worst_vh);
  add_metric(out, "max_abs_Q", worst_q);
  add_metric(out, "max_abs_W", worst_w);
  add_metric(out, "max_abs_D", worst_D);
  add_metric(out, "max_eq2_residual", worst_eq2);
  check(out, worst_vh <= bar, "saturation v_H exceeds 1e-8");
  check(out, worst_q <= bar, "saturation Q exceeds 1e-8");
  check(out, worst_w <= bar, "saturation W exceeds 1e-8");
  check(out, worst_D <= bar, "saturation D exceeds 1e-8");
  check(out, worst_eq2 <= bar, "saturation evolution residual exceeds 1e-8");
}

void suite_signs(RunContext& ctx, SuiteResult& out) {
  const bool sphere = ctx.flow->spec.kind == Kind::shrinking_sphere;
  const auto taus =
      schedule_or(ctx.cfg, "tau_sweep",
                  sphere ? geometric_schedule(0.02, 0.18, 12)
                         : geometric_schedule(0.01, 0.2, 12));
  FieldHistory H = exact_kernel_history(ctx.flow, ctx.center, taus);

  if (ctx.cfg.inject_fault == "negate_cell" && H.nodes() > 2) {
    H.values[H.nodes() / 2][H.values[0].size() / 3] *= -1.0;
  }
  // Positivity invariant gate (fault injection lands here).
  for (int k = 0; k < H.nodes(); ++k)
    for (size_t c = 0; c < H.values[k].size(); ++c)
      if (H.values[k][c] < 0) {
        check(out, false,
              "invariant violated: kernel positivity at node " + std::to_string(k) +
                  " cell " + std::to_string(c));
        return;
      }

  const double tol = ctx.tol(0.0, "signs");
  double worst_vh_margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < H.nodes(); ++k) {
    HarnackReport rep = v_H_field(H, k, tol);
    rep.values.clear();
    worst_vh_margin = std::min(worst_vh_margin, rep.margin);
    check(out, rep.pass, "v_H sign violated at tau node " + std::to_string(k));
    out.rows.push_back(rep);
  }
  add_metric(out, "vH_worst_margin", worst_vh_margin);
  add_metric(out, "tol", tol, "info");

  if (!sphere) {
    const auto ages = schedule_or(ctx.cfg, "t_sweep", geometric_schedule(0.01, 0.2, 12));
    FieldHistory F = exact_forward_kernel_history(ctx.flow, ctx.center, 0.0, ages);
    double worst_q = std::numeric_limits<double>::infinity();
    double worst_w = worst_q;
    for (int k = 0; k < F.nodes(); ++k) {
      LiYauResult q = li_yau_Q(F, k, tol);
      q.report.values.clear();
      HarnackReport w = linear_W(F, k, tol);
      w.values.clear();
      worst_q = std::min(worst_q, q.report.margin);
      worst_w = std::min(worst_w, w.margin);
      check(out, q.report.pass, "Q sign violated at t node " + std::to_string(k));
      check(out, w.pass, "W sign violated at t node " + std::to_string(k));
      out.rows.push_back(q.report);
      out.rows.push_back(w);
    }
    add_metric(out, "Q_worst_margin", worst_q);
    add_metric(out, "W_worst_margin", worst_w);
  }
}

void suite_identities(RunContext& ctx, SuiteResult& out) {
  const FlowPtr flow = ctx.flow;
  const double T = flow->spec.horizon;
  const auto id_taus = schedule_or(ctx.cfg, "identity_taus", {0.1});
  const double dtau = 1.0 / flow->spec.res;

  for (double tau0 : id_taus) {
    const std::vector<double> taus = {tau0 - dtau, tau0, tau0 + dtau};
    FieldHistory H = exact_kernel_history(flow, ctx.center, taus);
    const std::vector<FourierMode> modes = {{1, 0, 0.5}, {1, 1, 0.25}};
    std::vector<double> h_nodes;
    for (double tau : taus) h_nodes.push_back(T - tau);
    std::sort(h_nodes.begin(), h_nodes.end());
    const double t_ref = T - tau0 - 0.05;

    struct Variant {
      std::string name;
      FieldHistory h;
    };
    std::vector<Variant> variants;
    variants.push_back({"const", constant_history(flow, 1.0)});
    variants.push_back({"bump", fourier_caloric_history(flow, modes, t_ref, h_nodes)});

    for (auto& var : variants) {
      const double Wm = entropy_W_h(H, var.h, tau0 - dtau);
      const double Wp = entropy_W_h(H, var.h, tau0 + dtau);
      const double D = dissipation(H, var.h, tau0);
      const double resid = std::abs((Wp - Wm) / (2 * dtau) + D);
      const double rel = resid / std::max(std::abs(D), 1e-300);
      add_metric(out, "entropy_identity_rel_" + var.name, rel, "residual:2");
      add_metric(out, "dissipation_" + var.name, D, "info");
      check(out, D >= 0, "dissipation must be a sum of squares");
      check(out, rel <= 0.02,
            "entropy identity residual above 2% for h = " + var.name);
    }
  }

  // Adjoint pairing: integral u h dmu_t constant across t.
  {
    const std::vector<FourierMode> um = {{1, 0, 0.4}, {0, 1, 0.3}};
    const std::vector<FourierMode> hm = {{1, 1, 0.35}};
    const std::vector<double> taus = uniform_schedule(0.02, 0.12, 6);
    FieldHistory u = fourier_conjugate_history(flow, um, taus);
    std::vector<double> ts;
    for (double tau : taus) ts.push_back(T - tau);
    std::sort(ts.begin(), ts.end());
    FieldHistory h = fourier_caloric_history(flow, hm, ts.front(), ts);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double t : ts) {
      const double p = pair_integral(u, h, t);
      lo = std::min(lo, p);
      hi = std::max(hi, p);
    }
    const double drift = (hi - lo) / std::max(std::abs(hi), 1e-300);
    add_metric(out, "adjoint_pairing_drift", drift);
    check(out, drift <= 1e-10, "adjoint pairing drifts");
  }

  // Conjugate evolution residual on a generic (non-fundamental) solution.
  {
    const double dnode = 1.0 / flow->spec.res;
    const std::vector<double> taus = {0.1 - dnode, 0.1, 0.1 + dnode};
    FieldHistory u = fourier_conjugate_history(flow, {{1, 0, 0.4}, {2, 1, 0.1}}, taus);
    FieldHistory one = constant_history(flow, 1.0);
    const double resid = conjugate_evolution_residual(u, 1, one);
    add_metric(out, "eq2_residual_generic", resid, "residual:2");
  }
}

void suite_limits(RunContext& ctx, SuiteResult& out) {
  const FlowPtr flow = ctx.flow;
  const double T = flow->spec.horizon;
  const int n = flow->spec.n;
  auto taus = schedule_or(ctx.cfg, "limit_taus", {0.02, 0.01, 0.005});
  std::vector<double> asc = taus;
  std::sort(asc.begin(), asc.end());
  FieldHistory H = exact_kernel_history(flow, ctx.center, asc);
  std::vector<double> h_nodes = {0.0, T};
  FieldHistory h = fourier_caloric_history(flow, {{1, 0, 0.4}, {1, 1, 0.2}},
                                           T - 0.1, uniform_schedule(T - 0.05, T, 8));

  const SmallTimeLimits lim = small_time_limits(H, h, taus);
  const double target = 0.5 * n * lim.h_at_center;
  const double moment_rel = std::abs(lim.moment.limit - target) / std::abs(target);
  add_metric(out, "moment_limit_rel_err", moment_rel, "residual:1");
  add_metric(out, "entropy_limit", lim.entropy.limit, "info");
  add_metric(out, "entropy_limit_err", lim.entropy.error, "info");
  add_metric(out, "term_II_limit", std::abs(lim.term_II.limit));
  add_metric(out, "term_III_limit", std::abs(lim.term_III.limit));
  add_metric(out, "f_mean_limit", lim.f_mean.limit, "info");
  check(out, moment_rel <= 0.01, "moment limit misses (n/2) h(x,T) by > 1%");
  check(out, std::abs(lim.entropy.limit) <= lim.entropy.error + 1e-6,
        "entropy limit not 0 within its error bar");
  check(out, std::abs(lim.term_II.limit) <= 1e-3, "term II limit above 1e-3");
  check(out, std::abs(lim.term_III.limit) <= 1e-3, "term III limit above 1e-3");
  check(out, lim.f_mean.limit <= lim.f_mean.error + 1e-6,
        "limsup of (f - n/2) must be <= 0");

  // Parametrix leading order at the center and at fixed d0.
  const LimitReport at_center = parametrix_leading_order_check(H, asc, 0.0);
  double worst_center = 0;
  for (size_t k = 0; k < at_center.schedule.size(); ++k)
    if (at_center.schedule[k] <= 0.0101)
      worst_center = std::max(worst_center, std::abs(at_center.value[k] - 1.0));
  add_metric(out, "parametrix_center_dev", worst_center);
  check(out, worst_center <= 1e-6, "parametrix ratio at the center off by > 1e-6");

  const LimitReport at_d = parametrix_leading_order_check(H, asc, 0.2);
  add_metric(out, "parametrix_d0_limit_dev", std::abs(at_d.limit - 1.0), "residual:1");
  check(out, std::abs(at_d.limit - 1.0) <= 0.01,
        "parametrix ratio at fixed d0 misses 1 by > 1%");
}

void suite_lemma2(RunContext& ctx, SuiteResult& out) {
  const FlowPtr flow = ctx.flow;
  const bool sphere = flow->spec.kind == Kind::shrinking_sphere;
  const double T = flow->spec.horizon;
  const double tau_hi = std::min({0.5, T, 1.0});
  auto taus = schedule_or(
      ctx.cfg, "lemma2_taus", [&] {
        std::vector<double> v = {0.002, 0.004, 0.006, 0.008, 0.01};
        for (double t : geometric_schedule(0.02, tau_hi, 6)) v.push_back(t);
        return v;
      }());
  if (sphere) taus = schedule_or(ctx.cfg, "lemma2_taus", geometric_schedule(0.01, T * 0.9, 10));
  std::sort(taus.begin(), taus.end());
  FieldHistory H = exact_kernel_history(flow, ctx.center, taus);

  const auto [k1, k2] = curvature_bounds(*flow, 0.0, T);
  add_metric(out, "k1", k1, "info");
  add_metric(out, "k2", k2, "info");

  const double tol = ctx.tol(0.0, "lemma2");
  const GradientEstimateReport ge =
      gradient_estimate_check(H, k1, k2, taus.front(), taus.back(), tol);
  add_metric(out, "lemma2_margin", ge.margin_explicit);
  add_metric(out, "lemma2_violations", ge.violations_explicit);
  add_metric(out, "lemma2_packaged_margin", ge.margin_packaged, "info");
  check(out, ge.pass, "explicit gradient estimate violated");

  const MeanValueReport mv = mean_value_bound_check(H, taus.front(), sphere ? taus.back() : 0.0101);
  add_metric(out, "B_emp", mv.B_emp, sphere ? "info" : "exact");
  if (!sphere) {
    const double target = std::pow(4.0 * M_PI, -0.5 * flow->spec.n);
    add_metric(out, "B_emp_dev", std::abs(mv.B_emp - target));
    check(out, std::abs(mv.B_emp - target) <= 1e-6,
          "mean-value constant off (4 pi)^{-n/2} by > 1e-6");
  }

  if (!sphere) {
    // Fixed-metric kernel derivative constants at delta = 1 and the
    // divergence trend as delta -> 4.
    const KernelGradientReport kg = kernel_gradient_checks(H, 1.0, taus.front(), 0.2);
    add_metric(out, "C_grad_delta1", kg.C_grad_max, "info");
    add_metric(out, "C_lap_delta1", kg.C_lap_max, "info");
    check(out, kg.bounded_trend, "C(delta) blows up as tau -> 0");
    double prev = -std::numeric_limits<double>::infinity();
    bool monotone = true;
    for (double d : {1.0, 2.0, 3.0, 3.5}) {
      const KernelGradientReport k = kernel_gradient_checks(H, d, taus.front(), 0.2);
      if (k.C_grad_max < prev - 1e-9) monotone = false;
      prev = k.C_grad_max;
    }
    check(out, monotone, "C(delta) should grow toward delta = 4");
  }
}

void suite_reduced(RunContext& ctx, SuiteResult& out) {
  const FlowPtr flow = ctx.flow;
  const bool sphere = flow->spec.kind == Kind::shrinking_sphere;
  const double tau = schedule_or(ctx.cfg, "reduced_taus", {0.1}).front();
  const double tol = ctx.tol(0.0, "reduced");

  const ReducedDistanceField field =
      reduced_distance_field(*flow, ctx.center, tau, {});
  add_metric(out, "flagged_cells", field.flagged_cells, "info");

  if (flow->spec.is_static()) {
    // closed-form oracle ell = d0^2 / 4 tau
    const Field d0 = distance_field(*flow, flow->spec.horizon, ctx.center);
    double worst = 0;
    for (size_t c = 0; c < d0.size(); ++c) {
      const double oracle = d0[c] * d0[c] / (4.0 * tau);
      worst = std::max(worst,
                       std::abs(field.ell[c] - oracle) / (1.0 + oracle));
    }
    add_metric(out, "ell_oracle_rel_err", worst);
    check(out, worst <= 1e-4, "static-flat ell misses d0^2/4tau by > 1e-4");
  }

  const auto [k1, k2] = curvature_bounds(*flow, 0.0, flow->spec.horizon);
  const double bounds_tol = flow->spec.is_static() ? 1e-6 : tol;
  const ReducedBoundsReport bounds = bounds_check(*flow, field, k1, k2, bounds_tol);
  add_metric(out, "bound9_margin", bounds.upper.margin);
  add_metric(out, "bound10_margin", bounds.lower.margin);
  check(out, bounds.upper.pass, "reduced upper bound (9) violated");
  check(out, bounds.lower.pass, "reduced lower bound (10) violated");
  out.rows.push_back(bounds.upper);
  out.rows.push_back(bounds.lower);
  out.rows.back().values.clear();
  out.rows[out.rows.size() - 2].values.clear();

  if (flow->spec.kind != Kind::conformal_torus_flow) {
    FieldHistory H = exact_kernel_history(flow, ctx.center, {tau});
    HarnackReport klb = kernel_lower_bound_check(H, field, tol);
    add_metric(out, "kernel_lower_bound_margin", klb.margin);
    check(out, klb.pass, "kernel lower bound f <= ell violated");
    klb.values.clear();
    out.rows.push_back(klb);
  }

  // Weak supersolution pairing at a modest resolution of its own.
  {
    FlowPtr wf = flow;
    if (flow->spec.is_grid_kind() && flow->spec.res > 48) {
      BackgroundSpec small = flow->spec;
      small.res = 48;
      if (small.kind == Kind::conformal_torus_flow) {
        // re-sample phi0 on the small grid is not available; skip downsizing
        wf = flow;
      } else {
        wf = make_flow(small);
      }
    }
    std::vector<ReducedDistanceField> fields;
    for (double t : uniform_schedule(0.6 * tau, 1.4 * tau, 4))
      fields.push_back(reduced_distance_field(*wf, ctx.center, t, {}));
    const WeakFormReport wk = supersolution_weak_check(fields, *wf, 10, (unsigned)ctx.cfg.seed + 7);
    add_metric(out, "weak_form_max_pairing", wk.max_pairing);
    const double wtol = ctx.tol(0.0, "weak_form") * 50.0;  // tau-trapezoid dominated
    check(out, wk.max_pairing <= wtol, "weak supersolution pairing positive beyond tolerance");
  }
}

void suite_heatball(RunContext& ctx, SuiteResult& out) {
  const FlowPtr flow = ctx.flow;
  const bool euclid = flow->spec.kind == Kind::euclidean_static;
  const double T = flow->spec.horizon;
  const double t0 = 0.5 * T;
  const auto radii = schedule_or(ctx.cfg, "heatball_radii",
                                 geometric_schedule(0.07, 0.7, 13));

  if (euclid) {
    const BallKernel v = BallKernel::exact_backward(flow, ctx.center, t0);
    struct Caloric {
      std::string name;
      QField q;
      double center;
    };
    std::vector<Caloric> cal;
    cal.push_back({"const", make_const_qfield(1.0), 1.0});
    {
      const Vec2 src{ctx.center.x - 1.0, ctx.center.y + 0.5};
      const double ts = -0.3;
      QField q = make_gaussian_caloric_qfield(flow, src, ts);
      cal.push_back({"gaussian", q, q(ctx.center, t0)});
    }
    cal.push_back({"linear",
                   make_linear_caloric_qfield(2.0, {0.25, -0.15}, ctx.center), 2.0});
    for (auto& c : cal) {
      const WatsonReport rep =
          watson_mean_value_check(v, c.q, c.center, radii);
      add_metric(out, "watson_dev_" + c.name, rep.max_rel_dev);
      check(out, rep.max_rel_dev <= 0.005,
            "Watson constancy above 0.5% for " + c.name);
    }
    return;
  }

  // Torus: the two localized monotonicity examples.
  const double slope_tol = ctx.tol(0.0, "heatball_slope");
  auto run_example = [&](const std::string& name, const QField& Q,
                         double center_val) {
    const BallKernel v = BallKernel::exact_backward(flow, ctx.center, t0);
    MonotonicityCurve curve = monotonicity_curve(v, Q, radii);
    curve.quantity = "heatball_" + name;
    // Nonincreasing in r up to tolerance (3% of I plus the FD error bar,
    // measured on the log-r scale), and the center value dominates I(rbar).
    double max_violation = -std::numeric_limits<double>::infinity();
    for (size_t i = 1; i + 1 < curve.grid.size(); ++i)
      max_violation = std::max(
          max_violation, curve.deriv[i] * curve.grid[i] -
                             0.03 * std::abs(curve.value[i]) -
                             curve.deriv_err[i] * curve.grid[i]);
    add_metric(out, name + "_max_dIdlogr", max_violation, "info");
    const double Ibar = curve.value.back();
    add_metric(out, name + "_I_rbar", Ibar, "info");
    add_metric(out, name + "_center", center_val, "info");
    check(out, max_violation <= slope_tol,
          name + ": I(r) increases beyond tolerance");
    check(out, center_val >= Ibar - slope_tol - 0.03 * std::abs(center_val),
          name + ": center value fails to dominate I(rbar)");
    out.curves.push_back(curve);
  };

  {
    // Li-Yau example: Q = t^2 Q of a positive two-bump solution started at 0.
    const FieldHistory& u = ctx.bump_history();
    QField q = make_history_liyau_qfield(u);
    run_example("example3", q, q(ctx.center, t0));
  }
  {
    // Linear-entropy example: Q = -u W of an aged kernel.
    const Vec2 src{ctx.center.x - 0.2, ctx.center.y + 0.1};
    QField q = make_kernel_minus_uW_qfield(flow, src, 0.0);
    run_example("example4", q, q(ctx.center, t0));
  }
}

void suite_prop7(RunContext& ctx, SuiteResult& out) {
  const FlowPtr flow = ctx.flow;
  const double t0 = 0.05;
  const auto ts = schedule_or(ctx.cfg, "prop7_ts", uniform_schedule(0.01, 0.045, 16));
  const FieldHistory& u = ctx.bump_history();

  MonotonicityCurve curve = prop7_monotonicity_series(u, ctx.center, t0, ts);
  out.curves.push_back(curve);
  double min_rhs = std::numeric_limits<double>::infinity();
  double worst_gap = -min_rhs;
  for (size_t i = 1; i + 1 < curve.grid.size(); ++i) {
    min_rhs = std::min(min_rhs, curve.companion[i]);
    const double slack = 0.03 * std::abs(curve.companion[i]) + curve.deriv_err[i];
    worst_gap = std::max(worst_gap, curve.companion[i] - slack - curve.deriv[i]);
  }
  add_metric(out, "prop7_min_rhs", min_rhs);
  add_metric(out, "prop7_worst_gap", worst_gap);
  check(out, min_rhs >= 0, "Prop 7 right-hand side must be a sum of squares");
  check(out, worst_gap <= 0, "Prop 7 derivative falls below RHS - 3%");

  const Prop7PointBound pb = prop7_point_bound(u, ctx.center, t0, ts);
  add_metric(out, "prop7_point_lhs", pb.lhs, "info");
  add_metric(out, "prop7_point_rhs", pb.rhs, "info");
  check(out, pb.lhs >= pb.rhs - 0.03 * std::abs(pb.lhs),
        "sharpened Li-Yau point bound violated");
}

void suite_representation(RunContext& ctx, SuiteResult& out) {
  const FlowPtr flow = ctx.flow;
  const bool sphere = flow->spec.kind == Kind::shrinking_sphere;
  const double T = flow->spec.horizon;
  const double t0 = 0.5 * T;
  const double tau_min = sphere ? 0.01 : 0.005;

  std::vector<double> t_nodes = uniform_schedule(t0 + 0.02 * T, T - tau_min, 48);
  std::vector<double> h_taus;
  for (double t : t_nodes) h_taus.push_back(T - t);
  h_taus.push_back(T - t0);
  std::sort(h_taus.begin(), h_taus.end());
  h_taus.erase(std::unique(h_taus.begin(), h_taus.end()), h_taus.end());

  Vec2 x0;
  int cell0 = -1;
  FieldHistory H = [&] {
    if (sphere) {
      return exact_kernel_history(flow, {}, h_taus);
    }
    const GridShape g = flow->grid();
    x0 = g.point(g.nx / 4, g.ny / 2);
    cell0 = g.index(g.nx / 4, g.ny / 2);
    return exact_kernel_history(flow, ctx.center, h_taus);
  }();
  FieldHistory h = exact_forward_kernel_history(flow, x0, t0, t_nodes);

  const RepresentationResult rep = vH_representation_check(H, h, cell0, t0);
  add_metric(out, "representation_direct", rep.direct, "info");
  add_metric(out, "representation_integral", rep.integral, "info");
  add_metric(out, "representation_rel_gap", rep.rel_gap, "residual:1");
  const double bar = sphere ? 0.05 : 0.03;
  check(out, rep.rel_gap <= bar, "representation identity gap above tolerance");
  check(out, rep.direct <= 0 && rep.integral <= 0,
        "representation sides must be nonpositive");
}

using SuiteFn = void (*)(RunContext&, SuiteResult&);

struct SuiteDef {
  const char* name;
  SuiteFn fn;
  bool (*compatible)(Kind);
};

const SuiteDef kSuites[] = {
    {"saturation", suite_saturation, [](Kind k) { return k == Kind::euclidean_static; }},
    {"signs", suite_signs,
     [](Kind k) { return k == Kind::flat_torus_static || k == Kind::shrinking_sphere; }},
    {"identities", suite_identities, [](Kind k) { return k == Kind::flat_torus_static; }},
    {"limits", suite_limits, [](Kind k) { return k == Kind::flat_torus_static; }},
    {"lemma2", suite_lemma2,
     [](Kind k) { return k == Kind::flat_torus_static || k == Kind::shrinking_sphere; }},
    {"reduced", suite_reduced, [](Kind k) { return k != Kind::euclidean_static; }},
    {"heatball", suite_heatball,
     [](Kind k) { return k == Kind::euclidean_static || k == Kind::flat_torus_static; }},
    {"prop7", suite_prop7, [](Kind k) { return k == Kind::flat_torus_static; }},
    {"representation", suite_representation,
     [](Kind k) { return k == Kind::flat_torus_static || k == Kind::shrinking_sphere; }},
};

}  // namespace

std::vector<std::string> known_suites() {
  std::vector<std::string> out;
  for (const auto& s : kSuites) out.push_back(s.name);
  return out;
}

ReportBundle run_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  ReportBundle bundle;
  bundle.code_version = kCodeVersion;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                (unsigned long long)fnv1a_hash(cfg.canonical_text));
  bundle.config_hash = buf;
  std::snprintf(buf, sizeof buf, "%016llx",
                (unsigned long long)fnv1a_hash(cfg.compat_text));
  bundle.compat_hash = buf;
  bundle.background = kind_name(cfg.background.kind);
  bundle.resolution = cfg.background.is_grid_kind() ? cfg.background.res
                                                    : cfg.background.zonal_res;
  bundle.seed = cfg.seed;

  RunContext ctx{cfg, nullptr, {}, 0.0, nullptr};
  ctx.flow = make_flow(cfg.background);
  if (cfg.background.is_grid_kind()) {
    const GridShape g = ctx.flow->grid();
    ctx.center = g.point(g.nx / 2, g.ny / 2);
  }

  std::vector<std::string> wanted = cfg.suites;
  if (wanted.empty()) {
    for (const auto& s : kSuites)
      if (s.compatible(cfg.background.kind)) wanted.push_back(s.name);
  }

  for (const std::string& name : wanted) {
    const SuiteDef* def = nullptr;
    for (const auto& s : kSuites)
      if (name == s.name) def = &s;
    if (!def) throw std::invalid_argument("unknown suite: " + name);
    if (!def->compatible(cfg.background.kind))
      throw std::invalid_argument("suite '" + name + "' does not run on " +
                                  kind_name(cfg.background.kind));

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    SuiteResult res;
    res.name = name;
    if (elapsed > cfg.budget_seconds) {
      res.pass = false;
      res.notes.push_back("SKIPPED: budget exceeded");
      bundle.error = true;
      bundle.suites.push_back(std::move(res));
      continue;
    }
    try {
      def->fn(ctx, res);
    } catch (const std::exception& e) {
      res.pass = false;
      res.notes.push_back(std::string("ERROR: ") + e.what());
      bundle.error = true;
    }
    bundle.global_pass = bundle.global_pass && res.pass;
    bundle.suites.push_back(std::move(res));
  }

  bundle.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_bundle(bundle, cfg.out_dir);
  return bundle;
}

void write_bundle(const ReportBundle& bundle, const std::string& out_dir) {
  fs::create_directories(out_dir);
  json j;
  j["code_version"] = bundle.code_version;
  j["config_hash"] = bundle.config_hash;
  j["compat_hash"] = bundle.compat_hash;
  j["background"] = bundle.background;
  j["resolution"] = bundle.resolution;
  j["seed"] = bundle.seed;
  j["global_verdict"] = bundle.global_pass ? "pass" : "fail";
  j["error"] = bundle.error;
  j["wall_seconds"] = bundle.wall_seconds;
  json suites = json::object();
  for (const auto& s : bundle.suites) {
    json js;
    js["verdict"] = s.pass ? "pass" : "fail";
    json metrics = json::object();
    for (const auto& m : s.metrics) {
      metrics[m.name] = {{"value", m.value}, {"kind", m.kind}};
    }
    js["metrics"] = metrics;
    js["notes"] = s.notes;
    js["csv"] = s.name + ".csv";
    suites[s.name] = js;
  }
  j["suites"] = suites;
  std::ofstream(out_dir + "/bundle.json") << j.dump(2) << '\n';

  for (const auto& s : bundle.suites) {
    std::ofstream csv(out_dir + "/" + s.name + ".csv");
    csv << csv_header() << '\n';
    for (const auto& r : s.rows) csv << csv_row(r) << '\n';
    for (size_t k = 0; k < s.curves.size(); ++k) {
      std::ofstream cc(out_dir + "/" + s.name + "_curve" + std::to_string(k) + ".csv");
      write_curve_csv(cc, s.curves[k]);
    }
  }
}

DiffReport compare_baseline(const std::string& bundle_path,
                            const std::string& baseline_path, double threshold) {
  std::ifstream a(bundle_path), b(baseline_path);
  if (!a || !b) throw std::runtime_error("cannot open bundle for comparison");
  json cur = json::parse(a), base = json::parse(b);

  DiffReport rep;
  if (cur["compat_hash"] != base["compat_hash"]) {
    rep.compatible = false;
    rep.pass = false;
    return rep;
  }
  const int res_cur = cur["resolution"], res_base = base["resolution"];
  const bool same_res = res_cur == res_base;

  for (auto& [sname, sbase] : base["suites"].items()) {
    if (!cur["suites"].contains(sname)) {
      rep.pass = false;
      rep.entries.push_back({sname, "<suite>", 0, 0, 0, false, "missing in current"});
      continue;
    }
    auto& scur = cur["suites"][sname];
    if (scur["verdict"] != sbase["verdict"])
      rep.verdict_changes.push_back(sname + ": " + std::string(sbase["verdict"]) +
                                    " -> " + std::string(scur["verdict"]));
    for (auto& [mname, mbase] : sbase["metrics"].items()) {
      if (!scur["metrics"].contains(mname)) continue;
      const double vb = mbase["value"], vc = scur["metrics"][mname]["value"];
      const std::string kind = mbase["kind"];
      DiffEntry e{sname, mname, vb, vc, 0, true, ""};
      e.drift = std::abs(vc - vb) / std::max({std::abs(vc), std::abs(vb), 1e-300});
      if (kind == "info") {
        e.note = "info";
      } else if (same_res) {
        e.ok = e.drift <= threshold;
        rep.max_drift = std::max(rep.max_drift, e.drift);
      } else if (kind.rfind("residual:", 0) == 0) {
        const double order = std::stod(kind.substr(9));
        const double expected = std::pow(double(res_cur) / res_base, order);
        const double ratio = vb / std::max(vc, 1e-300);
        e.ok = ratio >= 0.4 * expected && ratio <= 2.5 * expected;
        e.note = "refinement ratio " + format_double(ratio) + " expected ~" +
                 format_double(expected);
      } else {
        e.note = "skipped (resolution differs)";
      }
      if (!e.ok) rep.pass = false;
      rep.entries.push_back(e);
    }
  }
  return rep;
}

std::string cache_dir_or_empty(const std::string& override_dir) {
  if (!override_dir.empty()) return override_dir;
  const char* env = std::getenv("LYHLAB_CACHE_DIR");
  return env ? env : "";
}

int cache_build(const ExperimentConfig& cfg, const std::string& dir) {
  if (dir.empty()) throw std::invalid_argument("no cache directory configured");
  fs::create_directories(dir);
  const FlowPtr flow = make_flow(cfg.background);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                (unsigned long long)fnv1a_hash(cfg.compat_text));
  const std::string base = dir + "/" + buf;
  write_flow_file(base + ".flow", *flow);
  return 0;
}

int cache_clear(const std::string& dir) {
  if (dir.empty()) throw std::invalid_argument("no cache directory configured");
  if (!fs::exists(dir)) return 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto ext = entry.path().extension();
    if (ext == ".flow" || ext == ".hist") fs::remove(entry.path());
  }
  return 0;
}

}  // namespace lyh
