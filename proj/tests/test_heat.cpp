#include <cmath>
#include <random>

#include "doctest.h"
#include "lyh/heat.hpp"

using namespace lyh;

namespace {

Field cos_field(const GridShape& g, double amp, int kx, int ky, double base = 1.0) {
  Field f(g.cells());
  for (int c = 0; c < g.cells(); ++c) {
    const Vec2 p = g.point(c);
    f[c] = base + amp * std::cos(2 * M_PI * kx * p.x / g.lx) *
                      std::cos(2 * M_PI * ky * p.y / g.ly);
  }
  return f;
}

}  // namespace

TEST_CASE("constants stay caloric on the static torus") {
  auto flow = make_flow(BackgroundSpec::torus(32));
  const FieldHistory h = solve_forward_heat(flow, Field(32 * 32, 1.0), 0.0, 0.1);
  for (const Field& f : h.values)
    for (double v : f) CHECK(v == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("Fourier mode decay matches the closed form at 128^2") {
  auto flow = make_flow(BackgroundSpec::torus(128));
  const GridShape g = flow->grid();
  const Field h0 = cos_field(g, 0.5, 1, 0);
  const double T = 0.05;
  const FieldHistory h = solve_forward_heat(flow, h0, 0.0, T);
  const Field hT = h.values.back();
  double worst = 0;
  for (int c = 0; c < g.cells(); ++c) {
    const double expect =
        1.0 + 0.5 * std::exp(-4 * M_PI * M_PI * T) * std::cos(2 * M_PI * g.point(c).x);
    worst = std::max(worst, std::abs(hT[c] - expect));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("zonal harmonic decay on the shrinking sphere") {
  // h0 = 1 + 0.5 cos(theta): the k=1 mode decays by (rho(t)^2/rho0^2)^{k(k+1)/2}.
  auto spec = BackgroundSpec::sphere(2, 1.0, 0.3, 256);
  auto flow = make_flow(spec);
  const ZonalShape z = flow->zonal();
  Field h0(z.m);
  for (int j = 0; j < z.m; ++j) h0[j] = 1.0 + 0.5 * std::cos(z.theta(j));
  const double T = 0.2;
  const FieldHistory h = solve_forward_heat(flow, h0, 0.0, T);
  const double decay = flow->rho_sq(T) / flow->rho_sq(0.0);  // exponent k(k+1)/2 = 1
  double worst = 0;
  for (int j = 0; j < z.m; ++j) {
    const double expect = 1.0 + 0.5 * decay * std::cos(z.theta(j));
    worst = std::max(worst, std::abs(h.values.back()[j] - expect));
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("static conjugate equation is the heat equation in tau") {
  auto flow = make_flow(BackgroundSpec::torus(64));
  const Field datum = cos_field(flow->grid(), 0.3, 1, 1);
  const FieldHistory u = solve_conjugate_heat(flow, datum, 0.08);
  const FieldHistory h = solve_forward_heat(flow, datum, 0.0, 0.08);
  double worst = 0;
  for (int c = 0; c < flow->cells(); ++c)
    worst = std::max(worst, std::abs(u.values.back()[c] - h.values.back()[c]));
  CHECK(worst < 1e-10);
}

TEST_CASE("constant terminal datum on the sphere follows the volume ratio") {
  auto flow = make_flow(BackgroundSpec::sphere(2, 1.0, 0.3, 256));
  const double T = 0.3, c0 = 2.0;
  const FieldHistory u = solve_conjugate_heat(flow, Field(256, c0), 0.25);
  for (int k = 0; k < u.nodes(); ++k) {
    const double tau = u.times[k];
    const double expect = c0 * flow->rho_sq(T) / flow->rho_sq(T - tau);
    for (double v : u.values[k]) CHECK(v == doctest::Approx(expect).epsilon(1e-8));
  }
}

TEST_CASE("conjugate mass conservation (adjoint property)") {
  // grid flow with curvature
  const int res = 48;
  GridShape g{res, res, 1.0, 1.0};
  Field phi0(g.cells());
  for (int c = 0; c < g.cells(); ++c)
    phi0[c] = 0.08 * std::cos(2 * M_PI * g.point(c).x);
  auto conf = make_flow(BackgroundSpec::conformal(phi0, res, 0.02));
  const double hm = (1.0 / res) * std::exp(-0.08);
  const FieldHistory u =
      fundamental_solution(conf, {0.5, 0.5}, 0.018, {6 * hm, 5 * hm, 4 * hm});
  for (int k = 0; k < u.nodes(); ++k)
    CHECK(u.mass[k] == doctest::Approx(1.0).epsilon(1e-8));

  // shrinking sphere
  auto sph = make_flow(BackgroundSpec::sphere(2, 1.0, 0.2, 256));
  const FieldHistory us = fundamental_solution(sph, {}, 0.15, {});
  for (int k = 0; k < us.nodes(); ++k)
    CHECK(us.mass[k] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("closed-form kernel values") {
  auto euc = BackgroundSpec::euclidean(16, 10.0, 1.0);
  CHECK(closed_form_kernel(euc, {1, 1}, {1, 1}, 1.0 / (4 * M_PI)) ==
        doctest::Approx(1.0).epsilon(1e-14));

  auto tor = BackgroundSpec::torus(16);
  // large tau: kernel -> 1/area = 1
  CHECK(closed_form_kernel(tor, {0.2, 0.3}, {0.8, 0.9}, 50.0) ==
        doctest::Approx(1.0).epsilon(1e-13));
  // small tau at y = x: wraps negligible, equals the Euclidean value
  // (nearest image contributes ~ 2 e^{-1/4tau} relatively)
  CHECK(closed_form_kernel(tor, {0.5, 0.5}, {0.5, 0.5}, 0.004) ==
        doctest::Approx(1.0 / (4 * M_PI * 0.004)).epsilon(1e-15));
  CHECK(closed_form_kernel(tor, {0.5, 0.5}, {0.5, 0.5}, 0.01) ==
        doctest::Approx(1.0 / (4 * M_PI * 0.01)).epsilon(1e-9));
  CHECK_THROWS(closed_form_kernel(BackgroundSpec::sphere(2, 1, 0.2), {}, {}, 0.1));
}

TEST_CASE("fundamental solution matches the Gaussian on the Euclidean patch") {
  auto flow = make_flow(BackgroundSpec::euclidean(128, 4.0, 0.3));
  const Vec2 x{2.0, 2.0};
  const double tau = 0.1;
  const FieldHistory H = fundamental_solution(flow, x, tau, {});
  const Field Hf = H.values.back();
  const GridShape g = flow->grid();
  double worst = 0;
  for (int c = 0; c < g.cells(); ++c) {
    const double d = std::sqrt(norm_sq(g.point(c) - x));
    if (d > 3 * std::sqrt(tau)) continue;
    const double exact = gaussian_kernel_value(d, tau, 2);
    worst = std::max(worst, std::abs(Hf[c] - exact) / exact);
  }
  CHECK(worst < 1e-5);
  CHECK(H.width_error < 1e-4);
}

TEST_CASE("fundamental solution matches the theta kernel on the torus") {
  auto flow = make_flow(BackgroundSpec::torus(128));
  const Vec2 x{0.5, 0.5};
  const double tau = 0.1;
  const FieldHistory H = fundamental_solution(flow, x, tau, {});
  const FieldHistory exact = exact_kernel_history(flow, x, {tau});
  double worst = 0;
  for (int c = 0; c < flow->cells(); ++c)
    worst = std::max(worst, std::abs(H.values.back()[c] - exact.values[0][c]) /
                                exact.values[0][c]);
  CHECK(worst < 1e-5);
}

TEST_CASE("defining delta property: pairing with a smooth h returns h(x, T)") {
  auto flow = make_flow(BackgroundSpec::torus(64));
  const double T = flow->spec.horizon;
  const Vec2 x{0.5, 0.5};
  const double hg = 1.0 / 64;
  const FieldHistory H =
      fundamental_solution(flow, x, 0.02, {5 * hg, 4.5 * hg, 4 * hg});
  const std::vector<double> ts = {T - 0.02, T};
  const FieldHistory h =
      fourier_caloric_history(flow, {{1, 0, 0.4}, {1, 1, 0.2}}, T - 0.05, ts);
  const double got = pair_integral(H, h, T - H.times.front());
  // caloric pairing with the exact kernel returns h(x, T) for every tau
  const double expect = 1.0 + 0.4 * std::cos(2 * M_PI * 0.5) +
                        0.2 * std::cos(2 * M_PI * 0.5) * std::cos(2 * M_PI * 0.5) *
                            std::exp(-8 * M_PI * M_PI * 0.05);
  CHECK(got == doctest::Approx(expect).epsilon(5e-3));
}

TEST_CASE("sphere Legendre kernel agrees with the zonal solver") {
  auto flow = make_flow(BackgroundSpec::sphere(2, 1.0, 0.2, 384));
  const double tau = 0.06;
  const FieldHistory solver = fundamental_solution(flow, {}, tau, {});
  const FieldHistory exact = exact_kernel_history(flow, {}, solver.times);
  const ZonalShape z = flow->zonal();
  const double rhoT = std::sqrt(flow->rho_sq(flow->spec.horizon));
  double worst = 0;
  for (int j = 0; j < flow->cells(); ++j) {
    if (rhoT * z.theta(j) > 3 * std::sqrt(tau)) continue;
    const double e = exact.values.back()[j];
    worst = std::max(worst, std::abs(solver.values.back()[j] - e) / e);
  }
  CHECK(worst < 2e-4);
  // discrete zonal quadrature carries its own O(h^2); the continuum mass is 1
  CHECK(exact.mass[0] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("adjoint pairing stays constant across t") {
  auto flow = make_flow(BackgroundSpec::torus(48));
  const double T = flow->spec.horizon;
  Field datum(flow->cells());
  const GridShape g = flow->grid();
  for (int c = 0; c < g.cells(); ++c) {
    const Vec2 p = g.point(c);
    datum[c] = 1.0 + 0.5 * std::sin(2 * M_PI * p.x) * std::cos(4 * M_PI * p.y);
  }
  const FieldHistory u = solve_conjugate_heat(flow, datum, 0.1);
  Field h0 = cos_field(g, 0.3, 1, 0);
  const FieldHistory h = solve_forward_heat(flow, h0, T - 0.1, T);
  double lo = 1e300, hi = -1e300;
  for (double t : {T - 0.1, T - 0.07, T - 0.03, T}) {
    const double p = pair_integral(u, h, t);
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  CHECK((hi - lo) / std::abs(hi) < 1e-9);
}

TEST_CASE("positivity and comparison principle") {
  auto flow = make_flow(BackgroundSpec::torus(48));
  const GridShape g = flow->grid();
  const Field a = cos_field(g, 0.5, 1, 1);  // in [0.5, 1.5]
  Field b = a;
  for (double& v : b) v += 0.25;  // a <= b
  const FieldHistory ua = solve_forward_heat(flow, a, 0.0, 0.05);
  const FieldHistory ub = solve_forward_heat(flow, b, 0.0, 0.05);
  for (int k = 0; k < ua.nodes(); ++k)
    for (int c = 0; c < flow->cells(); ++c) {
      CHECK(ua.values[k][c] > 0);
      CHECK(ua.values[k][c] <= ub.values[k][c] + 1e-12);
    }
}

TEST_CASE("kernel symmetry on static backgrounds") {
  auto spec = BackgroundSpec::torus(64);
  for (double tau : {0.02, 0.1}) {
    const Vec2 x{0.25, 0.5}, y{0.625, 0.875};
    CHECK(closed_form_kernel(spec, x, y, tau) ==
          doctest::Approx(closed_form_kernel(spec, y, x, tau)).epsilon(1e-14));
  }
}

TEST_CASE("solver rejects bad inputs") {
  auto flow = make_flow(BackgroundSpec::torus(32));
  Field neg(flow->cells(), -1.0);
  CHECK_THROWS(solve_forward_heat(flow, neg, 0.0, 0.1));
  CHECK_THROWS(solve_conjugate_heat(flow, Field(flow->cells(), 0.0), 0.1));
  CHECK_THROWS(fundamental_solution(flow, {0.5, 0.5}, 0.1, {0.01}));  // unresolved
}

TEST_CASE("history masking floors tiny values") {
  auto flow = make_flow(BackgroundSpec::euclidean(64, 30.0, 0.3));
  const FieldHistory H = exact_kernel_history(flow, {15.0, 15.0}, {0.001});
  CHECK(masked_count(H.values[0]) > 0);
  for (double v : H.values[0]) CHECK(v >= kMaskFloor);
}
