#include <cmath>

#include "doctest.h"
#include "lyh/flow.hpp"

using namespace lyh;

TEST_CASE("spec validation") {
  CHECK_THROWS(BackgroundSpec::sphere(2, 1.0, 0.6));  // T >= rho0^2/(2(n-1))
  CHECK_NOTHROW(BackgroundSpec::sphere(2, 1.0, 0.49));
  BackgroundSpec bad = BackgroundSpec::torus(16);
  bad.horizon = -1;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("metric_at closed forms") {
  auto euc = make_flow(BackgroundSpec::euclidean(16, 10.0, 1.0));
  const MetricSample m = metric_at(*euc, 0.3, 5);
  CHECK(m.coeff == 1.0);
  CHECK(m.mu_weight == doctest::Approx(euc->grid().cell_area()));

  // rho(t)^2 = rho0^2 - 2(n-1)t
  auto sph = make_flow(BackgroundSpec::sphere(2, 1.0, 0.3, 64));
  CHECK(metric_at(*sph, 0.25, 0).coeff == doctest::Approx(0.5));
  auto sph3 = make_flow(BackgroundSpec::sphere(3, 2.0, 0.6, 64));
  CHECK(metric_at(*sph3, 0.5, 0).coeff == doctest::Approx(2.0));

  auto tor = make_flow(BackgroundSpec::torus(16));
  const MetricSample mt = metric_at(*tor, 0.2, 3);
  CHECK(mt.coeff == 1.0);
  CHECK(mt.mu_weight == doctest::Approx(1.0 / 256));

  CHECK_THROWS(metric_at(*tor, 0.5, 0));  // outside [0, T]
}

TEST_CASE("curvature closed forms and bounds") {
  auto tor = make_flow(BackgroundSpec::torus(16));
  CHECK(curvature_at(*tor, 0.1, 0).R == 0.0);
  auto [tk1, tk2] = curvature_bounds(*tor, 0.0, 0.25);
  CHECK(tk1 == 0.0);
  CHECK(tk2 == 0.0);

  auto sph = make_flow(BackgroundSpec::sphere(2, 1.0, 0.25, 64));
  CHECK(curvature_at(*sph, 0.0, 0).R == doctest::Approx(2.0));
  auto [k1, k2] = curvature_bounds(*sph, 0.0, 0.25);
  CHECK(k1 == 0.0);
  CHECK(k2 == doctest::Approx(2.0 / (1.0 - 0.5)));  // sup R = 2/(1-2T) = 4
}

TEST_CASE("conformal curvature matches the analytic formula") {
  // phi = a cos(2 pi x): R = -2 e^{-2 phi} lap0 phi = 2 a (2pi)^2 cos(2pi x)
  // e^{-2 phi} pointwise.
  const int res = 64;
  const double a = 0.1;
  GridShape g{res, res, 1.0, 1.0};
  Field phi0(g.cells());
  for (int c = 0; c < g.cells(); ++c)
    phi0[c] = a * std::cos(2 * M_PI * g.point(c).x);
  auto spec = BackgroundSpec::conformal(phi0, res, 0.01);
  auto flow = make_flow(spec);
  const Field R = flow->scalar_curvature(0.0);
  double worst = 0;
  for (int c = 0; c < g.cells(); ++c) {
    const double p = a * std::cos(2 * M_PI * g.point(c).x);
    const double expect = 2.0 * a * 4.0 * M_PI * M_PI *
                          std::cos(2 * M_PI * g.point(c).x) * std::exp(-2.0 * p);
    worst = std::max(worst, std::abs(R[c] - expect));
  }
  CHECK(worst < 1e-10);

  // curvature_bounds against a brute-force grid max
  auto [k1, k2] = curvature_bounds(*flow, 0.0, 0.0);
  double bk1 = 0, bk2 = 0;
  Derivs d;
  spectral_workspace(g).all_derivs(R, d);
  for (int c = 0; c < g.cells(); ++c) {
    bk1 = std::max(bk1, -0.5 * R[c]);
    const double e2p = std::exp(2.0 * phi0[c]);
    bk2 = std::max({bk2, R[c], (d.dx[c] * d.dx[c] + d.dy[c] * d.dy[c]) / e2p});
  }
  CHECK(k1 == doctest::Approx(bk1));
  CHECK(k2 == doctest::Approx(bk2));
  CHECK(k1 > 0);
  CHECK(k2 > 0);
}

TEST_CASE("distances") {
  auto euc = make_flow(BackgroundSpec::euclidean(16, 10.0, 1.0));
  CHECK(distance(*euc, 0.0, {0, 0}, {3, 4}) == doctest::Approx(5.0));

  auto tor = make_flow(BackgroundSpec::torus(16, 1.0, 1.0, 1.0));
  CHECK(distance(*tor, 0.7, {0, 0}, {0.9, 0}) == doctest::Approx(0.1));

  // conformal with constant phi: distances scale by e^c (within the
  // 8-neighbor graph's angular bias)
  const int res = 64;
  const double c0 = 0.3;
  Field phi0(res * res, c0);
  auto conf = make_flow(BackgroundSpec::conformal(phi0, res, 0.01));
  auto flat = make_flow(BackgroundSpec::torus(res));
  for (Vec2 y : {Vec2{0.25, 0.0}, Vec2{0.25, 0.25}, Vec2{0.4, 0.1}}) {
    const double dc = distance(*conf, 0.0, {0, 0}, y);
    const double df = wrap_distance(flat->grid(), {0, 0}, y);
    CHECK(dc == doctest::Approx(std::exp(c0) * df).epsilon(0.03));
  }
}

TEST_CASE("distance symmetry and triangle inequality on sampled triples") {
  const int res = 32;
  GridShape g{res, res, 1.0, 1.0};
  Field phi0(g.cells());
  for (int c = 0; c < g.cells(); ++c) {
    const Vec2 p = g.point(c);
    phi0[c] = 0.05 * std::cos(2 * M_PI * p.x) * std::sin(2 * M_PI * p.y);
  }
  auto conf = make_flow(BackgroundSpec::conformal(phi0, res, 0.005));
  const Vec2 pts[3] = {{0.1, 0.2}, {0.6, 0.1}, {0.35, 0.7}};
  double d[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) d[i][j] = distance(*conf, 0.0, pts[i], pts[j]);
  for (int i = 0; i < 3; ++i) {
    CHECK(d[i][i] == doctest::Approx(0.0).epsilon(1e-12));  // near-field path
    for (int j = 0; j < 3; ++j) {
      if (i != j) CHECK(d[i][j] == doctest::Approx(d[j][i]).epsilon(0.01));
      for (int k = 0; k < 3; ++k)
        CHECK(d[i][j] <= d[i][k] + d[k][j] + 1e-2 * (d[i][k] + d[k][j]) + 1e-12);
    }
  }
}

TEST_CASE("curvature bounds are monotone under interval inclusion") {
  const int res = 32;
  GridShape g{res, res, 1.0, 1.0};
  Field phi0(g.cells());
  for (int c = 0; c < g.cells(); ++c)
    phi0[c] = 0.08 * std::cos(2 * M_PI * g.point(c).x);
  auto conf = make_flow(BackgroundSpec::conformal(phi0, res, 0.01));
  auto [a1, a2] = curvature_bounds(*conf, 0.0, 0.005);
  auto [b1, b2] = curvature_bounds(*conf, 0.0, 0.01);
  CHECK(a1 <= b1 + 1e-12);
  CHECK(a2 <= b2 + 1e-12);
}

TEST_CASE("metric positivity and measure positivity everywhere sampled") {
  for (auto flow : {make_flow(BackgroundSpec::torus(16)),
                    make_flow(BackgroundSpec::sphere(2, 1.0, 0.2, 32))}) {
    for (double t : {0.0, 0.1, 0.2}) {
      for (int c = 0; c < flow->cells(); ++c) {
        const MetricSample s = metric_at(*flow, t, c);
        CHECK(s.coeff > 0);
        CHECK(s.mu_weight > 0);
      }
    }
  }
}
