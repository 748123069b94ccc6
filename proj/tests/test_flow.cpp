#include <cmath>
#include <sstream>

#include "doctest.h"
#include "lyh/colfile.hpp"
#include "lyh/flow.hpp"

using namespace lyh;

namespace {

BackgroundSpec cos_spec(int res, double amp, double T) {
  GridShape g{res, res, 1.0, 1.0};
  Field phi0(g.cells());
  for (int c = 0; c < g.cells(); ++c)
    phi0[c] = amp * std::cos(2 * M_PI * g.point(c).x);
  return BackgroundSpec::conformal(phi0, res, T);
}

int stable_steps(const BackgroundSpec& spec, double cfl = 0.1) {
  const GridShape g = spec.grid();
  const double h = g.hx();
  double mn = 0;
  for (double v : spec.phi0) mn = std::min(mn, v);
  return (int)std::ceil(spec.horizon / (cfl * h * h * std::exp(2 * mn))) + 1;
}

}  // namespace

TEST_CASE("constant conformal factors are fixed points") {
  for (double c0 : {0.0, 0.35}) {
    const int res = 32;
    Field phi0(res * res, c0);
    auto spec = BackgroundSpec::conformal(phi0, res, 0.01);
    const FlowSolution flow = evolve_conformal_flow(spec, stable_steps(spec));
    double worst = 0;
    for (const Field& p : flow.phi_nodes)
      for (double v : p) worst = std::max(worst, std::abs(v - c0));
    CHECK(worst < 1e-12);
    CHECK(flow.flow_residual < 1e-10);
  }
}

TEST_CASE("small-amplitude flow matches the linearized decay") {
  // phi0 = eps cos(2 pi x) decays like eps e^{-4 pi^2 t} cos(2 pi x) + O(eps^2)
  const double eps = 0.01, T = 0.01;
  const int res = 64;
  auto spec = cos_spec(res, eps, T);
  const FlowSolution flow = evolve_conformal_flow(spec, stable_steps(spec));
  const Field phi = flow.phi_at(T);
  const GridShape g = spec.grid();
  double worst = 0;
  for (int c = 0; c < g.cells(); ++c) {
    const double lin =
        eps * std::exp(-4 * M_PI * M_PI * T) * std::cos(2 * M_PI * g.point(c).x);
    worst = std::max(worst, std::abs(phi[c] - lin));
  }
  CHECK(worst < 10 * eps * eps);
}

TEST_CASE("stability constraint is enforced") {
  auto spec = cos_spec(32, 0.1, 0.01);
  CHECK_THROWS(evolve_conformal_flow(spec, 3));  // far too few steps
}

TEST_CASE("sphere closed-form solution and volume") {
  auto spec = BackgroundSpec::sphere(2, 1.0, 0.3, 128);
  const FlowSolution flow = shrinking_sphere_solution(spec);
  CHECK(flow.rho_sq(0.0) == doctest::Approx(1.0));
  CHECK(flow.rho_sq(0.25) == doctest::Approx(0.5));
  // total measure matches Vol(S^2) rho^2 = 4 pi rho^2 to quadrature order,
  // and the time dependence is exact: total(t)/total(0) = rho(t)^2/rho0^2.
  const Field w = flow.mu_weights(0.1);
  CHECK(fixed_sum(w) == doctest::Approx(4 * M_PI * flow.rho_sq(0.1)).epsilon(1e-4));
  CHECK(fixed_sum(w) / fixed_sum(flow.mu_weights(0.0)) ==
        doctest::Approx(flow.rho_sq(0.1) / flow.rho_sq(0.0)).epsilon(1e-13));
}

TEST_CASE("measure evolution residual") {
  // static: exact zero
  auto tor = make_flow(BackgroundSpec::torus(32));
  CHECK(check_measure_evolution(*tor).max_residual == 0.0);

  // sphere: rho^2 linear in t for n=2, centered differences are exact
  auto sph = make_flow(BackgroundSpec::sphere(2, 1.0, 0.2, 64));
  CHECK(check_measure_evolution(*sph).max_residual < 1e-10);

  // conformal: second-order convergence under space-time refinement
  auto c64 = cos_spec(64, 0.05, 0.02);
  auto c128 = cos_spec(128, 0.05, 0.02);
  // window away from t = 0 so both resolutions sample matching times
  const double r64 =
      check_measure_evolution(evolve_conformal_flow(c64, stable_steps(c64)), 0.005)
          .max_residual;
  const double r128 =
      check_measure_evolution(evolve_conformal_flow(c128, stable_steps(c128)), 0.005)
          .max_residual;
  CHECK(r64 / r128 > 3.0);
  CHECK(r64 / r128 < 5.0);
}

TEST_CASE("column file round trip") {
  auto spec = cos_spec(16, 0.05, 0.002);
  const FlowSolution flow = evolve_conformal_flow(spec, stable_steps(spec));
  std::stringstream ss;
  write_flow(ss, flow);
  const FlowSolution back = read_flow(ss);
  REQUIRE(back.times.size() == flow.times.size());
  REQUIRE(back.phi_nodes.size() == flow.phi_nodes.size());
  double worst = 0;
  for (size_t k = 0; k < flow.phi_nodes.size(); ++k)
    for (int c = 0; c < 256; ++c)
      worst = std::max(worst, std::abs(back.phi_nodes[k][c] - flow.phi_nodes[k][c]));
  CHECK(worst == 0.0);  // %.17g round trip is exact
  CHECK(back.spec.res == flow.spec.res);
}
