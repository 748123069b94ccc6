#include "lyh/fields.hpp"

#include <cmath>

#include "lyh/heat.hpp"

namespace lyh {

GeomLog geom_log_derivs(const FlowSolution& flow, const Field& u, double t_abs) {
  GeomLog out;
  const int nc = flow.cells();
  out.w.resize(nc);
  for (int c = 0; c < nc; ++c) out.w[c] = std::log(std::max(u[c], kMaskFloor));

  if (flow.spec.is_grid_kind()) {
    const GridShape g = flow.grid();
    Derivs d;
    if (flow.spec.kind == Kind::euclidean_static) {
      fd_all_derivs(g, out.w, d);
    } else {
      spectral_workspace(g).all_derivs(out.w, d);
    }
    out.grad_sq.resize(nc);
    out.lap.resize(nc);
    out.h11.resize(nc);
    out.h12.resize(nc);
    out.h22.resize(nc);
    if (flow.spec.kind == Kind::conformal_torus_flow) {
      const Field phi = flow.phi_at(t_abs);
      Derivs dphi;
      spectral_workspace(g).all_derivs(phi, dphi);
      for (int c = 0; c < nc; ++c) {
        const double e2 = std::exp(-2.0 * phi[c]);
        out.grad_sq[c] = e2 * (d.dx[c] * d.dx[c] + d.dy[c] * d.dy[c]);
        out.lap[c] = e2 * d.lap[c];  // 2-D conformal identity
        // Hessian with Christoffel terms of e^{2 phi} delta, then moved to
        // the orthonormal frame by e^{-2 phi}.
        const double hxx = d.dxx[c] - dphi.dx[c] * d.dx[c] + dphi.dy[c] * d.dy[c];
        const double hxy = d.dxy[c] - dphi.dy[c] * d.dx[c] - dphi.dx[c] * d.dy[c];
        const double hyy = d.dyy[c] + dphi.dx[c] * d.dx[c] - dphi.dy[c] * d.dy[c];
        out.h11[c] = e2 * hxx;
        out.h12[c] = e2 * hxy;
        out.h22[c] = e2 * hyy;
      }
    } else {
      for (int c = 0; c < nc; ++c) {
        out.grad_sq[c] = d.dx[c] * d.dx[c] + d.dy[c] * d.dy[c];
        out.lap[c] = d.lap[c];
        out.h11[c] = d.dxx[c];
        out.h12[c] = d.dxy[c];
        out.h22[c] = d.dyy[c];
      }
    }
    out.mult2 = 1;
    return out;
  }

  // Zonal sphere
  out.zonal = true;
  const ZonalShape z = flow.zonal();
  const int n = flow.spec.n;
  const double r2 = flow.rho_sq(t_abs);
  Field wt, wtt, lap_unit;
  zonal_dtheta(z, out.w, wt);
  zonal_d2theta(z, out.w, wtt);
  zonal_laplacian_unit(z, out.w, lap_unit);
  out.grad_sq.resize(nc);
  out.lap.resize(nc);
  out.h11.resize(nc);
  out.h22.resize(nc);
  out.mult2 = n - 1;
  for (int j = 0; j < nc; ++j) {
    const double ct = 1.0 / std::tan(z.theta(j));
    out.grad_sq[j] = wt[j] * wt[j] / r2;
    out.lap[j] = lap_unit[j] / r2;
    out.h11[j] = wtt[j] / r2;
    out.h22[j] = ct * wt[j] / r2;
  }
  return out;
}

Field laplace_beltrami(const FlowSolution& flow, const Field& f, double t_abs) {
  Field out;
  if (flow.spec.is_grid_kind()) {
    const GridShape g = flow.grid();
    if (flow.spec.kind == Kind::euclidean_static) {
      fd_laplacian(g, f, out);
    } else {
      spectral_workspace(g).laplacian(f, out);
    }
    if (flow.spec.kind == Kind::conformal_torus_flow) {
      const Field phi = flow.phi_at(t_abs);
      for (size_t c = 0; c < out.size(); ++c) out[c] *= std::exp(-2.0 * phi[c]);
    }
    return out;
  }
  const ZonalShape z = flow.zonal();
  zonal_laplacian_unit(z, f, out);
  const double r2 = flow.rho_sq(t_abs);
  for (double& v : out) v /= r2;
  return out;
}

Field ricci_multiplier(const FlowSolution& flow, double t_abs) {
  const int nc = flow.cells();
  if (flow.spec.is_static()) return Field(nc, 0.0);
  if (flow.spec.kind == Kind::shrinking_sphere)
    return Field(nc, (flow.spec.n - 1) / flow.rho_sq(t_abs));
  Field R = flow.scalar_curvature(t_abs);
  for (double& v : R) v *= 0.5;  // n = 2
  return R;
}

Field frame_norm_sq(const GeomLog& gl, const Field& ric, double c, double sign) {
  const int nc = (int)gl.w.size();
  Field out(nc);
  if (!gl.zonal) {
    for (int i = 0; i < nc; ++i) {
      const double a11 = ric[i] + sign * gl.h11[i] + c;
      const double a22 = ric[i] + sign * gl.h22[i] + c;
      const double a12 = sign * gl.h12[i];
      out[i] = a11 * a11 + 2.0 * a12 * a12 + a22 * a22;
    }
  } else {
    for (int i = 0; i < nc; ++i) {
      const double a11 = ric[i] + sign * gl.h11[i] + c;
      const double a22 = ric[i] + sign * gl.h22[i] + c;
      out[i] = a11 * a11 + gl.mult2 * a22 * a22;
    }
  }
  return out;
}

double metric_resolution(const FlowSolution& flow) {
  if (flow.spec.is_grid_kind()) {
    const GridShape g = flow.grid();
    double h = std::min(g.hx(), g.hy());
    if (!flow.phi_nodes.empty()) {
      double mn = std::numeric_limits<double>::infinity();
      for (const Field& p : flow.phi_nodes)
        for (double v : p) mn = std::min(mn, v);
      h *= std::exp(mn);
    }
    return h;
  }
  return flow.zonal().h() * std::sqrt(flow.rho_sq(flow.spec.horizon));
}

}  // namespace lyh
