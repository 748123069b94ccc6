#include "lyh/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace lyh {

Kernel1D theta_factor_1d(double d, double L, double tau) {
  if (tau <= 0) throw std::invalid_argument("theta factor needs tau > 0");
  const double a = 1.0 / (4.0 * tau);
  const double norm = 1.0 / std::sqrt(4.0 * M_PI * tau);
  Kernel1D out;
  auto add = [&](double x) {
    const double e = norm * std::exp(-a * x * x);
    out.k += e;
    out.kd += -2.0 * a * x * e;
    out.kdd += (4.0 * a * a * x * x - 2.0 * a) * e;
    return e;
  };
  if (L <= 0) {
    add(d);
    return out;
  }
  if (tau <= 0.06 * L * L) {
    // image sum converges fast for small tau
    add(d);
    for (int m = 1; m < 64; ++m) {
      const double t1 = add(d + m * L);
      const double t2 = add(d - m * L);
      if (t1 + t2 < 1e-17 * out.k) break;
    }
    return out;
  }
  // Fourier representation: (1/L) sum_k e^{-(2 pi k/L)^2 tau} cos(2 pi k d/L)
  out.k = 1.0 / L;
  for (int k = 1; k < 4000; ++k) {
    const double w = 2.0 * M_PI * k / L;
    const double amp = 2.0 / L * std::exp(-w * w * tau);
    if (amp < 1e-18 * std::abs(out.k)) break;
    out.k += amp * std::cos(w * d);
    out.kd += -amp * w * std::sin(w * d);
    out.kdd += -amp * w * w * std::cos(w * d);
  }
  return out;
}

double gaussian_kernel_value(double dist, double tau, int n) {
  return std::exp(-dist * dist / (4.0 * tau)) / std::pow(4.0 * M_PI * tau, 0.5 * n);
}

KernelPoint flat_kernel_point(const GridShape& g, bool wrap, Vec2 from, Vec2 to,
                              double tau) {
  const Vec2 d = wrap ? wrap_delta(g, from, to) : to - from;
  const Kernel1D kx = theta_factor_1d(d.x, wrap ? g.lx : 0.0, tau);
  const Kernel1D ky = theta_factor_1d(d.y, wrap ? g.ly : 0.0, tau);
  KernelPoint p;
  p.u = kx.k * ky.k;
  // log u = log kx + log ky, so the Hessian is diagonal per axis.
  p.grad_log = {kx.kd / kx.k, ky.kd / ky.k};
  p.hxx = kx.kdd / kx.k - p.grad_log.x * p.grad_log.x;
  p.hyy = ky.kdd / ky.k - p.grad_log.y * p.grad_log.y;
  p.hxy = 0.0;
  p.lap_log = p.hxx + p.hyy;
  return p;
}

void legendre_column(double x, int kmax, std::vector<double>& out) {
  out.resize(kmax + 1);
  out[0] = 1.0;
  if (kmax >= 1) out[1] = x;
  for (int k = 2; k <= kmax; ++k)
    out[k] = ((2 * k - 1) * x * out[k - 1] - (k - 1) * out[k - 2]) / k;
}

Field sphere_conjugate_kernel(const ZonalShape& z, double rhoT_sq, double tau) {
  if (z.dim != 2)
    throw std::invalid_argument("sphere kernel series is implemented for n = 2");
  if (tau <= 0) throw std::invalid_argument("sphere kernel needs tau > 0");
  const double ratio = (rhoT_sq + 2.0 * tau) / rhoT_sq;  // rho~^2 / rho_T^2 > 1
  const double lr = std::log(ratio);
  // Mode k decays like ratio^{-(k(k+1)+2)/2}; stop once terms are negligible.
  int kmax = 8;
  while (kmax < 4000 && 0.5 * (double(kmax) * (kmax + 1) + 2) * lr < 45.0) kmax += 8;
  std::vector<double> pk;
  Field out(z.m, 0.0);
  for (int j = 0; j < z.m; ++j) {
    legendre_column(std::cos(z.theta(j)), kmax, pk);
    double s = 0.0;
    for (int k = kmax; k >= 0; --k) {
      const double amp = std::exp(-0.5 * (double(k) * (k + 1) + 2) * lr);
      s += (2 * k + 1) * amp * pk[k];
    }
    out[j] = s / (4.0 * M_PI * rhoT_sq);
  }
  return out;
}

Field sphere_forward_kernel(const ZonalShape& z, const BackgroundSpec& spec,
                            double t_center, double t) {
  if (z.dim != 2)
    throw std::invalid_argument("sphere kernel series is implemented for n = 2");
  if (t <= t_center) throw std::invalid_argument("forward kernel needs t > t_center");
  const double r0 = sphere_rho_sq(spec, t_center);
  const double r1 = sphere_rho_sq(spec, t);
  // d h_k/dt = -k(k+1)/rho(t)^2 h_k integrates to (rho(t)^2/rho(t_c)^2)^{k(k+1)/2}
  // for rho^2 linear in t with slope -2.
  const double lr = std::log(r1 / r0);  // negative
  int kmax = 8;
  while (kmax < 4000 && 0.5 * (double(kmax) * (kmax + 1)) * (-lr) < 45.0) kmax += 8;
  std::vector<double> pk;
  Field out(z.m, 0.0);
  for (int j = 0; j < z.m; ++j) {
    legendre_column(std::cos(z.theta(j)), kmax, pk);
    double s = 0.0;
    for (int k = kmax; k >= 0; --k)
      s += (2 * k + 1) * std::exp(0.5 * (double(k) * (k + 1)) * lr) * pk[k];
    out[j] = s / (4.0 * M_PI * r0);
  }
  return out;
}

}  // namespace lyh
