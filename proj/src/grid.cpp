#include "lyh/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>

namespace lyh {

namespace {
double wrap_offset(double a, double b, double period) {
  double d = std::fmod(b - a, period);
  if (d > 0.5 * period) d -= period;
  if (d < -0.5 * period) d += period;
  return d;
}
}  // namespace

double GridShape::wrap_dx(double a, double b) const { return wrap_offset(a, b, lx); }
double GridShape::wrap_dy(double a, double b) const { return wrap_offset(a, b, ly); }

Vec2 wrap_delta(const GridShape& g, Vec2 from, Vec2 to) {
  return {g.wrap_dx(from.x, to.x), g.wrap_dy(from.y, to.y)};
}

double wrap_distance(const GridShape& g, Vec2 a, Vec2 b) {
  return std::sqrt(norm_sq(wrap_delta(g, a, b)));
}

// ---------------------------------------------------------------------------
// Spectral workspace

struct SpectralWorkspace::Impl {
  fftw_complex* buf = nullptr;
  fftw_complex* spec = nullptr;
  fftw_complex* tmp = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  std::vector<double> kx, ky;  // angular wavenumbers per index
  mutable std::mutex mu;

  ~Impl() {
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    if (buf) fftw_free(buf);
    if (spec) fftw_free(spec);
    if (tmp) fftw_free(tmp);
  }
};

SpectralWorkspace::SpectralWorkspace(GridShape shape)
    : shape_(shape), impl_(std::make_unique<Impl>()) {
  if (shape.nx < 4 || shape.ny < 4) throw std::invalid_argument("grid too small for spectral ops");
  const int n = shape.cells();
  impl_->buf = fftw_alloc_complex(n);
  impl_->spec = fftw_alloc_complex(n);
  impl_->tmp = fftw_alloc_complex(n);
  impl_->fwd = fftw_plan_dft_2d(shape.nx, shape.ny, impl_->buf, impl_->spec,
                                FFTW_FORWARD, FFTW_ESTIMATE);
  impl_->bwd = fftw_plan_dft_2d(shape.nx, shape.ny, impl_->tmp, impl_->buf,
                                FFTW_BACKWARD, FFTW_ESTIMATE);
  impl_->kx.resize(shape.nx);
  impl_->ky.resize(shape.ny);
  for (int i = 0; i < shape.nx; ++i) {
    int k = (i <= shape.nx / 2) ? i : i - shape.nx;
    impl_->kx[i] = 2.0 * M_PI * k / shape.lx;
  }
  for (int j = 0; j < shape.ny; ++j) {
    int k = (j <= shape.ny / 2) ? j : j - shape.ny;
    impl_->ky[j] = 2.0 * M_PI * k / shape.ly;
  }
}

SpectralWorkspace::~SpectralWorkspace() = default;

namespace {
enum class Op { Dx, Dy, Dxx, Dyy, Dxy, Lap };
}

// Applies one spectral multiplier and inverse-transforms into `out`.
static void apply_op(const SpectralWorkspace::Impl& im, const GridShape& g,
                     fftw_plan bwd, Op op, Field& out) {
  const int nx = g.nx, ny = g.ny;
  const double inv_n = 1.0 / g.cells();
  const int nyq_x = nx / 2, nyq_y = ny / 2;
  for (int i = 0; i < nx; ++i) {
    const double kx = im.kx[i];
    for (int j = 0; j < ny; ++j) {
      const double ky = im.ky[j];
      const int idx = i * ny + j;
      const double re = im.spec[idx][0], imag = im.spec[idx][1];
      double are = 0, aim = 0;
      switch (op) {
        case Op::Dx:
          if (i != nyq_x) { are = -kx * imag; aim = kx * re; }
          break;
        case Op::Dy:
          if (j != nyq_y) { are = -ky * imag; aim = ky * re; }
          break;
        case Op::Dxx: are = -kx * kx * re; aim = -kx * kx * imag; break;
        case Op::Dyy: are = -ky * ky * re; aim = -ky * ky * imag; break;
        case Op::Dxy:
          if (i != nyq_x && j != nyq_y) { are = -kx * ky * re; aim = -kx * ky * imag; }
          break;
        case Op::Lap: {
          const double m = -(kx * kx + ky * ky);
          are = m * re; aim = m * imag;
          break;
        }
      }
      im.tmp[idx][0] = are * inv_n;
      im.tmp[idx][1] = aim * inv_n;
    }
  }
  fftw_execute(bwd);
  out.resize(g.cells());
  for (int idx = 0; idx < g.cells(); ++idx) out[idx] = im.buf[idx][0];
}

void SpectralWorkspace::laplacian(const Field& in, Field& out) const {
  std::lock_guard<std::mutex> lock(impl_->mu);
  if ((int)in.size() != shape_.cells()) throw std::invalid_argument("field/grid mismatch");
  for (int i = 0; i < shape_.cells(); ++i) {
    impl_->buf[i][0] = in[i];
    impl_->buf[i][1] = 0.0;
  }
  fftw_execute(impl_->fwd);
  apply_op(*impl_, shape_, impl_->bwd, Op::Lap, out);
}

void SpectralWorkspace::all_derivs(const Field& in, Derivs& out) const {
  std::lock_guard<std::mutex> lock(impl_->mu);
  if ((int)in.size() != shape_.cells()) throw std::invalid_argument("field/grid mismatch");
  for (int i = 0; i < shape_.cells(); ++i) {
    impl_->buf[i][0] = in[i];
    impl_->buf[i][1] = 0.0;
  }
  fftw_execute(impl_->fwd);
  apply_op(*impl_, shape_, impl_->bwd, Op::Dx, out.dx);
  apply_op(*impl_, shape_, impl_->bwd, Op::Dy, out.dy);
  apply_op(*impl_, shape_, impl_->bwd, Op::Dxx, out.dxx);
  apply_op(*impl_, shape_, impl_->bwd, Op::Dyy, out.dyy);
  apply_op(*impl_, shape_, impl_->bwd, Op::Dxy, out.dxy);
  out.lap.resize(shape_.cells());
  for (int i = 0; i < shape_.cells(); ++i) out.lap[i] = out.dxx[i] + out.dyy[i];
}

double SpectralWorkspace::tail_fraction(const Field& in) const {
  std::lock_guard<std::mutex> lock(impl_->mu);
  for (int i = 0; i < shape_.cells(); ++i) {
    impl_->buf[i][0] = in[i];
    impl_->buf[i][1] = 0.0;
  }
  fftw_execute(impl_->fwd);
  double max_all = 0, max_tail = 0;
  for (int i = 0; i < shape_.nx; ++i) {
    for (int j = 0; j < shape_.ny; ++j) {
      const int idx = i * shape_.ny + j;
      const double mag = std::hypot(impl_->spec[idx][0], impl_->spec[idx][1]);
      max_all = std::max(max_all, mag);
      const int ki = std::min(i, shape_.nx - i), kj = std::min(j, shape_.ny - j);
      if (ki > shape_.nx / 3 || kj > shape_.ny / 3) max_tail = std::max(max_tail, mag);
    }
  }
  return max_all > 0 ? max_tail / max_all : 0.0;
}

const SpectralWorkspace& spectral_workspace(const GridShape& shape) {
  struct Key {
    int nx, ny;
    double lx, ly;
    bool operator<(const Key& o) const {
      return std::tie(nx, ny, lx, ly) < std::tie(o.nx, o.ny, o.lx, o.ly);
    }
  };
  static std::map<Key, std::unique_ptr<SpectralWorkspace>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  Key k{shape.nx, shape.ny, shape.lx, shape.ly};
  auto it = cache.find(k);
  if (it == cache.end())
    it = cache.emplace(k, std::make_unique<SpectralWorkspace>(shape)).first;
  return *it->second;
}

// ---------------------------------------------------------------------------
// Finite differences (periodic indexing)

void fd_all_derivs(const GridShape& g, const Field& in, Derivs& out) {
  const int nx = g.nx, ny = g.ny;
  const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
  out.dx.resize(g.cells());
  out.dy.resize(g.cells());
  out.dxx.resize(g.cells());
  out.dyy.resize(g.cells());
  out.dxy.resize(g.cells());
  out.lap.resize(g.cells());
  for (int i = 0; i < nx; ++i) {
    const int ip = (i + 1) % nx, im = (i + nx - 1) % nx;
    for (int j = 0; j < ny; ++j) {
      const int jp = (j + 1) % ny, jm = (j + ny - 1) % ny;
      const int c = i * ny + j;
      const double f0 = in[c];
      const double fxp = in[ip * ny + j], fxm = in[im * ny + j];
      const double fyp = in[i * ny + jp], fym = in[i * ny + jm];
      out.dx[c] = 0.5 * (fxp - fxm) * ihx;
      out.dy[c] = 0.5 * (fyp - fym) * ihy;
      out.dxx[c] = (fxp - 2 * f0 + fxm) * ihx * ihx;
      out.dyy[c] = (fyp - 2 * f0 + fym) * ihy * ihy;
      out.dxy[c] = 0.25 * ihx * ihy *
                   (in[ip * ny + jp] - in[ip * ny + jm] - in[im * ny + jp] + in[im * ny + jm]);
      out.lap[c] = out.dxx[c] + out.dyy[c];
    }
  }
}

void fd_laplacian(const GridShape& g, const Field& in, Field& out) {
  const int nx = g.nx, ny = g.ny;
  const double ihx2 = 1.0 / (g.hx() * g.hx()), ihy2 = 1.0 / (g.hy() * g.hy());
  out.resize(g.cells());
  for (int i = 0; i < nx; ++i) {
    const int ip = (i + 1) % nx, im = (i + nx - 1) % nx;
    for (int j = 0; j < ny; ++j) {
      const int jp = (j + 1) % ny, jm = (j + ny - 1) % ny;
      const int c = i * ny + j;
      out[c] = (in[ip * ny + j] - 2 * in[c] + in[im * ny + j]) * ihx2 +
               (in[i * ny + jp] - 2 * in[c] + in[i * ny + jm]) * ihy2;
    }
  }
}

double interp_periodic(const GridShape& g, const Field& f, Vec2 p) {
  double fx = p.x / g.hx(), fy = p.y / g.hy();
  fx -= g.nx * std::floor(fx / g.nx);
  fy -= g.ny * std::floor(fy / g.ny);
  int i0 = (int)std::floor(fx) % g.nx, j0 = (int)std::floor(fy) % g.ny;
  const double ax = fx - std::floor(fx), ay = fy - std::floor(fy);
  const int i1 = (i0 + 1) % g.nx, j1 = (j0 + 1) % g.ny;
  return (1 - ax) * (1 - ay) * f[i0 * g.ny + j0] + ax * (1 - ay) * f[i1 * g.ny + j0] +
         (1 - ax) * ay * f[i0 * g.ny + j1] + ax * ay * f[i1 * g.ny + j1];
}

double fixed_sum(const Field& f) {
  double s = 0.0, c = 0.0;
  for (double v : f) {  // Kahan, fixed order
    double y = v - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

double fixed_dot(const Field& a, const Field& b) {
  double s = 0.0, c = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double y = a[i] * b[i] - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Zonal sphere operators

void zonal_laplacian_unit(const ZonalShape& z, const Field& in, Field& out) {
  const int m = z.m;
  const double h = z.h();
  const int p = z.dim - 1;  // sin^{n-1} weights
  out.resize(m);
  for (int j = 0; j < m; ++j) {
    const double sc = std::pow(std::sin(z.theta(j)), p);
    // Edge weights vanish at the poles, which encodes the zonal smoothness
    // condition f'(0) = f'(pi) = 0.
    const double sp = (j + 1 < m) ? std::pow(std::sin((j + 1) * h), p) : 0.0;
    const double sm = (j > 0) ? std::pow(std::sin(j * h), p) : 0.0;
    const double up = (j + 1 < m) ? in[j + 1] : in[j];
    const double um = (j > 0) ? in[j - 1] : in[j];
    out[j] = (sp * (up - in[j]) - sm * (in[j] - um)) / (sc * h * h);
  }
}

void zonal_dtheta(const ZonalShape& z, const Field& in, Field& out) {
  const int m = z.m;
  const double h = z.h();
  out.resize(m);
  for (int j = 0; j < m; ++j) {
    // Reflecting ghost values: zonal fields are even across both poles.
    const double up = (j + 1 < m) ? in[j + 1] : in[m - 1];
    const double um = (j > 0) ? in[j - 1] : in[0];
    out[j] = 0.5 * (up - um) / h;
  }
}

void zonal_d2theta(const ZonalShape& z, const Field& in, Field& out) {
  const int m = z.m;
  const double h = z.h();
  out.resize(m);
  for (int j = 0; j < m; ++j) {
    const double up = (j + 1 < m) ? in[j + 1] : in[m - 1];
    const double um = (j > 0) ? in[j - 1] : in[0];
    out[j] = (up - 2 * in[j] + um) / (h * h);
  }
}

double unit_sphere_area(int d) {
  // Area of S^d embedded in R^{d+1}.
  if (d == 0) return 2.0;
  if (d == 1) return 2.0 * M_PI;
  return 2.0 * M_PI * unit_sphere_area(d - 2) / (d - 1);
}

double zonal_weight(const ZonalShape& z, int j, double rho) {
  return unit_sphere_area(z.dim - 1) * std::pow(rho, z.dim) *
         std::pow(std::sin(z.theta(j)), z.dim - 1) * z.h();
}

double zonal_volume(const ZonalShape& z, double rho) {
  double s = 0;
  for (int j = 0; j < z.m; ++j) s += zonal_weight(z, j, rho);
  return s;
}

double interp_zonal(const ZonalShape& z, const Field& f, double theta) {
  theta = std::clamp(theta, 0.0, M_PI);
  double fj = theta / z.h() - 0.5;
  if (fj <= 0) return f.front();
  if (fj >= z.m - 1) return f.back();
  int j0 = (int)std::floor(fj);
  double a = fj - j0;
  return (1 - a) * f[j0] + a * f[j0 + 1];
}

}  // namespace lyh
