// Uniform periodic grids and the differential operators used on them:
// trigonometric (FFT) differentiation for smooth periodic fields and
// centered finite differences for fields that are only numerically periodic
// (e.g. rapidly decaying data on a large flat patch).
#pragma once

#include <array>
#include <complex>
#include <memory>
#include <stdexcept>
#include <vector>

namespace lyh {

using Field = std::vector<double>;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm_sq(Vec2 a) { return dot(a, a); }

// Cell-centered n=2 periodic grid over [0,lx) x [0,ly).
struct GridShape {
  int nx = 0;
  int ny = 0;
  double lx = 1.0;
  double ly = 1.0;

  int cells() const { return nx * ny; }
  double hx() const { return lx / nx; }
  double hy() const { return ly / ny; }
  double cell_area() const { return hx() * hy(); }
  int index(int i, int j) const { return i * ny + j; }
  Vec2 point(int i, int j) const { return {i * hx(), j * hy()}; }
  Vec2 point(int idx) const { return point(idx / ny, idx % ny); }

  // Shortest signed offset from a to b through the periodic wraps.
  double wrap_dx(double a, double b) const;
  double wrap_dy(double a, double b) const;

  bool operator==(const GridShape&) const = default;
};

// Periodic (wrapped) Euclidean displacement and distance.
Vec2 wrap_delta(const GridShape& g, Vec2 from, Vec2 to);
double wrap_distance(const GridShape& g, Vec2 a, Vec2 b);

// First/second derivative bundle of a scalar field.
struct Derivs {
  Field dx, dy, dxx, dyy, dxy, lap;
};

// FFT-based differentiation on a periodic grid.  Plans are created once per
// shape; execution does not mutate logical state and is safe to reuse
// sequentially.  Nyquist modes are zeroed for odd-order derivatives.
class SpectralWorkspace {
 public:
  explicit SpectralWorkspace(GridShape shape);
  ~SpectralWorkspace();
  SpectralWorkspace(const SpectralWorkspace&) = delete;
  SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

  const GridShape& shape() const { return shape_; }

  void laplacian(const Field& in, Field& out) const;
  // Computes every member of Derivs with one forward transform.
  void all_derivs(const Field& in, Derivs& out) const;
  // Low-pass indicator of smoothness: max |coefficient| in the top third of
  // the spectrum relative to the largest coefficient.
  double tail_fraction(const Field& in) const;

  struct Impl;

 private:
  GridShape shape_;
  std::unique_ptr<Impl> impl_;
};

// Shared per-shape workspace cache (plans are expensive to rebuild).
const SpectralWorkspace& spectral_workspace(const GridShape& shape);

// Second-order centered finite differences with periodic indexing.  Exact on
// quadratics, which makes them the right tool for log-Gaussian fields on the
// Euclidean patch where trigonometric differentiation would see a
// non-periodic parabola.
void fd_all_derivs(const GridShape& g, const Field& in, Derivs& out);
void fd_laplacian(const GridShape& g, const Field& in, Field& out);

// Bilinear interpolation of a cell-centered periodic field.
double interp_periodic(const GridShape& g, const Field& f, Vec2 p);

// Fixed-order (deterministic) sum and weighted sum.
double fixed_sum(const Field& f);
double fixed_dot(const Field& a, const Field& b);

// ---------------------------------------------------------------------------
// Zonal (rotationally symmetric) fields on the round n-sphere, reduced to the
// polar angle theta in (0, pi).  Cell-centered grid theta_j = (j+1/2) h.
struct ZonalShape {
  int m = 0;       // number of theta cells
  int dim = 2;     // sphere dimension n

  double h() const { return M_PI / m; }
  double theta(int j) const { return (j + 0.5) * h(); }
};

// Conservative-form Laplace-Beltrami operator on the unit round sphere
// restricted to zonal fields; divide by rho^2 for radius rho.
void zonal_laplacian_unit(const ZonalShape& z, const Field& in, Field& out);
// d/dtheta by centered differences with reflecting (zonal-smooth) ends.
void zonal_dtheta(const ZonalShape& z, const Field& in, Field& out);
void zonal_d2theta(const ZonalShape& z, const Field& in, Field& out);

// Integration weight of cell j on the sphere of radius rho:
//   Vol(S^{n-1}) rho^n sin^{n-1}(theta_j) h.
double zonal_weight(const ZonalShape& z, int j, double rho);
// Total measure of the zonal weights (matches Vol(S^n_rho) to O(h^2)).
double zonal_volume(const ZonalShape& z, double rho);
// Surface area of the unit (n-1)-sphere.
double unit_sphere_area(int nminus1_dim);

double interp_zonal(const ZonalShape& z, const Field& f, double theta);

}  // namespace lyh
