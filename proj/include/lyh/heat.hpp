// Heat-equation machinery on a flow: the forward equation for h, the
// conjugate equation for u (tau = T - t), fundamental-solution approximation
// by evolving concentrated Gaussians with width extrapolation, and exact
// kernel histories where closed forms exist.
#pragma once

#include "lyh/flow.hpp"
#include "lyh/kernels.hpp"

namespace lyh {

// Positive fields are flushed to this floor and the cell treated as masked.
inline constexpr double kMaskFloor = 1e-300;
inline bool is_masked(double v) { return v <= kMaskFloor; }

enum class TimeDirection { forward_t, conjugate_tau };

struct SolverOptions {
  double cfl = 0.1;            // dt <= cfl * h_metric^2 (trig RK4 stability)
  double node_factor = 0.5;    // stored-node spacing ~ node_factor * h_metric
  double node_dt = 0.0;        // explicit node spacing override (0 = auto)
  std::vector<double> store_times;  // explicit node times (native clock)
};

struct FieldHistory {
  FlowPtr flow;
  TimeDirection dir = TimeDirection::conjugate_tau;
  std::vector<double> times;   // ascending; tau for conjugate, absolute t forward
  std::vector<Field> values;
  std::vector<double> mass;    // integral u dmu at each node
  // Fundamental-solution metadata.
  bool has_center = false;
  Vec2 center;                 // grid kinds (sphere solutions center at the pole)
  double t_center = 0.0;       // absolute t of the concentration point
  double width_error = 0.0;    // max relative two-width discrepancy
  double t_init = 0.0;         // forward solutions: initial-data time
  double solver_dt = 0.0;      // RK4 step used (0 for exact histories)

  int nodes() const { return (int)times.size(); }
  // Absolute t of a node.
  double t_abs(int node) const {
    return dir == TimeDirection::conjugate_tau ? flow->spec.horizon - times[node]
                                               : times[node];
  }
  // tau = T - t of a node.
  double tau_of(int node) const {
    return dir == TimeDirection::conjugate_tau ? times[node]
                                               : flow->spec.horizon - times[node];
  }
  // Age since the initial/concentration time (forward solutions).
  double age_of(int node) const { return times[node] - t_init; }
  int node_near(double time) const;   // nearest node in native parametrization
  int node_at(double time) const;     // exact node (throws if absent)
  Field at_time(double time) const;   // linear interpolation between nodes
};

// Flushes non-masked values below the floor and returns the masked count.
int apply_mask_floor(Field& f);
int masked_count(const Field& f);

// h0 given at t_init; integrates dh/dt = lap_{g(t)} h to t_end.
FieldHistory solve_forward_heat(FlowPtr flow, const Field& h0, double t_init,
                                double t_end, const SolverOptions& opts = {});

// uT given at tau = 0 (t = T); integrates du/dtau = lap u - R u to tau_end.
FieldHistory solve_conjugate_heat(FlowPtr flow, const Field& uT, double tau_end,
                                  const SolverOptions& opts = {});

// Conjugate fundamental solution centered (x, T), approximated by evolving
// normalized Gaussians of the given widths (metric units) and extrapolating
// in width^2 (iterated Richardson across the schedule).  Widths must
// decrease and each must span >= 4 cells.  Sphere solutions center at the
// pole and ignore `center`.
FieldHistory fundamental_solution(FlowPtr flow, Vec2 center, double tau_end,
                                  std::vector<double> widths,
                                  const SolverOptions& opts = {});

// Forward-heat fundamental solution concentrated at (center, t_center).
FieldHistory forward_fundamental_solution(FlowPtr flow, Vec2 center,
                                          double t_center, double t_end,
                                          std::vector<double> widths,
                                          const SolverOptions& opts = {});

// Default width schedule: {8, 4*sqrt(2), 4} cells in metric units.
std::vector<double> default_widths(const FlowSolution& flow);

// Exact closed-form kernel value (euclidean Gaussian / torus theta sum).
double closed_form_kernel(const BackgroundSpec& spec, Vec2 x, Vec2 y, double tau);

// Exact kernel sampled as a FieldHistory at the given tau nodes:
// grid statics via theta sums, shrinking sphere via the Legendre series.
// Throws for the conformal kind (no closed form).
FieldHistory exact_kernel_history(FlowPtr flow, Vec2 center,
                                  const std::vector<double>& tau_nodes);

// Exact forward-kernel history concentrated at (center, t_center) on static
// grids / shrinking sphere, sampled at absolute times t_nodes.
FieldHistory exact_forward_kernel_history(FlowPtr flow, Vec2 center,
                                          double t_center,
                                          const std::vector<double>& t_nodes);

// Constant-in-space caloric history (h == c solves the forward equation on
// static backgrounds; on flows it is still a valid weight field).
FieldHistory constant_history(FlowPtr flow, double value);

// Exact caloric combination of low torus Fourier modes:
//   h(x,y,t) = 1 + sum_i a_i e^{-lambda_i (t - t_ref)} cos(2 pi k_i . x/L),
// sampled at t_nodes.  Solves the static heat equation exactly; amplitudes
// must keep it positive.
struct FourierMode {
  int kx = 1, ky = 0;
  double amp = 0.5;
};
FieldHistory fourier_caloric_history(FlowPtr flow, const std::vector<FourierMode>& modes,
                                     double t_ref, const std::vector<double>& t_nodes);

// integral of u*h dmu at absolute time t (both histories on the same flow).
double pair_integral(const FieldHistory& u, const FieldHistory& h, double t_abs);

// integral of f dmu at absolute time t.
double field_integral(const FlowSolution& flow, const Field& f, double t_abs);

}  // namespace lyh
