#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdr/grid.hpp"

namespace mdr {

/// Uniform inclusive sampling of an input interval. count == 1 picks the
/// midpoint; count >= 2 includes both endpoints exactly.
inline std::vector<double> discretize_inputs(double lo, double hi, int count) {
  if (count < 1) throw std::invalid_argument("discretize_inputs: count must be >= 1");
  if (lo > hi) throw std::invalid_argument("discretize_inputs: lo must be <= hi");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  if (count == 1) {
    out.push_back(0.5 * (lo + hi));
    return out;
  }
  const double step = (hi - lo) / double(count - 1);
  for (int k = 0; k < count; ++k)
    out.push_back(k == count - 1 ? hi : lo + k * step);
  return out;
}

/// A discretized compact input set: `count` points of dimension `dim`,
/// stored row by row.
struct InputGrid {
  int dim = 1;
  std::vector<double> flat;

  InputGrid() = default;
  explicit InputGrid(std::vector<double> scalars) : dim(1), flat(std::move(scalars)) {}

  int count() const { return dim == 0 ? 0 : static_cast<int>(flat.size()) / dim; }
  const double* at(int k) const { return flat.data() + std::size_t(k) * dim; }
};

/// Controlled dynamics x' = f(x, u, d) with discretized input sets.
/// An empty disturbance set means a one-player problem. Models are immutable
/// after construction; flow evaluation is pure.
class SystemModel {
 public:
  virtual ~SystemModel() = default;

  virtual int dim() const = 0;
  virtual std::string name() const = 0;

  /// d may be null for one-player models.
  virtual void flow(const double* x, const double* u, const double* d,
                    double* out) const = 0;

  const InputGrid& controls() const { return controls_; }
  const InputGrid& disturbances() const { return disturbances_; }
  bool two_player() const { return disturbances_.count() > 0; }
  const std::map<std::string, double>& params() const { return params_; }

 protected:
  InputGrid controls_;
  InputGrid disturbances_;
  std::map<std::string, double> params_;
};

/// (x1, x2) -> (x2, u)
inline void flow_double_integrator(const double* x, double u, double* out) {
  out[0] = x[1];
  out[1] = u;
}

/// Relative pursuit-evasion kinematics: planar positions, fixed speeds,
/// controllable turn rates. State is pursuer position and heading relative
/// to the evader.
inline void flow_pursuit_evasion(const double* x, double u, double d, double v_u,
                                 double v_d, double* out) {
  out[0] = -v_u + v_d * std::cos(x[2]) + u * x[1];
  out[1] = v_d * std::sin(x[2]) - u * x[0];
  out[2] = d - u;
}

class DoubleIntegrator final : public SystemModel {
 public:
  explicit DoubleIntegrator(double u_max = 2.0, int n_controls = 2) : u_max_(u_max) {
    if (!(u_max > 0.0)) throw std::invalid_argument("DoubleIntegrator: u_max must be > 0");
    controls_ = InputGrid(discretize_inputs(-u_max, u_max, n_controls));
    params_ = {{"u_max", u_max}};
  }
  int dim() const override { return 2; }
  std::string name() const override { return "double_integrator"; }
  void flow(const double* x, const double* u, const double*, double* out) const override {
    flow_double_integrator(x, u[0], out);
  }

 private:
  double u_max_;
};

class PursuitEvasion final : public SystemModel {
 public:
  PursuitEvasion(double v_u = 5.0, double v_d = 5.0, double u_max = 1.0,
                 double d_max = 1.0, int n_controls = 11, int n_disturbances = 11)
      : v_u_(v_u), v_d_(v_d) {
    controls_ = InputGrid(discretize_inputs(-u_max, u_max, n_controls));
    if (n_disturbances > 0)
      disturbances_ = InputGrid(discretize_inputs(-d_max, d_max, n_disturbances));
    params_ = {{"v_u", v_u}, {"v_d", v_d}, {"u_max", u_max}, {"d_max", d_max}};
  }
  int dim() const override { return 3; }
  std::string name() const override { return "pursuit_evasion"; }
  void flow(const double* x, const double* u, const double* d, double* out) const override {
    flow_pursuit_evasion(x, u[0], d ? d[0] : 0.0, v_u_, v_d_, out);
  }

 private:
  double v_u_, v_d_;
};

/// Constant-speed drift on a line with a single (inert) control. A minimal
/// fixture system: with dt = spacing/speed every node maps onto its right
/// neighbor, the last one onto itself via clamping.
class Chain1D final : public SystemModel {
 public:
  explicit Chain1D(double speed = 1.0) : speed_(speed) {
    controls_ = InputGrid(std::vector<double>{1.0});
    params_ = {{"speed", speed}};
  }
  int dim() const override { return 1; }
  std::string name() const override { return "chain1d"; }
  void flow(const double*, const double* u, const double*, double* out) const override {
    out[0] = u[0] * speed_;
  }

 private:
  double speed_;
};

/// Forward-Euler step x + dt*f(x,u,d). Periodic coordinates are not wrapped
/// here; the grid wraps at interpolation time.
inline std::vector<double> euler_step(const SystemModel& model,
                                      const std::vector<double>& x, const double* u,
                                      const double* d, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("euler_step: dt must be > 0");
  std::vector<double> f(model.dim()), out(model.dim());
  model.flow(x.data(), u, d, f.data());
  for (int j = 0; j < model.dim(); ++j) out[j] = x[j] + dt * f[j];
  return out;
}

/// max over grid nodes x input sets of ||f(x,u,d)||_inf.
inline double max_flow_inf_norm(const GridSpec& grid, const SystemModel& model) {
  double m = 0.0;
  double x[kMaxDim], f[kMaxDim];
  const int nu = model.controls().count();
  const int nd = model.disturbances().count();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.node_coords_into(i, x);
    for (int a = 0; a < nu; ++a) {
      const double* u = model.controls().at(a);
      if (nd == 0) {
        model.flow(x, u, nullptr, f);
        for (int j = 0; j < model.dim(); ++j) m = std::max(m, std::fabs(f[j]));
      } else {
        for (int b = 0; b < nd; ++b) {
          model.flow(x, u, model.disturbances().at(b), f);
          for (int j = 0; j < model.dim(); ++j) m = std::max(m, std::fabs(f[j]));
        }
      }
    }
  }
  return m;
}

/// CFL-like default time step: min_j dx_j / F_max, so a single Euler step
/// moves at most one cell along the fastest axis.
inline double cfl_dt(const GridSpec& grid, const SystemModel& model) {
  const double fmax = max_flow_inf_norm(grid, model);
  if (fmax == 0.0) return grid.min_spacing();  // stationary flow: any dt works
  return grid.min_spacing() / fmax;
}

}  // namespace mdr
