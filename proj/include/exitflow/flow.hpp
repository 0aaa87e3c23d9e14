#ifndef EXITFLOW_FLOW_HPP
#define EXITFLOW_FLOW_HPP

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "exitflow/interp.hpp"
#include "exitflow/model.hpp"
#include "exitflow/ode.hpp"

namespace exitflow {

struct FlowSolution {
  Eigen::VectorXd times;
  Eigen::VectorXd states;
  OdeStats stats;
};

// phi_t(x0): deterministic flow of dx/dt = mu(x). Throws BlowUp if the
// trajectory leaves [0, sim_ceiling] (possible only for ill-posed customs).
double flow(const DiffusionModel& model, double x0, double t,
            const OdeOptions& opt = {}, OdeStats* stats = nullptr);

// trajectory sampled at the given increasing times (times[0] >= 0)
FlowSolution flow_path(const DiffusionModel& model, double x0,
                       const Eigen::VectorXd& times,
                       const OdeOptions& opt = {});

// Tabulated rescaled flow phi~(y) = lim_t phi_t(y e^{-gamma t}) with its
// inverse w, interpolated monotone-cubically between grid points.
struct RescaledFlow {
  Eigen::VectorXd grid;        // y abscissae, grid[0] == 0
  Eigen::VectorXd phi_tilde;   // phi~(y)
  Eigen::VectorXd w_grid;      // x in (0, active_cap)
  Eigen::VectorXd w_values;    // w(x)
  double gamma = 0.0;
  double horizon_used = 0.0;          // final T_h of the limit iteration
  double cross_check_residual = 0.0;  // worst |w(phi~(y)) - y| / max(y,1)
  double active_cap = 0.0;            // upper bound of phi~'s range used for w
  bool cap_is_xc = false;
  std::uint64_t model_hash = 0;

  PchipInterpolant interp;

  double y_max() const { return grid.size() ? grid[grid.size() - 1] : 0.0; }
  // evaluate phi~; exact 0 at 0, saturates at the last tabulated value above
  // y_max (phi~ is bounded and increasing)
  double eval(double y) const;
};

RescaledFlow compute_rescaled_flow(const DiffusionModel& model, double y_max,
                                   int grid_size);

// w(x) = x exp(int_0^x (gamma/mu(u) - 1/u) du) for x in (0, cap).
// Returns +inf (with no throw) when x is at/above the active cap; throws
// SingularIntegrand if mu vanishes strictly inside (0, x).
double invert_w(const DiffusionModel& model, double x);

struct PoincareResidual {
  double functional = 0.0;  // sup |phi~(y e^{gamma t}) - phi_t(phi~(y))|
  double ode_form = 0.0;    // sup |gamma y phi~'(y) - mu(phi~(y))|
  double max() const { return functional > ode_form ? functional : ode_form; }
};

PoincareResidual poincare_residual(
    const DiffusionModel& model, const RescaledFlow& rescaled,
    const std::vector<std::pair<double, double>>& samples = {});

void write_rescaled_flow_csv(const std::string& path, const RescaledFlow& rf);
RescaledFlow read_rescaled_flow_csv(const std::string& path);

}  // namespace exitflow

#endif
