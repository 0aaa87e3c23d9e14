#ifndef EXITFLOW_ODE_HPP
#define EXITFLOW_ODE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>

#include "exitflow/errors.hpp"

namespace exitflow {

struct OdeOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  std::size_t max_steps = 50'000'000;
};

struct OdeStats {
  std::size_t steps = 0;
  std::size_t rejected = 0;
  double max_error_estimate = 0.0;
};

namespace detail {
template <class State>
double ode_err_norm(const State& e, const State& y0, const State& y1,
                    double atol, double rtol) {
  if constexpr (std::is_floating_point_v<State>) {
    const double sc = atol + rtol * std::max(std::abs(y0), std::abs(y1));
    return std::abs(e) / sc;
  } else {
    double m = 0.0;
    for (int i = 0; i < y0.size(); ++i) {
      const double sc =
          atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
      m = std::max(m, std::abs(e[i]) / sc);
    }
    return m;
  }
}
}  // namespace detail

// Dormand-Prince 5(4) with adaptive step size. f(t, y) -> dy/dt.
// State is double or a small fixed-size Eigen vector.
template <class State, class F>
State integrate_ode(F&& f, State y, double t0, double t1,
                    const OdeOptions& opt = {}, OdeStats* stats = nullptr) {
  if (t1 <= t0) return y;
  double t = t0;
  double dt = (t1 - t0) / 100.0;
  OdeStats local;
  OdeStats& st = stats ? *stats : local;

  while (t < t1) {
    if (st.steps + st.rejected > opt.max_steps)
      throw NoConvergence("integrate_ode: step budget exhausted");
    dt = std::min(dt, t1 - t);

    const State k1 = f(t, y);
    const State k2 = f(t + dt / 5.0, State(y + dt * (0.2 * k1)));
    const State k3 =
        f(t + 0.3 * dt, State(y + dt * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2)));
    const State k4 = f(t + 0.8 * dt,
                       State(y + dt * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 +
                                       32.0 / 9.0 * k3)));
    const State k5 =
        f(t + 8.0 / 9.0 * dt,
          State(y + dt * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 +
                          64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4)));
    const State k6 =
        f(t + dt, State(y + dt * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 +
                                  46732.0 / 5247.0 * k3 + 49.0 / 176.0 * k4 -
                                  5103.0 / 18656.0 * k5)));
    const State ynew =
        y + dt * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4 -
                  2187.0 / 6784.0 * k5 + 11.0 / 84.0 * k6);
    const State k7 = f(t + dt, ynew);
    const State y4 =
        y + dt * (5179.0 / 57600.0 * k1 + 7571.0 / 16695.0 * k3 +
                  393.0 / 640.0 * k4 - 92097.0 / 339200.0 * k5 +
                  187.0 / 2100.0 * k6 + 1.0 / 40.0 * k7);
    const State err = ynew - y4;
    const double en = detail::ode_err_norm(err, y, ynew, opt.abs_tol, opt.rel_tol);

    if (en <= 1.0 || dt <= 1e-14 * std::max(1.0, std::abs(t))) {
      t += dt;
      y = ynew;
      ++st.steps;
      if constexpr (std::is_floating_point_v<State>) {
        st.max_error_estimate = std::max(st.max_error_estimate, std::abs(err));
      } else {
        st.max_error_estimate =
            std::max(st.max_error_estimate, double(err.cwiseAbs().maxCoeff()));
      }
    } else {
      ++st.rejected;
    }
    const double factor =
        (en > 0.0) ? 0.9 * std::pow(en, -0.2) : 5.0;
    dt *= std::clamp(factor, 0.2, 5.0);
  }
  return y;
}

}  // namespace exitflow

#endif
