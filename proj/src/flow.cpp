#include "exitflow/flow.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "exitflow/errors.hpp"
#include "exitflow/quadrature.hpp"

namespace exitflow {

namespace {

// The flow is integrated in log coordinates l = ln x: positivity is
// automatic (0 is an equilibrium), tolerances become relative, and start
// points as small as e^{-700} keep full precision during the growth phase.
// Trial evaluations above the ceiling are clamped rather than rejected (the
// integrator probes far ahead on the near-linear stretch); only accepted
// states are checked against the guard.
double log_rhs(const DiffusionModel& model, double l, double guard_log_hi) {
  const double x = std::exp(std::min(l, guard_log_hi));
  return model.mu(x) / x;
}

void check_guard(double x, double guard_hi, const char* who) {
  if (x > guard_hi * (1.0 + 1e-9))
    throw BlowUp(std::string(who) + ": trajectory left [0, R_sim]");
}

}  // namespace

double flow(const DiffusionModel& model, double x0, double t,
            const OdeOptions& opt, OdeStats* stats) {
  if (t < 0.0) throw Error("flow: negative duration");
  if (x0 < 0.0) throw Error("flow: negative start point");
  if (x0 == 0.0) return 0.0;
  const double guard_hi = 1.01 * std::max(model.sim_ceiling, x0);
  const double lhi = std::log(guard_hi);
  auto f = [&](double, double l) { return log_rhs(model, l, lhi); };
  const double x =
      std::exp(integrate_ode<double>(f, std::log(x0), 0.0, t, opt, stats));
  check_guard(x, guard_hi, "flow");
  return x;
}

FlowSolution flow_path(const DiffusionModel& model, double x0,
                       const Eigen::VectorXd& times, const OdeOptions& opt) {
  if (!(x0 > 0.0)) throw Error("flow_path: need x0 > 0");
  FlowSolution sol;
  sol.times = times;
  sol.states.resize(times.size());
  double l = std::log(x0), t = 0.0;
  const double guard_hi = 1.01 * std::max(model.sim_ceiling, x0);
  const double lhi = std::log(guard_hi);
  auto f = [&](double, double y) { return log_rhs(model, y, lhi); };
  for (Eigen::Index i = 0; i < times.size(); ++i) {
    l = integrate_ode<double>(f, l, t, times[i], opt, &sol.stats);
    t = times[i];
    sol.states[i] = std::exp(l);
    check_guard(sol.states[i], guard_hi, "flow_path");
  }
  return sol;
}

double RescaledFlow::eval(double y) const {
  if (y <= 0.0) return 0.0;
  if (y >= y_max()) return phi_tilde[phi_tilde.size() - 1];
  return interp(y);
}

namespace {

// phi~(y) by pushing backward in time through the linear flow and forward
// through the nonlinear one, doubling the horizon until Cauchy-stable.
double rescaled_value(const DiffusionModel& model, double y, double* horizon) {
  if (y == 0.0) return 0.0;
  const double g = model.gamma;
  double T = 20.0 / g;
  const double T_cap = 1024.0 / g;
  double prev = flow(model, y * std::exp(-g * T), T);
  while (true) {
    const double T2 = 2.0 * T;
    const double start = y * std::exp(-g * T2);
    if (start < 1e-300)
      throw NoConvergence("compute_rescaled_flow: start point underflow");
    const double cur = flow(model, start, T2);
    if (std::abs(cur - prev) < 1e-8) {
      if (horizon) *horizon = std::max(*horizon, T2);
      return cur;
    }
    if (T2 > T_cap) {
      std::ostringstream os;
      os << "compute_rescaled_flow: horizon cap reached, last values " << prev
         << ", " << cur;
      throw NoConvergence(os.str());
    }
    prev = cur;
    T = T2;
  }
}

}  // namespace

RescaledFlow compute_rescaled_flow(const DiffusionModel& model, double y_max,
                                   int grid_size) {
  if (grid_size < 4) throw Error("compute_rescaled_flow: grid too small");
  if (!(y_max > 0.0)) throw Error("compute_rescaled_flow: need y_max > 0");

  RescaledFlow rf;
  rf.gamma = model.gamma;
  rf.model_hash = model.hash();
  rf.grid.resize(grid_size);
  rf.phi_tilde.resize(grid_size);
  rf.horizon_used = 0.0;
  for (int i = 0; i < grid_size; ++i) {
    const double y = y_max * double(i) / double(grid_size - 1);
    rf.grid[i] = y;
    rf.phi_tilde[i] = rescaled_value(model, y, &rf.horizon_used);
  }
  rf.interp = PchipInterpolant(rf.grid, rf.phi_tilde);

  rf.cap_is_xc = model.x_c.has_value();
  rf.active_cap = model.x_c ? *model.x_c
                            : std::numeric_limits<double>::infinity();

  // inverse table + round-trip cross-check on interior nodes
  std::vector<double> wx, wv;
  double worst = 0.0;
  for (int i = 1; i < grid_size; ++i) {
    const double x = rf.phi_tilde[i];
    if (!(x > 0.0) || x >= rf.active_cap) continue;
    const double w = invert_w(model, x);
    if (!std::isfinite(w)) continue;
    wx.push_back(x);
    wv.push_back(w);
    worst = std::max(worst, std::abs(w - rf.grid[i]) /
                                std::max(std::abs(rf.grid[i]), 1.0));
  }
  rf.w_grid = Eigen::Map<Eigen::VectorXd>(wx.data(), wx.size());
  rf.w_values = Eigen::Map<Eigen::VectorXd>(wv.data(), wv.size());
  rf.cross_check_residual = worst;
  return rf;
}

double invert_w(const DiffusionModel& model, double x) {
  if (!(x > 0.0)) return 0.0;
  const double g = model.gamma;
  const double cap = model.x_c ? *model.x_c
                               : std::numeric_limits<double>::infinity();
  if (x >= cap * (1.0 - 1e-12))
    return std::numeric_limits<double>::infinity();  // divergent-at-cap flag

  ScalarFn integrand = [&](double u) {
    const double mu = model.mu(u);
    if (mu <= 0.0)
      throw SingularIntegrand("invert_w: mu vanishes inside (0, x)");
    return g / mu - 1.0 / u;
  };
  const double delta = std::min(1e-4 * model.xc_or(1.0), x / 8.0);
  QuadOptions opt;
  opt.abs_tol = 1e-13;
  opt.rel_tol = 1e-11;
  const double I =
      integrate_with_removable_endpoint(integrand, 0.0, x, 0.0, delta, opt)
          .value;
  if (I > 700.0) return std::numeric_limits<double>::infinity();
  return x * std::exp(I);
}

PoincareResidual poincare_residual(
    const DiffusionModel& model, const RescaledFlow& rescaled,
    const std::vector<std::pair<double, double>>& samples) {
  PoincareResidual res;
  const double g = model.gamma;

  std::vector<std::pair<double, double>> pts = samples;
  if (pts.empty()) {
    const int n = static_cast<int>(rescaled.grid.size());
    for (int i = n / 10; i < n; i += std::max(1, n / 10))
      for (double t : {0.25 / g, 0.5 / g, 1.0 / g, 2.0 / g})
        pts.emplace_back(rescaled.grid[i], t);
  }
  for (const auto& [y, t] : pts) {
    const double ylift = y * std::exp(g * t);
    if (ylift > rescaled.y_max()) continue;
    const double lhs = rescaled.eval(ylift);
    const double rhs = flow(model, rescaled.eval(y), t);
    res.functional = std::max(res.functional, std::abs(lhs - rhs));
  }

  // infinitesimal form gamma*y*phi~'(y) = mu(phi~(y)), centered differences
  const int n = static_cast<int>(rescaled.grid.size());
  for (int i = 2; i < n - 2; ++i) {
    const double y = rescaled.grid[i];
    const double h = 0.25 * (rescaled.grid[i + 1] - rescaled.grid[i]);
    const double d = (rescaled.eval(y + h) - rescaled.eval(y - h)) / (2.0 * h);
    res.ode_form = std::max(
        res.ode_form, std::abs(g * y * d - model.mu(rescaled.eval(y))));
  }
  return res;
}

void write_rescaled_flow_csv(const std::string& path, const RescaledFlow& rf) {
  std::ofstream os(path);
  if (!os) throw Error("write_rescaled_flow_csv: cannot open " + path);
  os.precision(17);
  os << "# meta: model_hash=" << std::hex << rf.model_hash << std::dec
     << " gamma=" << rf.gamma << " tolerance=1e-8"
     << " horizon=" << rf.horizon_used << " cap=" << rf.active_cap
     << " cap_is_xc=" << (rf.cap_is_xc ? 1 : 0) << "\n";
  os << "y,phi_tilde\n";
  for (Eigen::Index i = 0; i < rf.grid.size(); ++i)
    os << rf.grid[i] << "," << rf.phi_tilde[i] << "\n";
}

RescaledFlow read_rescaled_flow_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("read_rescaled_flow_csv: cannot open " + path);
  RescaledFlow rf;
  std::string line;
  std::vector<double> ys, ps;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq);
        const std::string val = tok.substr(eq + 1);
        if (key == "gamma") rf.gamma = std::stod(val);
        else if (key == "horizon") rf.horizon_used = std::stod(val);
        else if (key == "cap") rf.active_cap = std::stod(val);
        else if (key == "cap_is_xc") rf.cap_is_xc = val == "1";
        else if (key == "model_hash")
          rf.model_hash = std::stoull(val, nullptr, 16);
      }
      continue;
    }
    if (line.rfind("y,", 0) == 0) continue;  // column header
    const auto comma = line.find(',');
    ys.push_back(std::stod(line.substr(0, comma)));
    ps.push_back(std::stod(line.substr(comma + 1)));
  }
  rf.grid = Eigen::Map<Eigen::VectorXd>(ys.data(), ys.size());
  rf.phi_tilde = Eigen::Map<Eigen::VectorXd>(ps.data(), ps.size());
  rf.interp = PchipInterpolant(rf.grid, rf.phi_tilde);
  return rf;
}

}  // namespace exitflow
