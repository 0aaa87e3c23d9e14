#ifndef EXITFLOW_MODEL_HPP
#define EXITFLOW_MODEL_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "exitflow/errors.hpp"

namespace exitflow {

using ScalarFn = std::function<double(double)>;

// One-dimensional diffusion dX = mu(X) dt + sqrt(eps a(X)) dB on (0, r),
// with 0 an unstable equilibrium of the drift and a singular point of the
// diffusion: mu(0)=0, mu'(0)=gamma>0, a(0)=0, a'(0)>0.
//
// Immutable after construction; all evaluation functions are pure, so model
// objects can be shared freely across workers.
struct DiffusionModel {
  std::string name;
  ScalarFn drift;         // mu(x)
  ScalarFn diffusion_sq;  // a(x) = sigma^2(x)
  double right_end = std::numeric_limits<double>::infinity();
  bool unbounded = true;       // r == +inf
  double sim_ceiling = 10.0;   // R_sim: diagnostic ceiling, never a wall
  double gamma = 0.0;          // mu'(0)
  double a_prime0 = 0.0;       // a'(0)
  std::optional<double> x_c;   // nearest stable critical point of mu
  bool drift_lipschitz = false;  // probe verdict, |mu(y)-mu(x)| <= gamma|y-x|

  double mu(double x) const { return drift(x); }
  double a(double x) const { return diffusion_sq(x); }
  double xc_or(double fallback) const { return x_c ? *x_c : fallback; }

  // stable content hash for CSV/JSON metadata
  std::uint64_t hash() const;
  std::string hash_hex() const;
};

struct ModelParams {
  double epsilon;
  double x0;  // defaults to epsilon when constructed via make_params
};

inline ModelParams make_params(double epsilon) { return {epsilon, epsilon}; }

struct AssumptionCheck {
  std::string name;
  bool pass;
  double measured;
  std::string detail;
};

struct ValidationReport {
  std::vector<AssumptionCheck> checks;
  bool usable = false;
  std::string summary() const;
};

// Checks mu(0)=0, a(0)=0, gamma>0, a'(0)>0 and the finite-difference
// consistency of the stored local parameters. Throws NonEvaluable if the
// coefficient functions fail on the probe grid.
ValidationReport validate_assumptions(const DiffusionModel& model);

// Named catalog: kimura_fisher_wright, logistic_feller, gilpin_ayala_pow,
// holling, custom. Parameter keys: gamma, x_c, theta, beta, n, sigma2, r_sim.
// "custom" additionally takes drift_form / diffusion_form names.
DiffusionModel builtin_model(const std::string& name,
                             const std::map<std::string, double>& params = {},
                             const std::map<std::string, std::string>&
                                 forms = {});

// Model specification file support (JSON): {"name": ..., "params": {...},
// "forms": {...}, "overrides": {"gamma":..,"a_prime0":..,"x_c":..}}
DiffusionModel model_from_json_text(const std::string& text);

}  // namespace exitflow

#endif
