#ifndef EXITFLOW_SCALE_HPP
#define EXITFLOW_SCALE_HPP

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "exitflow/model.hpp"
#include "exitflow/quadrature.hpp"

namespace exitflow {

enum class FellerClass { Regular, Exit, Entrance, Natural, Inconclusive };

std::string to_string(FellerClass c);

struct BoundaryVerdict {
  bool attracting = false;          // scale function finite at the end
  bool scale_conclusive = true;
  FellerClass feller = FellerClass::Inconclusive;
  double scale_growth_exponent = 0.0;     // fitted exponent of the s' tail
  double exit_growth_exponent = 0.0;      // fitted exponent, Sigma test
  double entrance_growth_exponent = 0.0;  // fitted exponent, N test
  bool conjecture_regime = false;  // theorem hypotheses not verifiable here
};

// Scale/speed machinery with normalization s(x_ref)=0, s'(x_ref)=1.
// x_ref defaults to x_c/2, or the domain midpoint without an x_c.
double default_x_ref(const DiffusionModel& model);

double scale_density(const DiffusionModel& model, double epsilon, double x,
                     double x_ref = -1.0);
double scale_function(const DiffusionModel& model, double epsilon, double x,
                      double x_ref = -1.0);
double speed_density(const DiffusionModel& model, double epsilon, double x,
                     double x_ref = -1.0);

std::pair<BoundaryVerdict, BoundaryVerdict> classify_boundaries(
    const DiffusionModel& model, double epsilon);

// P[T_M < T_0 | X_0 = x0] = (s(x0) - s(0+)) / (s(M) - s(0+)).
// Throws ScaleDiverges when s(0+) = -inf.
double hitting_probability(const DiffusionModel& model, double epsilon,
                           double x0, double M);

struct ExceedanceResult {
  double probability = 0.0;
  bool hypotheses_hold = true;  // left boundary attracting
  std::vector<std::pair<double, double>> trend;  // (M, P[sup X > M])
};

// P[sup_t X^eps > M | X_0 = x0] under the attracting-left-boundary
// hypotheses; also reports the decay trend along a grid of M values.
ExceedanceResult max_exceedance_probability(const DiffusionModel& model,
                                            double epsilon, double x0,
                                            double M,
                                            const std::vector<double>& trend_Ms = {});

struct ScaleProfile {
  std::string model_name;
  std::uint64_t model_hash = 0;
  double epsilon = 0.0;
  double x_ref = 0.0;
  Eigen::VectorXd x, s_prime, s, m_prime;
  BoundaryVerdict left, right;
};

ScaleProfile build_scale_profile(const DiffusionModel& model, double epsilon,
                                 int grid_size = 101);

void write_scale_profile_csv(const std::string& path, const ScaleProfile& p);
std::string scale_profile_verdict_json(const ScaleProfile& p);

}  // namespace exitflow

#endif
