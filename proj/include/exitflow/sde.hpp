#ifndef EXITFLOW_SDE_HPP
#define EXITFLOW_SDE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "exitflow/model.hpp"

namespace exitflow {

// Batch of trajectories recorded at checkpoint times. Bit-exact reproducible
// from (seed, n_paths, dt, checkpoints); independent of worker count because
// every path owns its own counter-derived RNG stream.
struct PathEnsemble {
  std::string model_name;
  std::uint64_t model_hash = 0;
  double epsilon = 0.0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::string scheme = "full_truncation_euler";

  Eigen::VectorXd times;                       // checkpoints, increasing
  Eigen::MatrixXd states;                      // n_paths x n_times
  Eigen::Array<bool, Eigen::Dynamic, 1> absorbed_at_zero;
  Eigen::VectorXd absorption_time;             // +inf when not absorbed
  std::uint64_t normal_draws = 0;              // total across paths

  Eigen::Index n_paths() const { return states.rows(); }

  // compensated column mean, order-insensitive by fixed path ordering
  double mean_at(Eigen::Index time_index) const;
};

struct StagePartition {
  double c;           // in (1/2, 1)
  double t_critical;  // t_c = c * T_eps
  double t_one;       // t_1 = T_eps
};

// T_eps = (1/gamma) log(1/eps)
double critical_time(const DiffusionModel& model, double epsilon);

StagePartition stage_partition(const DiffusionModel& model, double epsilon,
                               double c);

// Full-truncation Euler-Maruyama for dX = mu(X) dt + sqrt(eps a(X)) dB.
// States at checkpoints are obtained by stepping exactly onto them. A path
// whose proposal goes nonpositive is absorbed at 0 permanently.
PathEnsemble simulate_paths(const DiffusionModel& model,
                            const ModelParams& params, double dt,
                            const Eigen::VectorXd& checkpoints,
                            Eigen::Index n_paths, std::uint64_t seed,
                            int threads = 1);

// convenience: uniform checkpoints on [0, horizon]
PathEnsemble simulate_paths(const DiffusionModel& model,
                            const ModelParams& params, double dt,
                            double horizon, Eigen::Index n_paths,
                            std::uint64_t seed, int threads = 1,
                            int n_checkpoints = 32);

// Feller branching diffusion dY = gamma Y dt + sqrt(a'(0) Y) dB, Y_0 = y0.
PathEnsemble simulate_feller(double gamma, double a_prime0, double y0,
                             double dt, double horizon, Eigen::Index n_paths,
                             std::uint64_t seed, int threads = 1,
                             int n_checkpoints = 32);

// Blown-up process eps^{-1} X^eps and the Feller diffusion driven by the
// identical Brownian increments, path by path.
struct CoupledEnsembles {
  PathEnsemble blown_up;  // eps^{-1} X^eps
  PathEnsemble feller;    // Y
};

CoupledEnsembles simulate_coupled_blowup(const DiffusionModel& model,
                                         double epsilon, double dt,
                                         const Eigen::VectorXd& checkpoints,
                                         Eigen::Index n_paths,
                                         std::uint64_t seed, int threads = 1);

void write_ensemble_csv(const std::string& path, const PathEnsemble& e);

}  // namespace exitflow

#endif
