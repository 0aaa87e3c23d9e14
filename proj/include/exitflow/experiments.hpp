#ifndef EXITFLOW_EXPERIMENTS_HPP
#define EXITFLOW_EXPERIMENTS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace exitflow {

struct ExperimentConfig {
  std::string model = "logistic_feller";
  std::map<std::string, double> model_params;
  std::vector<double> epsilons = {0.1, 0.05, 0.02, 0.01};
  long n_paths = 10000;
  double dt = 1e-3;
  double c = 0.75;        // stage-partition exponent
  double T = 2.0;         // fluid-limit horizon
  double t_probe = 1.0;   // linearization probe time
  double x0_frac = 0.5;   // fluid-limit start, as a fraction of x_c
  std::uint64_t seed = 1;
  int threads = 0;        // 0 = hardware concurrency; not echoed in reports

  static ExperimentConfig from_json_text(const std::string& text);
  std::string to_json() const;  // canonical echo (threads excluded)
};

struct Verdict {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string provenance;  // "analytic" | "calibrated" | "monotone-trend"
};

struct ExperimentReport {
  std::string experiment;
  ExperimentConfig config;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<Verdict> verdicts;
  double runtime_seconds = 0.0;  // console-only; never serialized

  bool all_pass() const;
  // Canonical JSON: a pure function of (config, seed, metrics); byte-identical
  // across re-runs and worker counts.
  std::string to_json() const;
};

void write_report(const std::string& path, const ExperimentReport& report);

// P[sup_{t<=T} |X^eps - x_t| > 0.05 x_c] decreases along the eps grid
ExperimentReport exp_fluid_limit(const ExperimentConfig& cfg);

// law of X^eps at T^eps vs the exact limit-position law; KS/W1 decrease,
// final W1 under the frozen calibrated threshold
ExperimentReport exp_main_theorem(const ExperimentConfig& cfg);

// E(X_{t1} - restarted flow)^2 scales like eps^{2c-1} log(1/eps)
ExperimentReport exp_gronwall_scaling(const ExperimentConfig& cfg);

// coupled blow-up: mean |eps^{-1} X^eps_t - Y_t| at t_probe decreases
ExperimentReport exp_linearization(const ExperimentConfig& cfg);

// dense trace export over [0, 2 T^eps] with stage markers and quantile bands;
// informational (no pass/fail verdicts)
ExperimentReport exp_three_stages(const ExperimentConfig& cfg,
                                  const std::string& traces_csv_path);

ExperimentReport run_experiment(const std::string& name,
                                const ExperimentConfig& cfg,
                                const std::string& out_dir);

}  // namespace exitflow

#endif
