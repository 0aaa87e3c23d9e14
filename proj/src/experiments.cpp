#include "exitflow/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "exitflow/errors.hpp"
#include "exitflow/flow.hpp"
#include "exitflow/interp.hpp"
#include "exitflow/limit_law.hpp"
#include "exitflow/model.hpp"
#include "exitflow/rng.hpp"
#include "exitflow/sde.hpp"
#include "exitflow/stats.hpp"

namespace exitflow {

namespace {

using nlohmann::json;

// Frozen W1 acceptance levels for the final (smallest-eps) distance between
// the simulated terminal law and the exact limit-position law. Calibrated
// once from an oracle run at triple sample size (n = 30000 paths, seed 1,
// dt = 1e-3, eps = 0.01) and never recomputed at verification time. The
// level is twice the oracle point estimate, leaving room for the upward
// finite-sample bias of the empirical W1 at the default n = 10000.
// Oracle values: logistic_feller 0.011218 +- 0.000649,
// kimura_fisher_wright 0.006106 +- 0.000529.
const std::map<std::string, double> kCalibratedFinalW1 = {
    {"logistic_feller", 0.0224},
    {"kimura_fisher_wright", 0.0122},
};

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t st = seed ^ (tag * 0xd1b54a32d192ed03ULL);
  return splitmix64(st);
}

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

DiffusionModel model_of(const ExperimentConfig& cfg) {
  return builtin_model(cfg.model, cfg.model_params);
}

double binom_stderr(double p, double n) {
  return std::sqrt(std::max(p * (1.0 - p), 1e-12) / n);
}

// pass iff each step down the grid decreases (allowing 2 stderr of combined
// noise); value reported is the worst slack-adjusted increase
Verdict monotone_verdict(const std::string& name,
                         const std::vector<double>& v,
                         const std::vector<double>& se) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < v.size(); ++k) {
    const double slack = 2.0 * std::hypot(se[k], se[k + 1]);
    worst = std::max(worst, v[k + 1] - v[k] - slack);
  }
  Verdict out;
  out.name = name;
  out.value = worst;
  out.threshold = 0.0;
  out.pass = worst <= 0.0;
  out.provenance = "monotone-trend";
  return out;
}

std::string eps_key(const char* base, double eps) {
  std::ostringstream os;
  os << base << "_eps_" << eps;
  return os.str();
}

// W1 batch stderr: fixed consecutive batches of the path-ordered sample
// against the full reference, so the estimate is worker-count independent
double w1_batch_stderr(const Eigen::VectorXd& sample,
                       const EmpiricalLaw& reference, int n_batches = 10) {
  const Eigen::Index n = sample.size();
  const Eigen::Index bs = n / n_batches;
  if (bs < 2) return 0.0;
  std::vector<double> vals;
  for (int b = 0; b < n_batches; ++b) {
    EmpiricalLaw law(sample.segment(b * bs, bs));
    vals.push_back(wasserstein1(law, reference));
  }
  double m = 0.0;
  for (double v : vals) m += v;
  m /= vals.size();
  double s2 = 0.0;
  for (double v : vals) s2 += (v - m) * (v - m);
  s2 /= (vals.size() - 1);
  return std::sqrt(s2 / vals.size());
}

Eigen::VectorXd positive_part(const Eigen::VectorXd& v) {
  std::vector<double> kept;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v[i] > 0.0) kept.push_back(v[i]);
  if (kept.empty()) return Eigen::VectorXd();
  return Eigen::Map<Eigen::VectorXd>(kept.data(), kept.size());
}

json config_json(const ExperimentConfig& cfg) {
  json j;
  j["model"] = cfg.model;
  j["model_params"] = cfg.model_params;
  j["epsilons"] = cfg.epsilons;
  j["n_paths"] = cfg.n_paths;
  j["dt"] = cfg.dt;
  j["c"] = cfg.c;
  j["T"] = cfg.T;
  j["t_probe"] = cfg.t_probe;
  j["x0_frac"] = cfg.x0_frac;
  j["seed"] = cfg.seed;
  return j;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j = json::parse(text);
  ExperimentConfig cfg;
  if (j.contains("model")) cfg.model = j["model"].get<std::string>();
  if (j.contains("model_params"))
    cfg.model_params = j["model_params"].get<std::map<std::string, double>>();
  if (j.contains("epsilons"))
    cfg.epsilons = j["epsilons"].get<std::vector<double>>();
  if (j.contains("n_paths")) cfg.n_paths = j["n_paths"].get<long>();
  if (j.contains("dt")) cfg.dt = j["dt"].get<double>();
  if (j.contains("c")) cfg.c = j["c"].get<double>();
  if (j.contains("T")) cfg.T = j["T"].get<double>();
  if (j.contains("t_probe")) cfg.t_probe = j["t_probe"].get<double>();
  if (j.contains("x0_frac")) cfg.x0_frac = j["x0_frac"].get<double>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
  return cfg;
}

std::string ExperimentConfig::to_json() const {
  return config_json(*this).dump(2);
}

bool ExperimentReport::all_pass() const {
  for (const auto& v : verdicts)
    if (!v.pass) return false;
  return true;
}

std::string ExperimentReport::to_json() const {
  json j;
  j["experiment"] = experiment;
  j["config"] = config_json(config);
  json m = json::object();
  for (const auto& [k, v] : metrics) m[k] = v;
  j["metrics"] = m;
  json vs = json::array();
  for (const auto& v : verdicts)
    vs.push_back(json{{"name", v.name},
                      {"pass", v.pass},
                      {"value", v.value},
                      {"threshold", v.threshold},
                      {"provenance", v.provenance}});
  j["verdicts"] = vs;
  j["all_pass"] = all_pass();
  return j.dump(2);
}

void write_report(const std::string& path, const ExperimentReport& report) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("write_report: cannot open " + path);
  os << report.to_json() << "\n";
}

ExperimentReport exp_fluid_limit(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.experiment = "fluid-limit";
  rep.config = cfg;
  const DiffusionModel model = model_of(cfg);
  const double x_c = model.xc_or(1.0);
  const double x0 = cfg.x0_frac * x_c;
  const double delta = 0.05 * x_c;
  const int threads = resolve_threads(cfg.threads);

  const int n_checks = 64;
  Eigen::VectorXd times(n_checks);
  for (int i = 0; i < n_checks; ++i) times[i] = cfg.T * (i + 1) / n_checks;
  const FlowSolution fluid = flow_path(model, x0, times);

  std::vector<double> freq, se;
  for (std::size_t k = 0; k < cfg.epsilons.size(); ++k) {
    const double eps = cfg.epsilons[k];
    const PathEnsemble ens =
        simulate_paths(model, {eps, x0}, cfg.dt, times, cfg.n_paths,
                       derive_seed(cfg.seed, 100 + k), threads);
    long exceed = 0;
    for (Eigen::Index p = 0; p < ens.n_paths(); ++p) {
      for (int i = 0; i < n_checks; ++i) {
        if (std::abs(ens.states(p, i) - fluid.states[i]) > delta) {
          ++exceed;
          break;
        }
      }
    }
    const double f = double(exceed) / double(ens.n_paths());
    freq.push_back(f);
    se.push_back(binom_stderr(f, double(ens.n_paths())));
    rep.metrics.emplace_back(eps_key("exceedance", eps), f);
    rep.metrics.emplace_back(eps_key("stderr", eps), se.back());
  }
  rep.verdicts.push_back(
      monotone_verdict("exceedance_monotone_decreasing", freq, se));
  return rep;
}

ExperimentReport exp_main_theorem(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.experiment = "main-theorem";
  rep.config = cfg;
  const DiffusionModel model = model_of(cfg);
  const int threads = resolve_threads(cfg.threads);
  const WLaw law(model.gamma, model.a_prime0);

  // exact reference law phi~(W), n = 1e6; widen the flow grid until it
  // covers the sample
  const Eigen::Index n_ref = 1000000;
  double y_max = 32.0;
  Eigen::VectorXd ref;
  for (;;) {
    const RescaledFlow rf =
        compute_rescaled_flow(model, y_max, 257);
    try {
      ref = sample_limit_position(law, rf, n_ref, derive_seed(cfg.seed, 7));
      break;
    } catch (const GridTooShort&) {
      y_max *= 2.0;
      if (y_max > 1e6) throw;
    }
  }
  const EmpiricalLaw ref_law(ref);
  const Eigen::VectorXd ref_pos = positive_part(ref);
  const EmpiricalLaw ref_law_pos(ref_pos);

  std::vector<double> w1s, w1_se, kss, ks_se;
  for (std::size_t k = 0; k < cfg.epsilons.size(); ++k) {
    const double eps = cfg.epsilons[k];
    const double T_eps = critical_time(model, eps);
    Eigen::VectorXd checkpoints(1);
    checkpoints[0] = T_eps;
    const PathEnsemble ens =
        simulate_paths(model, make_params(eps), cfg.dt, checkpoints,
                       cfg.n_paths, derive_seed(cfg.seed, 200 + k), threads);
    const Eigen::VectorXd x_T = ens.states.col(0);
    const EmpiricalLaw sde_law(x_T);

    const double ks = ks_distance(sde_law, ref_law);
    const double w1 = wasserstein1(sde_law, ref_law);
    const double se = w1_batch_stderr(x_T, ref_law);
    w1s.push_back(w1);
    w1_se.push_back(se);
    kss.push_back(ks);
    ks_se.push_back(binom_stderr(ks, double(cfg.n_paths)));
    rep.metrics.emplace_back(eps_key("ks", eps), ks);
    rep.metrics.emplace_back(eps_key("w1", eps), w1);
    rep.metrics.emplace_back(eps_key("w1_stderr", eps), se);

    const Eigen::VectorXd pos = positive_part(x_T);
    if (pos.size() > 1 && ref_pos.size() > 1) {
      const EmpiricalLaw cond(pos);
      rep.metrics.emplace_back(eps_key("ks_conditioned", eps),
                               ks_distance(cond, ref_law_pos));
      rep.metrics.emplace_back(eps_key("w1_conditioned", eps),
                               wasserstein1(cond, ref_law_pos));
    }
    rep.metrics.emplace_back(eps_key("atom", eps), sde_law.atom_at_zero());
  }
  rep.metrics.emplace_back("atom_exact", law.atom());

  rep.verdicts.push_back(monotone_verdict("w1_monotone_decreasing", w1s, w1_se));
  rep.verdicts.push_back(monotone_verdict("ks_monotone_decreasing", kss, ks_se));

  const auto cal = kCalibratedFinalW1.find(model.name);
  if (cal != kCalibratedFinalW1.end()) {
    Verdict v;
    v.name = "final_w1_below_calibrated";
    v.value = w1s.back();
    v.threshold = cal->second;
    v.pass = v.value < v.threshold;
    v.provenance = "calibrated";
    rep.verdicts.push_back(v);
  }
  return rep;
}

ExperimentReport exp_gronwall_scaling(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.experiment = "gronwall";
  rep.config = cfg;
  const DiffusionModel model = model_of(cfg);
  const int threads = resolve_threads(cfg.threads);

  std::vector<double> gaps, gap_se, ratios;
  for (std::size_t k = 0; k < cfg.epsilons.size(); ++k) {
    const double eps = cfg.epsilons[k];
    const StagePartition sp = stage_partition(model, eps, cfg.c);
    Eigen::VectorXd checkpoints(2);
    checkpoints[0] = sp.t_critical;
    checkpoints[1] = sp.t_one;
    const PathEnsemble ens =
        simulate_paths(model, make_params(eps), cfg.dt, checkpoints,
                       cfg.n_paths, derive_seed(cfg.seed, 300 + k), threads);
    const double span = sp.t_one - sp.t_critical;

    // restart map x -> phi_span(x), tabulated once and monotone-interpolated
    const Eigen::VectorXd x_tc = ens.states.col(0);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (Eigen::Index p = 0; p < x_tc.size(); ++p) {
      if (x_tc[p] <= 0.0) continue;
      lo = std::min(lo, x_tc[p]);
      hi = std::max(hi, x_tc[p]);
    }
    PchipInterpolant restart;
    bool have_map = std::isfinite(lo) && hi > lo;
    if (have_map) {
      const int m = 256;
      Eigen::VectorXd xs(m), ys(m);
      for (int i = 0; i < m; ++i) {
        xs[i] = lo * std::pow(hi / lo, double(i) / (m - 1));
        ys[i] = flow(model, xs[i], span);
      }
      restart = PchipInterpolant(xs, ys);
    }

    double sum = 0.0, comp = 0.0, sumsq = 0.0;
    for (Eigen::Index p = 0; p < ens.n_paths(); ++p) {
      double phi = 0.0;
      if (x_tc[p] > 0.0 && have_map) phi = restart(x_tc[p]);
      else if (x_tc[p] > 0.0) phi = flow(model, x_tc[p], span);
      const double g = ens.states(p, 1) - phi;
      const double g2 = g * g;
      const double y = g2 - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
      sumsq += g2 * g2;
    }
    const double n = double(ens.n_paths());
    const double msq = sum / n;
    const double var = std::max(sumsq / n - msq * msq, 0.0);
    const double se = std::sqrt(var / n);
    const double scale = std::pow(eps, 2.0 * cfg.c - 1.0) * std::log(1.0 / eps);
    gaps.push_back(msq);
    gap_se.push_back(se);
    ratios.push_back(msq / scale);
    rep.metrics.emplace_back(eps_key("mean_square_gap", eps), msq);
    rep.metrics.emplace_back(eps_key("gap_stderr", eps), se);
    rep.metrics.emplace_back(eps_key("gap_over_scaling", eps), msq / scale);
  }

  const double rmax = *std::max_element(ratios.begin(), ratios.end());
  const double rmin = *std::min_element(ratios.begin(), ratios.end());
  Verdict bounded;
  bounded.name = "scaling_ratio_bounded";
  bounded.value = rmin > 0.0 ? rmax / rmin : std::numeric_limits<double>::infinity();
  bounded.threshold = 10.0;
  bounded.pass = bounded.value < bounded.threshold;
  bounded.provenance = "analytic";
  rep.verdicts.push_back(bounded);
  rep.verdicts.push_back(monotone_verdict("gap_monotone_decreasing", gaps, gap_se));
  return rep;
}

ExperimentReport exp_linearization(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.experiment = "linearization";
  rep.config = cfg;
  const DiffusionModel model = model_of(cfg);
  const int threads = resolve_threads(cfg.threads);

  Eigen::VectorXd checkpoints(1);
  checkpoints[0] = cfg.t_probe;
  std::vector<double> gaps, se;
  for (std::size_t k = 0; k < cfg.epsilons.size(); ++k) {
    const double eps = cfg.epsilons[k];
    const CoupledEnsembles ce = simulate_coupled_blowup(
        model, eps, cfg.dt, checkpoints, cfg.n_paths,
        derive_seed(cfg.seed, 400 + k), threads);
    double sum = 0.0, comp = 0.0, sumsq = 0.0;
    for (Eigen::Index p = 0; p < ce.blown_up.n_paths(); ++p) {
      const double d = std::abs(ce.blown_up.states(p, 0) - ce.feller.states(p, 0));
      const double y = d - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
      sumsq += d * d;
    }
    const double n = double(ce.blown_up.n_paths());
    const double mean = sum / n;
    const double var = std::max(sumsq / n - mean * mean, 0.0);
    gaps.push_back(mean);
    se.push_back(std::sqrt(var / n));
    rep.metrics.emplace_back(eps_key("mean_abs_gap", eps), mean);
    rep.metrics.emplace_back(eps_key("gap_stderr", eps), se.back());
  }
  rep.verdicts.push_back(
      monotone_verdict("coupling_gap_monotone_decreasing", gaps, se));
  return rep;
}

ExperimentReport exp_three_stages(const ExperimentConfig& cfg,
                                  const std::string& traces_csv_path) {
  ExperimentReport rep;
  rep.experiment = "three-stages";
  rep.config = cfg;
  const DiffusionModel model = model_of(cfg);
  const int threads = resolve_threads(cfg.threads);
  const double eps = cfg.epsilons.front();
  const StagePartition sp = stage_partition(model, eps, cfg.c);
  const double horizon = 2.0 * sp.t_one;

  const int n_checks = 201;
  Eigen::VectorXd times(n_checks);
  for (int i = 0; i < n_checks; ++i) times[i] = horizon * i / (n_checks - 1);
  const PathEnsemble ens =
      simulate_paths(model, make_params(eps), cfg.dt, times, cfg.n_paths,
                     derive_seed(cfg.seed, 500), threads);

  const int shown = int(std::min<Eigen::Index>(6, ens.n_paths()));
  std::ofstream os(traces_csv_path, std::ios::binary);
  if (!os) throw Error("exp_three_stages: cannot open " + traces_csv_path);
  os.precision(17);
  os << "# meta: model_hash=" << std::hex << ens.model_hash << std::dec
     << " seed=" << ens.seed << " epsilon=" << eps << " t_c=" << sp.t_critical
     << " t_1=" << sp.t_one << "\n";
  os << "t,mean,q05,q25,q50,q75,q95";
  for (int p = 0; p < shown; ++p) os << ",path" << p;
  os << "\n";
  for (int i = 0; i < n_checks; ++i) {
    EmpiricalLaw slice(ens.states.col(i));
    os << times[i] << "," << ens.mean_at(i) << "," << slice.quantile(0.05)
       << "," << slice.quantile(0.25) << "," << slice.quantile(0.5) << ","
       << slice.quantile(0.75) << "," << slice.quantile(0.95);
    for (int p = 0; p < shown; ++p) os << "," << ens.states(p, i);
    os << "\n";
  }

  rep.metrics.emplace_back("t_critical", sp.t_critical);
  rep.metrics.emplace_back("t_one", sp.t_one);
  rep.metrics.emplace_back("final_mean", ens.mean_at(n_checks - 1));
  rep.metrics.emplace_back("final_atom",
                           EmpiricalLaw(ens.states.col(n_checks - 1)).atom_at_zero());
  return rep;  // informational: no pass/fail verdicts
}

ExperimentReport run_experiment(const std::string& name,
                                const ExperimentConfig& cfg,
                                const std::string& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport rep;
  if (name == "fluid-limit") rep = exp_fluid_limit(cfg);
  else if (name == "main-theorem") rep = exp_main_theorem(cfg);
  else if (name == "gronwall") rep = exp_gronwall_scaling(cfg);
  else if (name == "linearization") rep = exp_linearization(cfg);
  else if (name == "three-stages")
    rep = exp_three_stages(cfg, out_dir + "/traces.csv");
  else
    throw Error("unknown experiment: " + name);
  rep.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  write_report(out_dir + "/report.json", rep);
  return rep;
}

}  // namespace exitflow
