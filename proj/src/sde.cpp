#include "exitflow/sde.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>
#include <vector>

#include "exitflow/errors.hpp"
#include "exitflow/rng.hpp"

namespace exitflow {

namespace {

void check_step(const DiffusionModel& model, double dt) {
  if (!(dt > 0.0)) throw Error("simulate: need dt > 0");
  if (model.gamma > 0.0 && dt > 0.1 / model.gamma)
    throw StepTooLarge("simulate: dt exceeds stability guard 0.1/gamma");
}

Eigen::VectorXd uniform_checkpoints(double horizon, int n) {
  Eigen::VectorXd t(n);
  for (int i = 0; i < n; ++i) t[i] = horizon * double(i + 1) / double(n);
  return t;
}

struct StepKernel {
  const DiffusionModel* model;
  double epsilon;
  double overflow_cap;
};

// advance one path from t to t_end with fixed micro-steps of size dt (last
// one shortened to land exactly); returns new state, 0 when absorbed
inline double march(const StepKernel& k, Rng& rng, double x, double t,
                    double t_end, double dt, bool& absorbed,
                    double& absorb_time) {
  while (t < t_end - 1e-14 * std::max(1.0, t_end)) {
    const double h = std::min(dt, t_end - t);
    const double xp = x > 0.0 ? x : 0.0;  // full truncation
    const double z = rng.normal();
    const double diff2 = k.epsilon * k.model->a(xp);
    x = x + k.model->mu(xp) * h +
        std::sqrt(diff2 > 0.0 ? diff2 * h : 0.0) * z;
    t += h;
    if (x <= 0.0) {
      absorbed = true;
      absorb_time = t;
      return 0.0;
    }
    if (x > k.overflow_cap)
      throw OverflowGuard("simulate: state exceeded 1e6 * max(1, x_c)");
  }
  return x;
}

template <class PathFn>
void run_parallel(Eigen::Index n_paths, int threads, PathFn&& body) {
  threads = std::max(1, threads);
  if (threads == 1) {
    for (Eigen::Index p = 0; p < n_paths; ++p) body(p);
    return;
  }
  std::atomic<Eigen::Index> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (Eigen::Index p = next.fetch_add(1); p < n_paths;
             p = next.fetch_add(1))
          body(p);
      } catch (...) {
        errs[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

}  // namespace

double PathEnsemble::mean_at(Eigen::Index time_index) const {
  // Kahan summation in fixed path order
  double sum = 0.0, comp = 0.0;
  for (Eigen::Index p = 0; p < states.rows(); ++p) {
    const double y = states(p, time_index) - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum / double(states.rows());
}

double critical_time(const DiffusionModel& model, double epsilon) {
  if (!(epsilon > 0.0) || epsilon >= 1.0)
    throw BadEpsilon("critical_time: need 0 < eps < 1");
  return std::log(1.0 / epsilon) / model.gamma;
}

StagePartition stage_partition(const DiffusionModel& model, double epsilon,
                               double c) {
  if (!(c > 0.5 && c < 1.0))
    throw Error("stage_partition: need c in (1/2, 1)");
  const double T = critical_time(model, epsilon);
  return {c, c * T, T};
}

PathEnsemble simulate_paths(const DiffusionModel& model,
                            const ModelParams& params, double dt,
                            const Eigen::VectorXd& checkpoints,
                            Eigen::Index n_paths, std::uint64_t seed,
                            int threads) {
  check_step(model, dt);
  if (n_paths < 1) throw Error("simulate_paths: need n_paths >= 1");
  if (!(params.epsilon >= 0.0)) throw BadEpsilon("simulate_paths: eps < 0");

  PathEnsemble e;
  e.model_name = model.name;
  e.model_hash = model.hash();
  e.epsilon = params.epsilon;
  e.dt = dt;
  e.seed = seed;
  e.times = checkpoints;
  e.states.resize(n_paths, checkpoints.size());
  e.absorbed_at_zero.resize(n_paths);
  e.absorption_time =
      Eigen::VectorXd::Constant(n_paths, std::numeric_limits<double>::infinity());
  e.absorbed_at_zero.setConstant(false);

  const double cap =
      model.x_c ? 1e6 * std::max(1.0, *model.x_c)
                : (std::isfinite(model.sim_ceiling)
                       ? 1e6 * std::max(1.0, model.sim_ceiling)
                       : std::numeric_limits<double>::infinity());
  const StepKernel kernel{&model, params.epsilon, cap};
  std::atomic<std::uint64_t> draws{0};

  run_parallel(n_paths, threads, [&](Eigen::Index p) {
    Rng rng(seed, static_cast<std::uint64_t>(p));
    double x = params.x0, t = 0.0;
    bool absorbed = false;
    double at = 0.0;
    for (Eigen::Index i = 0; i < checkpoints.size(); ++i) {
      if (!absorbed) x = march(kernel, rng, x, t, checkpoints[i], dt, absorbed, at);
      t = checkpoints[i];
      e.states(p, i) = absorbed ? 0.0 : x;
    }
    if (absorbed) {
      e.absorbed_at_zero[p] = true;
      e.absorption_time[p] = at;
    }
    draws.fetch_add(rng.normal_draws(), std::memory_order_relaxed);
  });
  e.normal_draws = draws.load();
  return e;
}

PathEnsemble simulate_paths(const DiffusionModel& model,
                            const ModelParams& params, double dt,
                            double horizon, Eigen::Index n_paths,
                            std::uint64_t seed, int threads,
                            int n_checkpoints) {
  return simulate_paths(model, params, dt,
                        uniform_checkpoints(horizon, n_checkpoints), n_paths,
                        seed, threads);
}

PathEnsemble simulate_feller(double gamma, double a_prime0, double y0,
                             double dt, double horizon, Eigen::Index n_paths,
                             std::uint64_t seed, int threads,
                             int n_checkpoints) {
  DiffusionModel lin;
  lin.name = "feller_branching";
  lin.drift = [gamma](double y) { return gamma * y; };
  lin.diffusion_sq = [a_prime0](double y) { return a_prime0 * y; };
  lin.gamma = gamma;
  lin.a_prime0 = a_prime0;
  lin.sim_ceiling = std::numeric_limits<double>::infinity();
  ModelParams p{1.0, y0};  // noise scale folded into a'(0)
  PathEnsemble e = simulate_paths(lin, p, dt,
                                  uniform_checkpoints(horizon, n_checkpoints),
                                  n_paths, seed, threads);
  // overflow cap for the linear model is handled via infinite ceiling above
  return e;
}

CoupledEnsembles simulate_coupled_blowup(const DiffusionModel& model,
                                         double epsilon, double dt,
                                         const Eigen::VectorXd& checkpoints,
                                         Eigen::Index n_paths,
                                         std::uint64_t seed, int threads) {
  check_step(model, dt);
  if (!(epsilon > 0.0)) throw BadEpsilon("simulate_coupled_blowup: eps <= 0");

  CoupledEnsembles out;
  auto init = [&](PathEnsemble& e, const std::string& nm) {
    e.model_name = nm;
    e.model_hash = model.hash();
    e.epsilon = epsilon;
    e.dt = dt;
    e.seed = seed;
    e.times = checkpoints;
    e.states.resize(n_paths, checkpoints.size());
    e.absorbed_at_zero.resize(n_paths);
    e.absorbed_at_zero.setConstant(false);
    e.absorption_time = Eigen::VectorXd::Constant(
        n_paths, std::numeric_limits<double>::infinity());
  };
  init(out.blown_up, model.name + "_blown_up");
  init(out.feller, "feller_branching");

  const double gamma = model.gamma;
  const double ap0 = model.a_prime0;
  const double cap = 1e6 * std::max(1.0, model.xc_or(1.0)) / epsilon;
  std::atomic<std::uint64_t> draws{0};

  run_parallel(n_paths, threads, [&](Eigen::Index p) {
    Rng rng(seed, static_cast<std::uint64_t>(p));
    // blown-up SDE: dXt~ = eps^{-1} mu(eps Xt~) dt + sqrt(a(eps Xt~)/eps) dB
    double xb = 1.0, yf = 1.0, t = 0.0;
    bool ab = false, af = false;
    double tb = 0.0, tf = 0.0;
    for (Eigen::Index i = 0; i < checkpoints.size(); ++i) {
      const double t_end = checkpoints[i];
      while (t < t_end - 1e-14 * std::max(1.0, t_end)) {
        const double h = std::min(dt, t_end - t);
        const double z = rng.normal();  // one increment, shared by both
        const double sq = std::sqrt(h);
        if (!ab) {
          const double xp = xb > 0.0 ? xb : 0.0;
          const double d2 = model.a(epsilon * xp) / epsilon;
          xb = xb + model.mu(epsilon * xp) / epsilon * h +
               std::sqrt(d2 > 0.0 ? d2 : 0.0) * sq * z;
          if (xb <= 0.0) {
            ab = true;
            tb = t + h;
            xb = 0.0;
          } else if (xb > cap) {
            throw OverflowGuard("simulate_coupled_blowup: blown-up overflow");
          }
        }
        if (!af) {
          const double yp = yf > 0.0 ? yf : 0.0;
          yf = yf + gamma * yp * h + std::sqrt(ap0 * yp) * sq * z;
          if (yf <= 0.0) {
            af = true;
            tf = t + h;
            yf = 0.0;
          }
        }
        t += h;
      }
      out.blown_up.states(p, i) = xb;
      out.feller.states(p, i) = yf;
    }
    if (ab) {
      out.blown_up.absorbed_at_zero[p] = true;
      out.blown_up.absorption_time[p] = tb;
    }
    if (af) {
      out.feller.absorbed_at_zero[p] = true;
      out.feller.absorption_time[p] = tf;
    }
    draws.fetch_add(rng.normal_draws(), std::memory_order_relaxed);
  });
  out.blown_up.normal_draws = draws.load();
  out.feller.normal_draws = out.blown_up.normal_draws;  // shared stream
  return out;
}

void write_ensemble_csv(const std::string& path, const PathEnsemble& e) {
  std::ofstream os(path);
  if (!os) throw Error("write_ensemble_csv: cannot open " + path);
  os.precision(17);
  os << "# meta: model_hash=" << std::hex << e.model_hash << std::dec
     << " epsilon=" << e.epsilon << " dt=" << e.dt << " seed=" << e.seed
     << " scheme=" << e.scheme << "\n";
  os << "path,absorbed,absorption_time";
  for (Eigen::Index i = 0; i < e.times.size(); ++i) os << ",t" << e.times[i];
  os << "\n";
  for (Eigen::Index p = 0; p < e.states.rows(); ++p) {
    os << p << "," << (e.absorbed_at_zero[p] ? 1 : 0) << ","
       << e.absorption_time[p];
    for (Eigen::Index i = 0; i < e.times.size(); ++i)
      os << "," << e.states(p, i);
    os << "\n";
  }
}

}  // namespace exitflow
