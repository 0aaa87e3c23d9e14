#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "exitflow/branching.hpp"
#include "exitflow/errors.hpp"
#include "exitflow/experiments.hpp"
#include "exitflow/flow.hpp"
#include "exitflow/limit_law.hpp"
#include "exitflow/model.hpp"
#include "exitflow/scale.hpp"
#include "exitflow/sde.hpp"
#include "exitflow/stats.hpp"

namespace {

using exitflow::ExperimentConfig;
using nlohmann::json;

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw exitflow::Error("cannot open " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

struct GlobalOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::string format = "csv";
  std::uint64_t seed = 1;
  bool seed_given = false;
  int threads = 0;
};

ExperimentConfig load_config(const GlobalOpts& g) {
  ExperimentConfig cfg;
  if (!g.config_path.empty())
    cfg = ExperimentConfig::from_json_text(slurp(g.config_path));
  if (g.seed_given) cfg.seed = g.seed;
  if (g.threads > 0) cfg.threads = g.threads;
  return cfg;
}

exitflow::DiffusionModel model_from_flags(const std::string& name,
                                          const std::string& model_json) {
  if (!model_json.empty())
    return exitflow::model_from_json_text(slurp(model_json));
  return exitflow::builtin_model(name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"small-noise diffusion exit-law verification toolkit"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "experiment config (JSON)");
  app.add_option("--out-dir", g.out_dir, "output directory");
  app.add_option("--format", g.format, "table format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", g.seed, "master RNG seed")
      ->each([&](const std::string&) { g.seed_given = true; });
  app.add_option("--threads", g.threads, "worker count (0 = auto)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "run the SDE ensemble");
  std::string sim_model = "logistic_feller", sim_model_json;
  double sim_eps = 0.1, sim_dt = 1e-3, sim_horizon = 0.0, sim_x0 = -1.0;
  long sim_paths = 1000;
  sim->add_option("--model", sim_model, "catalog model name");
  sim->add_option("--model-json", sim_model_json, "model spec file (JSON)");
  sim->add_option("--epsilon", sim_eps, "noise scale")->required();
  sim->add_option("--dt", sim_dt, "step size");
  sim->add_option("--horizon", sim_horizon, "0 = critical time");
  sim->add_option("--x0", sim_x0, "start point (default epsilon)");
  sim->add_option("--n-paths", sim_paths, "ensemble size");

  // flow
  auto* flw = app.add_subcommand("flow", "tabulate the rescaled flow");
  std::string flow_model = "logistic_feller", flow_model_json;
  double flow_ymax = 20.0;
  int flow_grid = 201;
  flw->add_option("--model", flow_model, "catalog model name");
  flw->add_option("--model-json", flow_model_json, "model spec file (JSON)");
  flw->add_option("--y-max", flow_ymax, "grid upper end");
  flw->add_option("--grid-size", flow_grid, "grid points");

  // limit-law
  auto* law = app.add_subcommand("limit-law", "sample the martingale limit");
  double law_gamma = 1.0, law_ap0 = 1.0;
  long law_n = 100000;
  law->add_option("--gamma", law_gamma, "drift derivative at 0");
  law->add_option("--a-prime0", law_ap0, "diffusion derivative at 0");
  law->add_option("--n", law_n, "sample size");

  // branching
  auto* br = app.add_subcommand("branching", "solve branching transforms");
  std::string br_mech = "feller";
  double br_param = 1.0;
  int br_grid = 101;
  br->add_option("--mechanism", br_mech, "mechanism name")
      ->check(CLI::IsMember({"binary_splitting", "feller", "geometric_gw",
                             "geometric_ct", "kary_fission"}));
  br->add_option("--param", br_param, "gamma / u / k");
  br->add_option("--grid-size", br_grid, "s-grid points");

  // classify
  auto* cls = app.add_subcommand("classify", "boundary classification");
  std::string cls_model = "logistic_feller", cls_model_json;
  double cls_eps = 0.1;
  cls->add_option("--model", cls_model, "catalog model name");
  cls->add_option("--model-json", cls_model_json, "model spec file (JSON)");
  cls->add_option("--epsilon", cls_eps, "noise scale")->required();

  // verify
  auto* ver = app.add_subcommand("verify", "run a named experiment");
  std::string ver_name;
  ver->add_option("experiment", ver_name, "fluid-limit | main-theorem | "
                                          "gronwall | linearization | "
                                          "three-stages")
      ->required();

  // report
  auto* repc = app.add_subcommand("report", "summarize an existing report");

  // let global flags appear after the subcommand name
  for (auto* sub : app.get_subcommands(nullptr)) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (app.exit(e) == 0) return 0;
    return 1;
  }

  try {
    std::filesystem::create_directories(g.out_dir);

    if (sim->parsed()) {
      auto model = model_from_flags(sim_model, sim_model_json);
      const double horizon = sim_horizon > 0.0
                                 ? sim_horizon
                                 : exitflow::critical_time(model, sim_eps);
      exitflow::ModelParams params{sim_eps, sim_x0 > 0.0 ? sim_x0 : sim_eps};
      auto ens = exitflow::simulate_paths(model, params, sim_dt, horizon,
                                          sim_paths, g.seed,
                                          g.threads > 0 ? g.threads : 1);
      exitflow::write_ensemble_csv(g.out_dir + "/ensemble.csv", ens);
      std::cout << "wrote " << g.out_dir << "/ensemble.csv (" << ens.n_paths()
                << " paths, horizon " << horizon << ")\n";
      return 0;
    }

    if (flw->parsed()) {
      auto model = model_from_flags(flow_model, flow_model_json);
      auto rf = exitflow::compute_rescaled_flow(model, flow_ymax, flow_grid);
      exitflow::write_rescaled_flow_csv(g.out_dir + "/rescaled_flow.csv", rf);
      auto res = exitflow::poincare_residual(model, rf);
      json j{{"poincare_functional_residual", res.functional},
             {"poincare_ode_residual", res.ode_form},
             {"cross_check_residual", rf.cross_check_residual},
             {"horizon_used", rf.horizon_used}};
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (law->parsed()) {
      exitflow::WLaw w(law_gamma, law_ap0);
      auto sample = exitflow::sample_W(w, law_n, g.seed);
      exitflow::EmpiricalLaw emp(sample);
      std::ofstream os(g.out_dir + "/w_sample.csv", std::ios::binary);
      os.precision(17);
      os << "# meta: gamma=" << law_gamma << " a_prime0=" << law_ap0
         << " seed=" << g.seed << "\nw\n";
      for (Eigen::Index i = 0; i < sample.size(); ++i) os << sample[i] << "\n";
      json j{{"lambda", w.lambda},        {"atom_exact", w.atom()},
             {"atom_empirical", emp.atom_at_zero()},
             {"mean_empirical", emp.mean()},
             {"variance_empirical", emp.variance()}};
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (br->parsed()) {
      using exitflow::BranchingMechanism;
      BranchingMechanism mech = BranchingMechanism::feller(br_param);
      if (br_mech == "binary_splitting")
        mech = BranchingMechanism::binary_splitting();
      else if (br_mech == "geometric_gw")
        mech = BranchingMechanism::geometric_gw(br_param);
      else if (br_mech == "geometric_ct")
        mech = BranchingMechanism::geometric_ct(br_param);
      else if (br_mech == "kary_fission")
        mech = BranchingMechanism::kary_fission(int(br_param));

      const double s_hi =
          mech.kind == BranchingMechanism::Kind::CsbMechanism
              ? mech.derivative
              : 1.0;
      Eigen::VectorXd s(br_grid);
      for (int i = 0; i < br_grid; ++i) s[i] = s_hi * i / (br_grid - 1);
      exitflow::TransformSolution sol;
      std::string col;
      if (mech.kind == BranchingMechanism::Kind::CsbMechanism) {
        sol = exitflow::solve_csb_kappa(mech, s);
        col = "kappa";
      } else if (mech.kind == BranchingMechanism::Kind::CtMechanism) {
        sol = exitflow::solve_ct_phi(mech, s);
        col = "phi";
      } else {
        sol.s = s;
        sol.values.resize(s.size());
        for (int i = 0; i < br_grid; ++i)
          sol.values[i] = exitflow::gw_poincare_phi(mech, s[i]);
        col = "phi";
      }
      std::ofstream os(g.out_dir + "/branching.csv", std::ios::binary);
      os.precision(17);
      os << "# meta: mechanism=" << mech.name << " param=" << br_param
         << "\ns," << col << "\n";
      for (Eigen::Index i = 0; i < sol.s.size(); ++i)
        os << sol.s[i] << "," << sol.values[i] << "\n";
      std::cout << "wrote " << g.out_dir << "/branching.csv (residual "
                << sol.residual << ")\n";
      return 0;
    }

    if (cls->parsed()) {
      auto model = model_from_flags(cls_model, cls_model_json);
      auto profile = exitflow::build_scale_profile(model, cls_eps);
      exitflow::write_scale_profile_csv(g.out_dir + "/scale_profile.csv",
                                        profile);
      std::cout << exitflow::scale_profile_verdict_json(profile) << "\n";
      return 0;
    }

    if (ver->parsed()) {
      ExperimentConfig cfg = load_config(g);
      auto rep = exitflow::run_experiment(ver_name, cfg, g.out_dir);
      std::cout << "experiment " << rep.experiment << ": "
                << (rep.all_pass() ? "PASS" : "FAIL") << " ("
                << rep.runtime_seconds << " s)\n";
      for (const auto& v : rep.verdicts)
        std::cout << "  " << (v.pass ? "pass" : "FAIL") << "  " << v.name
                  << "  value=" << v.value << " threshold=" << v.threshold
                  << " [" << v.provenance << "]\n";
      return rep.all_pass() ? 0 : 2;
    }

    if (repc->parsed()) {
      const json j = json::parse(slurp(g.out_dir + "/report.json"));
      std::cout << "experiment: " << j.value("experiment", "?") << "\n";
      bool ok = j.value("all_pass", false);
      for (const auto& v : j["verdicts"])
        std::cout << "  " << (v.value("pass", false) ? "pass" : "FAIL") << "  "
                  << v.value("name", "?") << "\n";
      std::cout << (ok ? "PASS" : "FAIL") << "\n";
      return ok ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
