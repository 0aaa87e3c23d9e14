#include "exitflow/model.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace exitflow {

namespace {

double get_or(const std::map<std::string, double>& m, const std::string& k,
              double fallback) {
  auto it = m.find(k);
  return it == m.end() ? fallback : it->second;
}

std::string get_or(const std::map<std::string, std::string>& m,
                   const std::string& k, const std::string& fallback) {
  auto it = m.find(k);
  return it == m.end() ? fallback : it->second;
}

// derivative at 0 by centered differences, one-sided fallback when the
// function is not evaluable left of the origin (fractional powers)
double fd_derivative_at_zero(const ScalarFn& f, double h) {
  const double fp = f(h), fp2 = f(2 * h);
  const double fm = f(-h), fm2 = f(-2 * h);
  if (std::isfinite(fm) && std::isfinite(fm2))
    return (8.0 * (fp - fm) - (fp2 - fm2)) / (12.0 * h);
  const double fp3 = f(3 * h);
  return (18.0 * fp - 9.0 * fp2 + 2.0 * fp3) / (6.0 * h);  // uses f(0)=0
}

// continuous extension to 0 by linear extrapolation from h, 2h
double extrapolate_to_zero(const ScalarFn& f, double h) {
  return 2.0 * f(h) - f(2 * h);
}

bool probe_lipschitz(const DiffusionModel& m, double upto) {
  const int n = 96;
  std::vector<double> xs(n), mus(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = upto * (i + 1) / double(n);
    mus[i] = m.mu(xs[i]);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(mus[j] - mus[i]) >
          m.gamma * std::abs(xs[j] - xs[i]) * (1.0 + 1e-9) + 1e-12)
        return false;
  return true;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

DiffusionModel finalize(DiffusionModel m) {
  const double cap = m.xc_or(1.0);
  m.sim_ceiling = m.unbounded ? 10.0 * std::max(1.0, cap)
                              : m.right_end;
  m.drift_lipschitz = probe_lipschitz(m, m.x_c ? *m.x_c
                                               : std::min(m.sim_ceiling, 1.0));
  return m;
}

}  // namespace

std::uint64_t DiffusionModel::hash() const {
  std::ostringstream os;
  os.precision(17);
  os << name << '|' << gamma << '|' << a_prime0 << '|'
     << (x_c ? *x_c : -1.0) << '|' << right_end;
  return fnv1a(os.str());
}

std::string DiffusionModel::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(hash()));
  return buf;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks)
    os << (c.pass ? "pass " : "FAIL ") << c.name << " (measured "
       << c.measured << ") " << c.detail << "\n";
  os << (usable ? "model usable" : "model NOT usable");
  return os.str();
}

ValidationReport validate_assumptions(const DiffusionModel& model) {
  ValidationReport rep;
  const double scale = model.xc_or(1.0);
  const double h = 1e-6 * std::max(1.0, scale);

  // probe grid evaluability
  for (int i = 1; i <= 32; ++i) {
    const double x =
        (model.unbounded ? model.sim_ceiling : model.right_end) * i / 33.0;
    const double mu = model.mu(x), a = model.a(x);
    if (!std::isfinite(mu) || !std::isfinite(a))
      throw NonEvaluable("validate_assumptions: coefficients not finite at x=" +
                         std::to_string(x));
  }

  const double mu0 = extrapolate_to_zero(model.drift, h);
  rep.checks.push_back({"mu(0)=0", std::abs(mu0) <= 1e-8 * std::max(1.0, model.gamma),
                        mu0, "continuous extension at 0"});

  const double a0 = extrapolate_to_zero(model.diffusion_sq, h);
  rep.checks.push_back({"a(0)=0",
                        std::abs(a0) <= 1e-8 * std::max(1.0, model.a_prime0),
                        a0, "continuous extension at 0"});

  rep.checks.push_back({"gamma>0", model.gamma > 0.0, model.gamma, ""});
  rep.checks.push_back({"a'(0)>0", model.a_prime0 > 0.0, model.a_prime0, ""});

  const double g_fd = fd_derivative_at_zero(model.drift, h);
  const bool g_ok =
      std::abs(g_fd - model.gamma) <= 1e-6 * std::max(std::abs(model.gamma), 1e-12);
  rep.checks.push_back({"gamma matches mu'(0)", g_ok, g_fd, "finite differences"});

  const double a_fd = fd_derivative_at_zero(model.diffusion_sq, h);
  const bool a_ok = std::abs(a_fd - model.a_prime0) <=
                    1e-6 * std::max(std::abs(model.a_prime0), 1e-12);
  rep.checks.push_back({"a'(0) matches", a_ok, a_fd, "finite differences"});

  if (model.x_c) {
    const double xc = *model.x_c;
    const double mu_xc = model.mu(xc);
    rep.checks.push_back({"mu(x_c)=0",
                          std::abs(mu_xc) <= 1e-8 * std::max(1.0, model.gamma * xc),
                          mu_xc, ""});
    bool pos = true;
    double worst = 1.0;
    for (int i = 1; i < 64; ++i) {
      const double x = xc * i / 64.0;
      const double mu = model.mu(x);
      if (mu <= 0.0) {
        pos = false;
        worst = mu;
        break;
      }
    }
    rep.checks.push_back({"mu>0 on (0,x_c)", pos, worst, ""});
  }

  rep.usable = true;
  for (const auto& c : rep.checks) rep.usable = rep.usable && c.pass;
  return rep;
}

DiffusionModel builtin_model(const std::string& name,
                             const std::map<std::string, double>& params,
                             const std::map<std::string, std::string>& forms) {
  DiffusionModel m;
  m.name = name;
  const double gamma = get_or(params, "gamma", 1.0);
  const double xc = get_or(params, "x_c", 1.0);
  const double sigma2 = get_or(params, "sigma2", 1.0);

  if (name == "kimura_fisher_wright") {
    if (!(xc > 0.0 && xc <= 1.0))
      throw BadParameter("kimura_fisher_wright: need 0 < x_c <= 1");
    m.drift = [gamma, xc](double x) { return gamma * x * (1.0 - x / xc); };
    m.diffusion_sq = [](double x) { return x * (1.0 - x); };
    m.right_end = 1.0;
    m.unbounded = false;
    m.gamma = gamma;
    m.a_prime0 = 1.0;
    m.x_c = xc;
  } else if (name == "logistic_feller") {
    if (!(xc > 0.0)) throw BadParameter("logistic_feller: need x_c > 0");
    m.drift = [gamma, xc](double x) { return gamma * x * (1.0 - x / xc); };
    m.diffusion_sq = [](double x) { return x; };
    m.gamma = gamma;
    m.a_prime0 = 1.0;
    m.x_c = xc;
  } else if (name == "gilpin_ayala_pow") {
    const double theta = get_or(params, "theta", 1.0);
    if (theta <= 0.0) throw BadParameter("gilpin_ayala_pow: need theta > 0");
    if (!(xc > 0.0)) throw BadParameter("gilpin_ayala_pow: need x_c > 0");
    m.drift = [gamma, xc, theta](double x) {
      return gamma * x * (1.0 - std::pow(x / xc, theta));
    };
    m.diffusion_sq = [sigma2](double x) { return sigma2 * x; };
    m.gamma = gamma;
    m.a_prime0 = sigma2;
    m.x_c = xc;
  } else if (name == "holling") {
    const double beta = get_or(params, "beta", 0.0);
    const double nexp = get_or(params, "n", 2.0);
    if (beta < 0.0) throw BadParameter("holling: need beta >= 0");
    if (nexp < 1.0) throw BadParameter("holling: need n >= 1");
    m.drift = [gamma, xc, beta, nexp](double x) {
      const double xn = std::pow(x, nexp);
      return gamma * x * (1.0 - x / xc - beta * std::pow(x, nexp - 1.0) / (1.0 + xn));
    };
    m.diffusion_sq = [sigma2](double x) { return sigma2 * x; };
    m.gamma = (nexp == 1.0) ? gamma * (1.0 - beta) : gamma;
    m.a_prime0 = sigma2;
    // nearest stable zero of the drift bracket, found by bisection on (0, xc]
    {
      auto bracket = [xc, beta, nexp](double x) {
        return 1.0 - x / xc - beta * std::pow(x, nexp - 1.0) / (1.0 + std::pow(x, nexp));
      };
      double lo = 1e-12, hi = xc;
      if (bracket(hi) > 0.0) {
        m.x_c = xc;  // beta == 0 degenerate
      } else {
        for (int i = 0; i < 200; ++i) {
          const double mid = 0.5 * (lo + hi);
          (bracket(mid) > 0.0 ? lo : hi) = mid;
        }
        m.x_c = 0.5 * (lo + hi);
      }
    }
  } else if (name == "custom") {
    const std::string dform = get_or(forms, "drift_form", "logistic");
    const std::string aform = get_or(forms, "diffusion_form", "linear");
    if (dform == "logistic") {
      m.drift = [gamma, xc](double x) { return gamma * x * (1.0 - x / xc); };
      m.gamma = gamma;
      m.x_c = xc;
    } else if (dform == "gilpin_ayala") {
      const double theta = get_or(params, "theta", 1.0);
      if (theta <= 0.0) throw BadParameter("custom: need theta > 0");
      m.drift = [gamma, xc, theta](double x) {
        return gamma * x * (1.0 - std::pow(x / xc, theta));
      };
      m.gamma = gamma;
      m.x_c = xc;
    } else if (dform == "linear") {
      m.drift = [gamma](double x) { return gamma * x; };
      m.gamma = gamma;
    } else if (dform == "zero") {
      m.drift = [](double) { return 0.0; };
      m.gamma = 0.0;
    } else {
      throw UnknownModel("custom: unknown drift_form " + dform);
    }
    if (aform == "linear") {
      m.diffusion_sq = [sigma2](double x) { return sigma2 * x; };
      m.a_prime0 = sigma2;
    } else if (aform == "kfw") {
      m.diffusion_sq = [](double x) { return x * (1.0 - x); };
      m.a_prime0 = 1.0;
      m.right_end = 1.0;
      m.unbounded = false;
    } else if (aform == "quadratic") {
      m.diffusion_sq = [sigma2](double x) { return sigma2 * x * x; };
      m.a_prime0 = 0.0;
    } else if (aform == "constant") {
      m.diffusion_sq = [sigma2](double) { return sigma2; };
      m.a_prime0 = 0.0;
    } else {
      throw UnknownModel("custom: unknown diffusion_form " + aform);
    }
  } else {
    throw UnknownModel("builtin_model: unknown model " + name);
  }

  if (auto it = params.find("r_sim"); it != params.end()) {
    DiffusionModel f = finalize(std::move(m));
    f.sim_ceiling = it->second;
    return f;
  }
  return finalize(std::move(m));
}

DiffusionModel model_from_json_text(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const std::string name = j.at("name").get<std::string>();
  std::map<std::string, double> params;
  std::map<std::string, std::string> forms;
  if (j.contains("params"))
    for (auto& [k, v] : j.at("params").items()) params[k] = v.get<double>();
  if (j.contains("forms"))
    for (auto& [k, v] : j.at("forms").items()) forms[k] = v.get<std::string>();
  DiffusionModel m = builtin_model(name, params, forms);
  if (j.contains("overrides")) {
    const auto& o = j.at("overrides");
    const double h = 1e-6 * std::max(1.0, m.xc_or(1.0));
    if (o.contains("gamma")) {
      const double g = o.at("gamma").get<double>();
      const double fd = fd_derivative_at_zero(m.drift, h);
      if (std::abs(fd - g) > 1e-3 * std::max(std::abs(g), 1e-12))
        throw BadParameter("override gamma conflicts with measured mu'(0)");
      m.gamma = g;
    }
    if (o.contains("a_prime0")) {
      const double ap = o.at("a_prime0").get<double>();
      const double fd = fd_derivative_at_zero(m.diffusion_sq, h);
      if (std::abs(fd - ap) > 1e-3 * std::max(std::abs(ap), 1e-12))
        throw BadParameter("override a_prime0 conflicts with measured a'(0)");
      m.a_prime0 = ap;
    }
    if (o.contains("x_c")) m.x_c = o.at("x_c").get<double>();
  }
  return m;
}

}  // namespace exitflow
