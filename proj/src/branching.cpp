#include "exitflow/branching.hpp"

#include <cmath>

#include "exitflow/errors.hpp"
#include "exitflow/ode.hpp"
#include "exitflow/quadrature.hpp"

namespace exitflow {

BranchingMechanism BranchingMechanism::binary_splitting() {
  return {Kind::CtMechanism, [](double s) { return s * s - s; }, 1.0,
          "binary_splitting"};
}

BranchingMechanism BranchingMechanism::feller(double gamma) {
  return {Kind::CsbMechanism,
          [gamma](double s) { return gamma * s - 0.5 * s * s; }, gamma,
          "feller"};
}

BranchingMechanism BranchingMechanism::geometric_gw(double u) {
  if (!(u > 0.0 && u < 1.0)) throw BadParameter("geometric_gw: need u in (0,1)");
  const double m = u / (1.0 - u);  // p^'(1)
  return {Kind::GwGeneratingFunction,
          [u](double s) { return (1.0 - u) / (1.0 - u * s); }, m,
          "geometric_gw"};
}

BranchingMechanism BranchingMechanism::geometric_ct(double u) {
  if (!(u > 0.0 && u < 1.0)) throw BadParameter("geometric_ct: need u in (0,1)");
  const double dpsi1 = u / (1.0 - u) - 1.0;  // Psi'(1) = p^'(1) - 1
  return {Kind::CtMechanism,
          [u](double s) { return (1.0 - u) / (1.0 - u * s) - s; }, dpsi1,
          "geometric_ct"};
}

BranchingMechanism BranchingMechanism::kary_fission(int k) {
  if (k < 2) throw BadParameter("kary_fission: need k >= 2");
  return {Kind::CtMechanism,
          [k](double s) { return std::pow(s, k) - s; },
          double(k) - 1.0, "kary_fission"};
}

namespace {

constexpr double kSeriesStart = 1e-6;

void check_sorted(const Eigen::VectorXd& s) {
  for (Eigen::Index i = 1; i < s.size(); ++i)
    if (!(s[i] > s[i - 1])) throw Error("branching: s_grid must be increasing");
  if (s.size() && s[0] < 0.0) throw Error("branching: s_grid must be >= 0");
}

// shared singular-ODE march in tau = log s for both (ctP) and (difP)
TransformSolution solve_singular_ode(const BranchingMechanism& mech,
                                     const Eigen::VectorXd& s_grid,
                                     double start_value, double lo_clip,
                                     double hi_clip, bool is_phi) {
  check_sorted(s_grid);
  if (mech.derivative == 0.0)
    throw Error("branching: vanishing mechanism derivative");
  TransformSolution sol;
  sol.s = s_grid;
  sol.values.resize(s_grid.size());

  const double inv_d = 1.0 / mech.derivative;
  auto rhs = [&](double, double v) { return inv_d * mech.psi(v); };

  OdeOptions opt;
  opt.abs_tol = 1e-13;
  opt.rel_tol = 1e-11;

  double v = start_value;
  double tau = std::log(kSeriesStart);
  for (Eigen::Index i = 0; i < s_grid.size(); ++i) {
    const double s = s_grid[i];
    if (s == 0.0) {
      sol.values[i] = is_phi ? 1.0 : 0.0;
      continue;
    }
    if (s <= kSeriesStart) {
      sol.values[i] = is_phi ? 1.0 - s : s;  // series stub
      continue;
    }
    v = integrate_ode<double>(rhs, v, tau, std::log(s), opt);
    tau = std::log(s);
    if (v < lo_clip || v > hi_clip)
      throw SingularityHit("branching: solution left its admissible range");
    sol.values[i] = v;
  }

  // ODE residual by centered differences over the tabulated grid
  double worst = 0.0;
  for (Eigen::Index i = 1; i + 1 < s_grid.size(); ++i) {
    if (s_grid[i] <= kSeriesStart) continue;
    const double d =
        (sol.values[i + 1] - sol.values[i - 1]) / (s_grid[i + 1] - s_grid[i - 1]);
    worst = std::max(
        worst, std::abs(s_grid[i] * d - inv_d * mech.psi(sol.values[i])));
  }
  sol.residual = worst;
  return sol;
}

// theta = kappa^{-1} lives on [0, u*) with Psi(u*) = 0, u* > 0: the range of
// the cumulant transform is capped by the first positive zero of Psi.
double csb_domain_cap(const BranchingMechanism& mech) {
  double hi = mech.derivative;
  while (mech.psi(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e12) return hi;
  }
  double lo = hi / 2.0;
  for (int i = 0; i < 200 && (hi - lo) > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mech.psi(mid) > 0.0 ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

TransformSolution solve_ct_phi(const BranchingMechanism& mech,
                               const Eigen::VectorXd& s_grid) {
  if (mech.kind != BranchingMechanism::Kind::CtMechanism)
    throw Error("solve_ct_phi: not a continuous-time mechanism");
  return solve_singular_ode(mech, s_grid, 1.0 - kSeriesStart, 0.0,
                            1.0 + 1e-12, true);
}

TransformSolution solve_csb_kappa(const BranchingMechanism& mech,
                                  const Eigen::VectorXd& s_grid) {
  if (mech.kind != BranchingMechanism::Kind::CsbMechanism)
    throw Error("solve_csb_kappa: not a continuous-state mechanism");
  if (!(mech.derivative > 0.0)) throw Error("solve_csb_kappa: need Psi'(0) > 0");
  return solve_singular_ode(mech, s_grid, kSeriesStart, 0.0,
                            std::numeric_limits<double>::infinity(), false);
}

TransformSolution theta_inverse_ct(const BranchingMechanism& mech,
                                   const Eigen::VectorXd& s_grid) {
  if (mech.kind != BranchingMechanism::Kind::CtMechanism)
    throw Error("theta_inverse_ct: not a continuous-time mechanism");
  check_sorted(s_grid);
  TransformSolution sol;
  sol.s = s_grid;
  sol.values.resize(s_grid.size());

  const double dpsi1 = mech.derivative;
  ScalarFn f = [&](double u) {
    const double p = mech.psi(u);
    if (p == 0.0) throw SingularIntegrand("theta_inverse_ct: Psi vanishes");
    return dpsi1 / p + 1.0 / (1.0 - u);
  };
  QuadOptions opt;
  opt.abs_tol = 1e-13;
  opt.rel_tol = 1e-11;
  for (Eigen::Index i = 0; i < s_grid.size(); ++i) {
    const double s = s_grid[i];
    if (s >= 1.0) {
      sol.values[i] = 0.0;
      continue;
    }
    if (s == 0.0) {
      sol.values[i] = std::numeric_limits<double>::infinity();
      continue;
    }
    const double delta = std::min(1e-4, (1.0 - s) / 8.0);
    const double I =
        integrate_with_removable_endpoint(f, s, 1.0, 1.0, delta, opt).value;
    sol.values[i] = (1.0 - s) * std::exp(-I);
  }
  return sol;
}

TransformSolution theta_inverse_csb(const BranchingMechanism& mech,
                                    const Eigen::VectorXd& s_grid) {
  if (mech.kind != BranchingMechanism::Kind::CsbMechanism)
    throw Error("theta_inverse_csb: not a continuous-state mechanism");
  check_sorted(s_grid);
  const double dpsi0 = mech.derivative;
  const double cap = csb_domain_cap(mech);
  if (s_grid.size() && s_grid[s_grid.size() - 1] > cap * (1.0 + 1e-12))
    throw DomainCap("theta_inverse_csb: grid exceeds the zero of Psi");

  TransformSolution sol;
  sol.s = s_grid;
  sol.values.resize(s_grid.size());
  ScalarFn f = [&](double u) {
    const double p = mech.psi(u);
    if (p == 0.0) throw SingularIntegrand("theta_inverse_csb: Psi vanishes");
    return dpsi0 / p - 1.0 / u;
  };
  QuadOptions opt;
  opt.abs_tol = 1e-13;
  opt.rel_tol = 1e-11;
  for (Eigen::Index i = 0; i < s_grid.size(); ++i) {
    const double s = s_grid[i];
    if (s == 0.0) {
      sol.values[i] = 0.0;
      continue;
    }
    const double delta = std::min(1e-4, s / 8.0);
    const double I =
        integrate_with_removable_endpoint(f, 0.0, s, 0.0, delta, opt).value;
    sol.values[i] = s * std::exp(I);
  }
  return sol;
}

double gw_poincare_phi(const BranchingMechanism& mech, double s) {
  if (mech.kind != BranchingMechanism::Kind::GwGeneratingFunction)
    throw Error("gw_poincare_phi: not a GW mechanism");
  const double m = mech.derivative;
  if (!(m > 1.0)) throw Error("gw_poincare_phi: need supercritical m > 1");
  double prev = std::exp(-s);
  for (int n = 1; n <= 2000; ++n) {
    double v = std::exp(-s / std::pow(m, n));
    for (int j = 0; j < n; ++j) v = mech.psi(v);
    if (std::abs(v - prev) < 1e-8) return v;
    prev = v;
  }
  throw IterationDiverged("gw_poincare_phi: Poincare iteration did not settle");
}

double schroeder_residual(const BranchingMechanism& mech,
                          const Eigen::VectorXd& s_grid, double m_override) {
  check_sorted(s_grid);
  const double m = m_override > 0.0 ? m_override : mech.derivative;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < s_grid.size(); ++i) {
    const double s = s_grid[i];
    const double lhs = gw_poincare_phi(mech, m * s);
    const double rhs = mech.psi(gw_poincare_phi(mech, s));
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

}  // namespace exitflow
