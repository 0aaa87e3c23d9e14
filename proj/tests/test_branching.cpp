#include <doctest.h>

#include <cmath>

#include "exitflow/branching.hpp"
#include "exitflow/errors.hpp"

using namespace exitflow;

namespace {
Eigen::VectorXd linspace(double a, double b, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}
}  // namespace

TEST_CASE("feller cumulant transform and its inverse, closed forms") {
  const double g = 1.5;
  auto mech = BranchingMechanism::feller(g);
  auto grid = linspace(0.0, 8.0, 81);
  auto kappa = solve_csb_kappa(mech, grid);
  for (int i = 0; i < 81; ++i) {
    const double s = grid[i];
    CHECK(std::abs(kappa.values[i] - 2.0 * g * s / (2.0 * g + s)) < 1e-6);
  }

  auto tg = linspace(0.0, 2.0 * g * 0.999, 41);
  auto theta = theta_inverse_csb(mech, tg);
  for (int i = 0; i < 41; ++i) {
    const double s = tg[i];
    CHECK(std::abs(theta.values[i] - 2.0 * g * s / (2.0 * g - s)) < 1e-6);
  }
  // grid beyond the cap Psi'(0) is refused
  CHECK_THROWS_AS(theta_inverse_csb(mech, linspace(0.0, 2.0 * g + 1.0, 5)),
                  DomainCap);
}

TEST_CASE("binary splitting: phi(s) = 1/(1+s)") {
  auto mech = BranchingMechanism::binary_splitting();
  auto grid = linspace(0.0, 4.0, 81);
  auto phi = solve_ct_phi(mech, grid);
  for (int i = 0; i < 81; ++i)
    CHECK(std::abs(phi.values[i] - 1.0 / (1.0 + grid[i])) < 1e-6);
  CHECK(phi.residual < 1e-3);  // FD diagnostic on the tabulated grid

  auto theta = theta_inverse_ct(mech, linspace(0.0, 1.0, 21));
  for (int i = 1; i < 20; ++i) {
    const double s = theta.s[i];
    CHECK(std::abs(theta.values[i] - (1.0 - s) / s) < 1e-6);
  }
}

TEST_CASE("geometric continuous-time mechanism implicit relation") {
  // theta(s)^{1/u} = (1-2u)^{1/(1-u)} (1-s)^{1/u} / (1-u(1+s))^{1/(1-u)},
  // equivalently theta(s) = (1-s) ((1-2u)/(1-u(1+s)))^{u/(1-u)}; verified
  // against independent quadrature to 1e-13 before freezing
  const double u = 0.3;
  auto mech = BranchingMechanism::geometric_ct(u);
  auto grid = linspace(0.05, 0.95, 19);
  auto theta = theta_inverse_ct(mech, grid);
  for (int i = 0; i < 19; ++i) {
    const double s = grid[i];
    const double lhs = std::pow(theta.values[i], 1.0 / u);
    const double rhs = std::pow(1.0 - 2.0 * u, 1.0 / (1.0 - u)) *
                       std::pow(1.0 - s, 1.0 / u) /
                       std::pow(1.0 - u * (1.0 + s), 1.0 / (1.0 - u));
    CHECK(std::abs(lhs - rhs) < 1e-6);
    const double closed =
        (1.0 - s) * std::pow((1.0 - 2.0 * u) / (1.0 - u * (1.0 + s)),
                             u / (1.0 - u));
    CHECK(std::abs(theta.values[i] - closed) < 1e-6);
  }
}

TEST_CASE("kary fission transform solves its own ode") {
  auto mech = BranchingMechanism::kary_fission(3);
  auto grid = linspace(0.0, 2.0, 41);
  auto phi = solve_ct_phi(mech, grid);
  CHECK(phi.residual < 1e-3);
  for (int i = 1; i < 41; ++i) CHECK(phi.values[i] < phi.values[i - 1]);
}

TEST_CASE("galton-watson schroeder equation via poincare iteration") {
  const double u = 0.7;  // supercritical, m = 7/3
  auto mech = BranchingMechanism::geometric_gw(u);
  auto grid = linspace(0.1, 2.0, 9);
  CHECK(schroeder_residual(mech, grid) < 1e-6);
  // detector sanity: a wrong offspring mean breaks the functional equation
  CHECK(schroeder_residual(mech, grid, 1.7) > 1e-3);
}

TEST_CASE("kind mismatches are rejected") {
  auto csb = BranchingMechanism::feller(1.0);
  auto ct = BranchingMechanism::binary_splitting();
  auto grid = linspace(0.0, 1.0, 5);
  CHECK_THROWS(solve_ct_phi(csb, grid));
  CHECK_THROWS(solve_csb_kappa(ct, grid));
  CHECK_THROWS(theta_inverse_ct(csb, grid));
  CHECK_THROWS(theta_inverse_csb(ct, grid));
  CHECK_THROWS(gw_poincare_phi(ct, 1.0));
  CHECK_THROWS_AS(BranchingMechanism::geometric_gw(1.2), BadParameter);
  CHECK_THROWS_AS(BranchingMechanism::kary_fission(1), BadParameter);
}
