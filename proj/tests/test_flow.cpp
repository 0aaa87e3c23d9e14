#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "exitflow/flow.hpp"

using namespace exitflow;

TEST_CASE("logistic flow matches the closed form") {
  auto m = builtin_model("logistic_feller");
  for (double x0 : {0.01, 0.2, 0.9, 1.5}) {
    for (double t : {0.1, 1.0, 5.0}) {
      const double exact =
          x0 * std::exp(t) / (1.0 + x0 * (std::exp(t) - 1.0));
      CHECK(flow(m, x0, t) == doctest::Approx(exact).epsilon(1e-9));
    }
  }
  CHECK(flow(m, 0.0, 3.0) == 0.0);
}

TEST_CASE("rescaled flow golden values") {
  auto logistic = builtin_model("logistic_feller");
  auto rf = compute_rescaled_flow(logistic, 20.0, 101);
  for (Eigen::Index i = 0; i < rf.grid.size(); ++i) {
    const double y = rf.grid[i];
    CHECK(std::abs(rf.phi_tilde[i] - y / (1.0 + y)) < 1e-6);
  }

  auto ga = builtin_model("gilpin_ayala_pow", {{"theta", 2.0}});
  auto rf2 = compute_rescaled_flow(ga, 10.0, 51);
  for (Eigen::Index i = 0; i < rf2.grid.size(); ++i) {
    const double y = rf2.grid[i];
    CHECK(std::abs(rf2.phi_tilde[i] - y / std::sqrt(1.0 + y * y)) < 1e-6);
  }
}

TEST_CASE("inverse w and the round trip") {
  auto m = builtin_model("logistic_feller");
  for (double x : {0.1, 0.5, 0.9, 0.99}) {
    CHECK(invert_w(m, x) == doctest::Approx(x / (1.0 - x)).epsilon(1e-8));
  }
  CHECK(std::isinf(invert_w(m, 1.0)));
  CHECK(std::isinf(invert_w(m, 1.5)));  // at/above the cap x_c

  auto ga = builtin_model("gilpin_ayala_pow", {{"theta", 2.0}});
  for (double x : {0.3, 0.8}) {
    const double exact = x / std::sqrt(1.0 - x * x);
    CHECK(invert_w(ga, x) == doctest::Approx(exact).epsilon(1e-8));
  }

  auto rf = compute_rescaled_flow(m, 20.0, 101);
  CHECK(rf.cross_check_residual < 1e-6);
}

TEST_CASE("poincare residual small for a faithful table") {
  auto m = builtin_model("logistic_feller");
  auto rf = compute_rescaled_flow(m, 20.0, 201);
  auto res = poincare_residual(m, rf);
  CHECK(res.functional < 1e-6);
  CHECK(res.ode_form < 1e-2);  // FD-on-interpolant diagnostic, looser
}

TEST_CASE("rescaled flow table round-trips through CSV") {
  auto m = builtin_model("logistic_feller");
  auto rf = compute_rescaled_flow(m, 5.0, 21);
  const std::string path = "rf_roundtrip.csv";
  write_rescaled_flow_csv(path, rf);
  auto back = read_rescaled_flow_csv(path);
  std::remove(path.c_str());
  REQUIRE(back.grid.size() == rf.grid.size());
  CHECK(back.model_hash == rf.model_hash);
  CHECK(back.gamma == rf.gamma);
  for (Eigen::Index i = 0; i < rf.grid.size(); ++i) {
    CHECK(back.grid[i] == rf.grid[i]);
    CHECK(back.phi_tilde[i] == rf.phi_tilde[i]);
  }
}

TEST_CASE("flow guards") {
  auto m = builtin_model("logistic_feller");
  CHECK_THROWS(flow(m, 0.5, -1.0));
  // super-linear custom drift leaves the ceiling in finite time
  auto blow = builtin_model("custom", {{"gamma", 1.0}},
                            {{"drift_form", "linear"}});
  blow.drift = [](double x) { return x * x; };
  CHECK_THROWS_AS(flow(blow, 2.0, 10.0), BlowUp);
}
