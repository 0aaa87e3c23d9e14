#include <doctest.h>

#include <cmath>

#include "exitflow/sde.hpp"

using namespace exitflow;

TEST_CASE("critical time and stage partition") {
  auto m = builtin_model("logistic_feller");
  CHECK(critical_time(m, 0.01) == doctest::Approx(std::log(100.0)));
  auto m2 = builtin_model("logistic_feller", {{"gamma", 2.0}});
  CHECK(critical_time(m2, 0.01) == doctest::Approx(0.5 * std::log(100.0)));
  CHECK_THROWS_AS(critical_time(m, 1.5), BadEpsilon);
  CHECK_THROWS_AS(critical_time(m, 0.0), BadEpsilon);

  auto sp = stage_partition(m, 0.01, 0.75);
  CHECK(sp.t_critical == doctest::Approx(0.75 * std::log(100.0)));
  CHECK(sp.t_one == doctest::Approx(std::log(100.0)));
  CHECK_THROWS(stage_partition(m, 0.01, 0.4));
  CHECK_THROWS(stage_partition(m, 0.01, 1.0));
}

TEST_CASE("step size guard") {
  auto m = builtin_model("logistic_feller", {{"gamma", 4.0}});
  CHECK_THROWS_AS(
      simulate_paths(m, make_params(0.1), 0.05, 1.0, 10, 1),
      StepTooLarge);
}

TEST_CASE("ensembles are bit-identical across worker counts") {
  auto m = builtin_model("logistic_feller");
  auto a = simulate_paths(m, make_params(0.1), 0.01, 2.0, 64, 99, 1);
  auto b = simulate_paths(m, make_params(0.1), 0.01, 2.0, 64, 99, 4);
  REQUIRE(a.states.rows() == b.states.rows());
  CHECK((a.states.array() == b.states.array()).all());
  CHECK((a.absorption_time.array() == b.absorption_time.array()).all());
  CHECK(a.normal_draws == b.normal_draws);
}

TEST_CASE("absorption at zero is permanent") {
  auto m = builtin_model("logistic_feller");
  // tiny start, sizable noise: many paths die
  auto e = simulate_paths(m, {0.5, 0.001}, 0.01, 5.0, 256, 7, 2);
  int absorbed = 0;
  for (Eigen::Index p = 0; p < e.n_paths(); ++p) {
    if (!e.absorbed_at_zero[p]) continue;
    ++absorbed;
    CHECK(std::isfinite(e.absorption_time[p]));
    bool dead = false;
    for (Eigen::Index i = 0; i < e.times.size(); ++i) {
      if (dead) CHECK(e.states(p, i) == 0.0);
      if (e.states(p, i) == 0.0) dead = true;
    }
  }
  CHECK(absorbed > 0);
}

TEST_CASE("feller ensemble mean tracks the exponential") {
  const double gamma = 1.0, y0 = 1.0, t = 2.0;
  auto e = simulate_feller(gamma, 1.0, y0, 0.002, t, 20000, 21, 4);
  const Eigen::Index last = e.times.size() - 1;
  const double mean = e.mean_at(last);
  const double exact = y0 * std::exp(gamma * t);
  // var(Y_t) = y0 a'(0)/gamma e^{gamma t}(e^{gamma t}-1)
  const double sd = std::sqrt(std::exp(t) * (std::exp(t) - 1.0) / 20000.0);
  CHECK(std::abs(mean - exact) < 4.0 * sd + 0.01 * exact);
}

TEST_CASE("coupled blow-up shares the noise and the grid") {
  auto m = builtin_model("logistic_feller");
  Eigen::VectorXd cps(2);
  cps << 0.5, 1.0;
  auto ce = simulate_coupled_blowup(m, 0.01, 0.002, cps, 128, 5, 2);
  CHECK(ce.blown_up.n_paths() == 128);
  CHECK(ce.feller.n_paths() == 128);
  CHECK(ce.blown_up.normal_draws == ce.feller.normal_draws);
  // the coupled processes start together and stay close at eps = 0.01
  double worst = 0.0;
  for (Eigen::Index p = 0; p < 128; ++p)
    worst = std::max(worst,
                     std::abs(ce.blown_up.states(p, 1) - ce.feller.states(p, 1)));
  CHECK(worst < 1.0);
}

TEST_CASE("deterministic checkpoint stepping lands exactly") {
  auto m = builtin_model("logistic_feller");
  Eigen::VectorXd cps(3);
  cps << 0.1, 0.55, 1.0;  // not multiples of dt
  auto e = simulate_paths(m, make_params(0.1), 0.03, cps, 8, 13, 1);
  CHECK(e.times.size() == 3);
  CHECK((e.states.array() >= 0.0).all());
}
