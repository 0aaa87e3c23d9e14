#include <doctest.h>

#include <cmath>

#include "exitflow/errors.hpp"
#include "exitflow/interp.hpp"
#include "exitflow/ode.hpp"
#include "exitflow/quadrature.hpp"
#include "exitflow/rng.hpp"

using namespace exitflow;

TEST_CASE("adaptive quadrature hits analytic values") {
  ScalarFn sq = [](double x) { return x * x; };
  CHECK(integrate(sq, 0.0, 1.0).value == doctest::Approx(1.0 / 3).epsilon(1e-12));

  ScalarFn osc = [](double x) { return std::sin(10.0 * x); };
  const double exact = (1.0 - std::cos(10.0)) / 10.0;
  CHECK(integrate(osc, 0.0, 1.0).value == doctest::Approx(exact).epsilon(1e-11));

  ScalarFn bad = [](double x) { return 1.0 / x; };
  CHECK_THROWS_AS(integrate(bad, -1.0, 1.0), SingularIntegrand);
}

TEST_CASE("removable endpoint: sin(x)/x on [0,1]") {
  ScalarFn f = [](double x) { return std::sin(x) / x; };
  const double si1 = 0.946083070367183;  // Si(1)
  const double got =
      integrate_with_removable_endpoint(f, 0.0, 1.0, 0.0, 1e-4).value;
  CHECK(got == doctest::Approx(si1).epsilon(1e-8));
}

TEST_CASE("improper integrals classified and extrapolated") {
  ScalarFn inv2 = [](double x) { return 1.0 / (x * x); };
  auto r = improper_integral(inv2, 1.0, std::numeric_limits<double>::infinity());
  CHECK(r.verdict == TailVerdict::Convergent);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-6));

  ScalarFn harmonic = [](double x) { return 1.0 / x; };
  auto d = improper_integral(harmonic, 1.0,
                             std::numeric_limits<double>::infinity());
  CHECK(d.verdict == TailVerdict::Divergent);

  // finite endpoint, integrable singularity: int_0^1 x^{-1/2} = 2
  ScalarFn rsqrt = [](double x) { return 1.0 / std::sqrt(x); };
  auto s = improper_integral(rsqrt, 1.0, 0.0);
  CHECK(s.verdict == TailVerdict::Convergent);
  CHECK(s.value == doctest::Approx(2.0).epsilon(1e-6));

  auto h0 = improper_integral(harmonic, 1.0, 0.0);
  CHECK(h0.verdict == TailVerdict::Divergent);

  // overflowing tail counts as divergent
  ScalarFn expo = [](double x) { return std::exp(x); };
  auto e = improper_integral(expo, 1.0, std::numeric_limits<double>::infinity());
  CHECK(e.verdict == TailVerdict::Divergent);
}

TEST_CASE("ode integrator: exact exponential and logistic") {
  auto lin = [](double, double y) { return y; };
  const double e1 = integrate_ode<double>(lin, 1.0, 0.0, 1.0);
  CHECK(e1 == doctest::Approx(std::exp(1.0)).epsilon(1e-10));

  auto logi = [](double, double y) { return y * (1.0 - y); };
  const double x0 = 0.1, t = 3.0;
  const double exact = x0 * std::exp(t) / (1.0 + x0 * (std::exp(t) - 1.0));
  OdeStats st;
  const double got = integrate_ode<double>(logi, x0, 0.0, t, {}, &st);
  CHECK(got == doctest::Approx(exact).epsilon(1e-9));
  CHECK(st.steps > 0);
}

TEST_CASE("pchip preserves monotone data and reproduces linears") {
  Eigen::VectorXd x(5), y(5);
  x << 0, 1, 2, 3, 4;
  y << 0, 2, 4, 6, 8;
  PchipInterpolant lin(x, y);
  CHECK(lin(2.5) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(lin.derivative(1.7) == doctest::Approx(2.0).epsilon(1e-12));

  Eigen::VectorXd ym(5);
  ym << 0.0, 0.1, 0.5, 0.9, 1.0;  // S-curve
  PchipInterpolant mono(x, ym);
  double prev = mono(0.0);
  for (double q = 0.05; q <= 4.0; q += 0.05) {
    const double v = mono(q);
    CHECK(v >= prev - 1e-14);
    prev = v;
  }
}

TEST_CASE("rng streams are reproducible and independent") {
  Rng a(7, 3), b(7, 3), c(7, 4);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  bool differs = false;
  Rng a2(7, 3);
  for (int i = 0; i < 100; ++i) differs |= (a2.next_u64() != c.next_u64());
  CHECK(differs);

  // moment sanity of the normal generator
  Rng n(11, 0);
  double m = 0, v = 0;
  const int N = 200000;
  for (int i = 0; i < N; ++i) {
    const double z = n.normal();
    m += z;
    v += z * z;
  }
  m /= N;
  v = v / N - m * m;
  CHECK(std::abs(m) < 0.01);
  CHECK(v == doctest::Approx(1.0).epsilon(0.02));
}
