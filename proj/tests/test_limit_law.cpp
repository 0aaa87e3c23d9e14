#include <doctest.h>

#include <cmath>

#include "exitflow/limit_law.hpp"
#include "exitflow/stats.hpp"

using namespace exitflow;

TEST_CASE("W law analytic structure") {
  WLaw law(1.0, 1.0);
  CHECK(law.lambda == doctest::Approx(2.0));
  CHECK(law.atom() == doctest::Approx(std::exp(-2.0)));
  CHECK(law.mean() == 1.0);
  CHECK(law.variance() == doctest::Approx(1.0));
  CHECK(laplace_W(law, 0.0) == doctest::Approx(1.0));
  CHECK(laplace_W(law, 1.0) == doctest::Approx(std::exp(-2.0 / 3.0)));
  CHECK_THROWS(laplace_W(law, -1.0));
  CHECK_THROWS(WLaw(0.0, 1.0));
}

TEST_CASE("exact sampler matches moments, atom and transform") {
  WLaw law(1.0, 1.0);
  const Eigen::Index n = 200000;
  auto w = sample_W(law, n, 12345);
  EmpiricalLaw emp(w);
  const double se_mean = std::sqrt(law.variance() / n);
  CHECK(std::abs(emp.mean() - 1.0) < 4.0 * se_mean);
  CHECK(std::abs(emp.atom_at_zero() - law.atom()) <
        4.0 * std::sqrt(law.atom() * (1.0 - law.atom()) / n));
  for (double s : {0.5, 2.0}) {
    double lt = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) lt += std::exp(-s * w[i]);
    lt /= n;
    const double exact = laplace_W(law, s);
    const double var = laplace_W(law, 2.0 * s) - exact * exact;
    CHECK(std::abs(lt - exact) < 4.0 * std::sqrt(var / n));
  }
}

TEST_CASE("laplace_Yt converges to laplace_W in the rescaled variable") {
  // E exp(-s e^{-gamma t} Y_t) -> E exp(-s W)
  WLaw law(1.0, 1.0);
  for (double s : {0.5, 1.0, 3.0}) {
    const double big_t = 25.0;
    const double lt =
        laplace_Yt(1.0, 1.0, 1.0, big_t, s * std::exp(-big_t));
    CHECK(lt == doctest::Approx(laplace_W(law, s)).epsilon(1e-8));
  }
}

TEST_CASE("limit position sampling maps through the rescaled flow") {
  auto m = builtin_model("logistic_feller");
  WLaw law(m.gamma, m.a_prime0);
  auto rf = compute_rescaled_flow(m, 40.0, 201);
  auto x = sample_limit_position(law, rf, 50000, 9);
  EmpiricalLaw emp(x);
  // phi~(W) = W/(1+W) lives in [0,1); atom preserved exactly
  CHECK(emp.values().maxCoeff() < 1.0);
  CHECK(emp.values().minCoeff() == 0.0);
  auto wref = sample_W(WLaw(m.gamma, m.a_prime0), 50000, 9);
  EmpiricalLaw watom(wref);
  CHECK(emp.atom_at_zero() == watom.atom_at_zero());

  auto tiny = compute_rescaled_flow(m, 1.0, 11);
  CHECK_THROWS_AS(sample_limit_position(law, tiny, 50000, 9), GridTooShort);
}

TEST_CASE("sampler is chunk-deterministic") {
  WLaw law(1.0, 0.5);
  auto a = sample_W(law, 10000, 4);
  auto b = sample_W(law, 10000, 4);
  CHECK((a.array() == b.array()).all());
  // a prefix of a longer run matches (chunked streams)
  auto c = sample_W(law, 4096 * 2 + 100, 4);
  for (Eigen::Index i = 0; i < 8192; ++i) CHECK(a[i] == c[i]);
}
