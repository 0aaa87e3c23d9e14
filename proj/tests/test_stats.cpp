#include <doctest.h>

#include <cmath>

#include "exitflow/errors.hpp"
#include "exitflow/rng.hpp"
#include "exitflow/stats.hpp"

using namespace exitflow;

namespace {
Eigen::VectorXd uniform_sample(Eigen::Index n, std::uint64_t stream) {
  Rng rng(2024, stream);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform();
  return v;
}
}  // namespace

TEST_CASE("distances on degenerate samples") {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(5);
  Eigen::VectorXd o = Eigen::VectorXd::Ones(5);
  EmpiricalLaw a(z), b(o);
  CHECK(ks_distance(a, b) == doctest::Approx(1.0));
  CHECK(wasserstein1(a, b) == doctest::Approx(1.0));
  CHECK(ks_distance(a, a) == 0.0);
  CHECK(wasserstein1(b, b) == 0.0);
  CHECK(a.atom_at_zero() == 1.0);
  CHECK(b.atom_at_zero() == 0.0);
}

TEST_CASE("two uniform samples sit inside the 99% KS band") {
  const Eigen::Index n = 10000;
  EmpiricalLaw a(uniform_sample(n, 1)), b(uniform_sample(n, 2));
  // c(0.01) sqrt((n1+n2)/(n1 n2)), c(0.01) = 1.628
  const double band = 1.628 * std::sqrt(2.0 / double(n));
  CHECK(ks_distance(a, b) < band);
  CHECK(wasserstein1(a, b) < 0.02);
}

TEST_CASE("metric axioms on sampled triples") {
  EmpiricalLaw a(uniform_sample(400, 3));
  Eigen::VectorXd shifted = uniform_sample(400, 4).array() + 0.25;
  Eigen::VectorXd scaled = uniform_sample(400, 5).array() * 2.0;
  EmpiricalLaw b(shifted), c(scaled);
  for (auto dist : {ks_distance, wasserstein1}) {
    CHECK(dist(a, b) == doctest::Approx(dist(b, a)));
    CHECK(dist(a, c) <= dist(a, b) + dist(b, c) + 1e-12);
    CHECK(dist(a, b) >= 0.0);
  }
}

TEST_CASE("weights, cdf and quantiles") {
  Eigen::VectorXd v(4), w(4);
  v << 3.0, 1.0, 2.0, 0.0;
  w << 1.0, 1.0, 1.0, 1.0;
  EmpiricalLaw law(v, w);
  CHECK(law.values()[0] == 0.0);  // sorted
  CHECK(law.cdf(1.5) == doctest::Approx(0.5));
  CHECK(law.cdf(-1.0) == 0.0);
  CHECK(law.cdf(3.0) == 1.0);
  CHECK(law.quantile(0.5) == 1.0);
  CHECK(law.mean() == doctest::Approx(1.5));
  CHECK(law.variance() == doctest::Approx(1.25));

  Eigen::VectorXd w2(4);
  w2 << 0.0, 0.0, 1.0, 0.0;  // all mass on the value 2
  EmpiricalLaw point(v, w2);
  CHECK(point.mean() == doctest::Approx(2.0));
  CHECK(point.quantile(0.99) == 2.0);

  CHECK_THROWS_AS(EmpiricalLaw(Eigen::VectorXd()), EmptySample);
  Eigen::VectorXd wz = Eigen::VectorXd::Zero(4);
  CHECK_THROWS_AS(EmpiricalLaw(v, wz), EmptySample);
}

TEST_CASE("w1 equals the mean shift for translated samples") {
  Eigen::VectorXd u = uniform_sample(5000, 8);
  Eigen::VectorXd shifted = u.array() + 0.5;
  EmpiricalLaw a(u), b(shifted);
  CHECK(wasserstein1(a, b) == doctest::Approx(0.5).epsilon(1e-9));
}
