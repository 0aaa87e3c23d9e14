#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "exitflow/scale.hpp"

using namespace exitflow;

TEST_CASE("scale and speed densities, logistic closed form") {
  auto m = builtin_model("logistic_feller");
  const double eps = 0.1, xr = 0.5;
  // H(x) = (2/eps) (x - x^2/2) - H(x_ref)
  auto H = [&](double x) { return 20.0 * (x - 0.5 * x * x); };
  for (double x : {0.1, 0.5, 1.0, 1.8}) {
    const double exact = std::exp(-(H(x) - H(xr)));
    CHECK(scale_density(m, eps, x, xr) == doctest::Approx(exact).epsilon(1e-8));
    CHECK(speed_density(m, eps, x, xr) ==
          doctest::Approx(1.0 / (eps * x * exact)).epsilon(1e-8));
  }
  CHECK(scale_function(m, eps, xr, xr) == 0.0);
  CHECK(scale_density(m, eps, xr, xr) == doctest::Approx(1.0));
}

TEST_CASE("boundary classification of the catalog") {
  auto lf = builtin_model("logistic_feller");
  auto [l0, r0] = classify_boundaries(lf, 0.1);
  CHECK(l0.attracting);
  CHECK(l0.feller == FellerClass::Exit);
  CHECK_FALSE(r0.attracting);
  CHECK(r0.feller == FellerClass::Entrance);
  CHECK_FALSE(l0.conjecture_regime);
  CHECK_FALSE(r0.conjecture_regime);

  auto kfw = builtin_model("kimura_fisher_wright");
  auto [lk, rk] = classify_boundaries(kfw, 0.1);
  CHECK(lk.feller == FellerClass::Exit);
  CHECK(rk.feller == FellerClass::Exit);  // x_c = 1 is attainable

  // driftless unit-diffusion reference: 0 regular, infinity natural
  auto bm = builtin_model("custom", {}, {{"drift_form", "zero"},
                                         {"diffusion_form", "constant"}});
  auto [lb, rb] = classify_boundaries(bm, 1.0);
  CHECK(lb.feller == FellerClass::Regular);
  CHECK(rb.feller == FellerClass::Natural);
}

TEST_CASE("hitting probability against an independent quadrature value") {
  auto m = builtin_model("logistic_feller");
  // frozen oracle: (s(x0)-s(0)) / (s(M)-s(0)) for eps=0.1, x0=0.05, M=2
  CHECK(hitting_probability(m, 0.1, 0.05, 2.0) ==
        doctest::Approx(0.2998643709057079).epsilon(1e-6));
  CHECK_THROWS(hitting_probability(m, 0.1, -1.0, 2.0));
  CHECK_THROWS(hitting_probability(m, 0.1, 2.0, 0.5));

  // geometric-brownian-like model: s(0+) = -infinity
  auto gbm = builtin_model("custom", {}, {{"drift_form", "linear"},
                                          {"diffusion_form", "quadratic"}});
  CHECK_THROWS_AS(hitting_probability(gbm, 0.1, 0.5, 2.0), ScaleDiverges);
}

TEST_CASE("max exceedance probability and trend") {
  auto m = builtin_model("logistic_feller");
  auto r = max_exceedance_probability(m, 0.1, 0.05, 2.0);
  CHECK(r.hypotheses_hold);
  CHECK(r.probability == doctest::Approx(0.2998643709057079).epsilon(1e-6));
  REQUIRE(r.trend.size() == 3);
  CHECK(r.trend[0].second > r.trend[1].second);
  CHECK(r.trend[1].second > r.trend[2].second);

  auto gbm = builtin_model("custom", {}, {{"drift_form", "linear"},
                                          {"diffusion_form", "quadratic"}});
  auto bad = max_exceedance_probability(gbm, 0.1, 0.5, 2.0);
  CHECK_FALSE(bad.hypotheses_hold);
  CHECK(std::isnan(bad.probability));
}

TEST_CASE("scale profile export") {
  auto m = builtin_model("logistic_feller");
  auto p = build_scale_profile(m, 0.1, 41);
  CHECK(p.x.size() == 41);
  CHECK(p.left.feller == FellerClass::Exit);
  const std::string path = "scale_profile_test.csv";
  write_scale_profile_csv(path, p);
  std::remove(path.c_str());
  const std::string j = scale_profile_verdict_json(p);
  CHECK(j.find("\"exit\"") != std::string::npos);
  CHECK(j.find("\"entrance\"") != std::string::npos);
}
