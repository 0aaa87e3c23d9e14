#include <doctest.h>

#include <cmath>

#include "exitflow/model.hpp"

using namespace exitflow;

TEST_CASE("catalog models pass the assumption checks") {
  for (const char* name : {"kimura_fisher_wright", "logistic_feller",
                           "gilpin_ayala_pow", "holling"}) {
    auto m = builtin_model(name);
    auto rep = validate_assumptions(m);
    CHECK_MESSAGE(rep.usable, name, ": ", rep.summary());
  }
}

TEST_CASE("unknown and ill-parametrized models are rejected") {
  CHECK_THROWS_AS(builtin_model("verhulst"), UnknownModel);
  CHECK_THROWS_AS(builtin_model("gilpin_ayala_pow", {{"theta", -1.0}}),
                  BadParameter);
  CHECK_THROWS_AS(builtin_model("holling", {{"beta", -0.5}}), BadParameter);
  CHECK_THROWS_AS(builtin_model("kimura_fisher_wright", {{"x_c", 2.0}}),
                  BadParameter);
}

TEST_CASE("zero drift fails the repulsivity assumption") {
  auto m = builtin_model("custom", {}, {{"drift_form", "zero"}});
  auto rep = validate_assumptions(m);
  CHECK_FALSE(rep.usable);
}

TEST_CASE("holling effective gamma") {
  // n == 1 folds the interaction term into the linearization
  auto m1 = builtin_model("holling", {{"gamma", 2.0}, {"beta", 0.25}, {"n", 1.0}});
  CHECK(m1.gamma == doctest::Approx(1.5));
  auto m2 = builtin_model("holling", {{"gamma", 2.0}, {"beta", 0.25}, {"n", 2.0}});
  CHECK(m2.gamma == doctest::Approx(2.0));
  CHECK(validate_assumptions(m1).usable);
  CHECK(validate_assumptions(m2).usable);
  // stable root shifted below the carrying capacity when beta > 0
  REQUIRE(m2.x_c.has_value());
  CHECK(*m2.x_c < 1.0);
  CHECK(std::abs(m2.mu(*m2.x_c)) < 1e-10);
}

TEST_CASE("json model spec with consistent and conflicting overrides") {
  const std::string ok = R"({"name":"logistic_feller",
    "params":{"gamma":2.0},"overrides":{"gamma":2.0}})";
  auto m = model_from_json_text(ok);
  CHECK(m.gamma == doctest::Approx(2.0));

  const std::string bad = R"({"name":"logistic_feller",
    "params":{"gamma":2.0},"overrides":{"gamma":3.0}})";
  CHECK_THROWS_AS(model_from_json_text(bad), BadParameter);
}

TEST_CASE("model hash is stable and parameter-sensitive") {
  auto a = builtin_model("logistic_feller");
  auto b = builtin_model("logistic_feller");
  auto c = builtin_model("logistic_feller", {{"gamma", 2.0}});
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
  CHECK(a.hash_hex().size() == 16);
}
