#include <doctest.h>

#include "mflab/config.hpp"

using namespace mflab;

TEST_CASE("space, generator, kernel and density parsing") {
    Json j = Json::parse(R"({
      "space": {"d": 2, "nu": [1.0, 2.0]},
      "generator": {"q": [[-1.0, 1.0], [0.5, -0.5]]},
      "kernel": {"family": "constant", "lam": [[0.0, 0.4], [0.7, 0.0]]},
      "rho0": [0.4, 0.3]
    })");
    FiniteSpace sp = parse_space(j["space"]);
    CHECK(sp.d == 2);
    RateGenerator g = parse_generator(j["generator"], sp);
    CHECK(g.q(0, 1) == 1.0);
    auto kern = parse_kernel(j["kernel"], sp);
    CHECK(kern->eval(Vec::Zero(2)).lam(1, 0) == 0.7);
    Density rho = parse_density(j["rho0"], sp);
    CHECK(rho.mass() == doctest::Approx(1.0));
}

TEST_CASE("schema violations raise invalid_argument") {
    FiniteSpace sp = FiniteSpace::uniform(2);
    CHECK_THROWS_AS(parse_space(Json::parse(R"({"d": 2, "nu": [1.0]})")),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_kernel(Json::parse(R"({"family": "nope"})"), sp),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        parse_kernel(Json::parse(R"({"family": "constant", "lam": [[0.0], [0.0]]})"), sp),
        std::invalid_argument);
    CHECK_THROWS_AS(parse_density(Json::parse("[0.0, 0.0]"), sp), std::invalid_argument);
}

TEST_CASE("two/three-body and parametrized families parse with constants") {
    FiniteSpace sp = FiniteSpace::uniform(2);
    Json two = Json::parse(R"({
      "family": "two_three_body",
      "gamma1": [0,0,0,0.4, 0,0.9,0,0],
      "c1": 1.0,
      "constants": {"M_lambda": 1.0, "theta": 2.0}
    })");
    auto kern = parse_kernel(two, sp);
    CHECK(kern->constants.M_lambda.has_value());
    CHECK(*kern->constants.theta == 2.0);

    Json par = Json::parse(R"({
      "family": "parametrized",
      "k": 1,
      "kappa": [1.0, -0.5, -0.3, 0.8],
      "lambda": {"form": "logistic", "coeffs": [0.2, 1.5, 2.0]},
      "P": [[0.0, 1.0], [1.0, 0.0]],
      "m1": 2.0, "m2": 0.75, "m3": 1.125
    })");
    auto pk = parse_kernel(par, sp);
    Vec m(2);
    m << 0.5, 0.5;
    JumpKernel k = pk->eval(m);
    CHECK(k.lam(0, 1) > 0.0);
    CHECK(k.lam(0, 0) == 0.0);
    CHECK(k.j_norm() <= 2.0 + 1e-12);  // logistic level caps the intensity

    CHECK_THROWS_AS(
        parse_kernel(Json::parse(R"({"family": "parametrized", "k": 1,
          "kappa": [1,0,0,1], "lambda": {"form": "bogus", "coeffs": [1]},
          "P": [[0,1],[1,0]]})"),
                     sp),
        std::invalid_argument);
}

TEST_CASE("intensity library forms are clamped and bounded") {
    FiniteSpace sp = FiniteSpace::uniform(2);
    auto make = [&sp](const std::string& form, const std::vector<double>& coeffs) {
        Json j;
        j["family"] = "parametrized";
        j["k"] = 1;
        j["kappa"] = {1.0, 1.0, 1.0, 1.0};
        j["lambda"] = {{"form", form}, {"coeffs", coeffs}};
        j["P"] = {{0.0, 1.0}, {1.0, 0.0}};
        return parse_kernel(j, sp);
    };
    Vec hi(2), lo(2);
    hi << 1.0, 0.0;
    lo << 0.0, 1.0;
    // affine-clamped: last coefficient is the cap, output stays in [0, cap]
    auto ac = make("affine-clamped", {-5.0, 1.0, 0.8});
    CHECK(ac->eval(hi).lam(0, 1) == 0.0);  // clamped below
    auto ac2 = make("affine-clamped", {5.0, 1.0, 0.8});
    CHECK(ac2->eval(hi).lam(0, 1) == doctest::Approx(0.8));  // clamped above
    // exp-neg decreases in the signal and never exceeds its level
    auto en = make("exp-neg", {0.0, 2.0, 1.5});
    CHECK(en->eval(lo).lam(0, 1) <= 1.5 + 1e-12);
    CHECK(en->eval(hi).lam(0, 1) <= en->eval(lo).lam(0, 1) + 1e-12);
}

TEST_CASE("config hash is stable and content-sensitive") {
    Json a = Json::parse(R"({"x": 1, "y": [1, 2]})");
    Json b = Json::parse(R"({"x": 1, "y": [1, 2]})");
    Json c = Json::parse(R"({"x": 1, "y": [1, 3]})");
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("finite-value guard rejects NaN and Inf") {
    Json ok = Json::parse(R"({"a": [1.0, 2.0], "b": {"c": 3.0}})");
    CHECK_NOTHROW(require_finite(ok, "ok"));
    Json bad = ok;
    bad["b"]["c"] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(require_finite(bad, "bad"), std::runtime_error);
}
