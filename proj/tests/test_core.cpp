#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "fcma/core.hpp"
#include "fcma/problems.hpp"

using namespace fcma;
using Catch::Approx;

namespace {

struct NanProblem : FiniteSumProblem {
  int component_count() const override { return 2; }
  int dimension() const override { return 1; }
  double component_value(int i, const ParameterVector&) const override {
    return i == 1 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
  }
  ParameterVector component_gradient(int i, const ParameterVector&) const override {
    return {i == 1 ? std::numeric_limits<double>::infinity() : 0.0};
  }
};

}  // namespace

TEST_CASE("full_value sums components") {
  auto pair = make_quadratic_pair();
  EvalCounters c;
  CHECK(full_value(*pair, {0.0}, c) == Approx(1.0));
  CHECK(c.full_f_evals == 1);
  CHECK(c.component_f_evals == 2);

  ConstantProblem zeros({0, 0, 0}, 1);
  CHECK(full_value(zeros, {3.0}, c) == 0.0);
}

TEST_CASE("full_value at the known optimum matches the normal-equations oracle") {
  auto prob = make_quadratic_sum(5, 3, 99, 20.0);
  const ParameterVector w_star = *prob->known_optimum();
  EvalCounters c;
  const double f_star = full_value(*prob, w_star, c);
  // independent check: the optimum value is a stationary minimum
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 0.3);
  for (int t = 0; t < 50; ++t) {
    ParameterVector w = w_star;
    for (double& x : w) x += gauss(rng);
    CHECK(full_value(*prob, w, c) >= f_star - 1e-12);
  }
  CHECK(l2_norm(full_gradient(*prob, w_star, c)) < 1e-9);
}

TEST_CASE("full_gradient examples") {
  auto pair = make_quadratic_pair();
  EvalCounters c;
  CHECK(full_gradient(*pair, {0.0}, c)[0] == Approx(0.0).margin(1e-15));
  CHECK(full_gradient(*pair, {1.0}, c)[0] == Approx(2.0));
  CHECK(c.component_grad_evals == 4);

  ConstantProblem flat({1, 2}, 3);
  const ParameterVector g = full_gradient(flat, {1, 2, 3}, c);
  for (double x : g) CHECK(x == 0.0);
}

TEST_CASE("non-finite evaluations abort with component index") {
  NanProblem bad;
  EvalCounters c;
  CHECK_THROWS_WITH(full_value(bad, {0.0}, c),
                    Catch::Matchers::ContainsSubstring("component 1"));
  CHECK_THROWS_AS(full_gradient(bad, {0.0}, c), RunError);
}

TEST_CASE("clip_gradient examples") {
  CHECK(clip_gradient({0.3, 0.4}, 1.0) == ParameterVector{0.3, 0.4});
  const ParameterVector clipped = clip_gradient({3.0, 4.0}, 1.0);
  CHECK(clipped[0] == Approx(0.6));
  CHECK(clipped[1] == Approx(0.8));
  CHECK(clip_gradient({3.0, 4.0}, std::nullopt) == ParameterVector{3.0, 4.0});
  CHECK(clip_gradient({0.0, 0.0}, 1.0) == ParameterVector{0.0, 0.0});
}

TEST_CASE("clip_gradient properties") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.1, 3.0);
  for (int t = 0; t < 200; ++t) {
    ParameterVector g(1 + t % 5);
    for (double& x : g) x = 2.0 * gauss(rng);
    const double max_norm = unif(rng);
    const ParameterVector c1 = clip_gradient(g, max_norm);
    const ParameterVector c2 = clip_gradient(c1, max_norm);
    // idempotent
    for (std::size_t i = 0; i < g.size(); ++i)
      CHECK(c2[i] == Approx(c1[i]).margin(1e-15));
    // never increases the norm
    CHECK(l2_norm(c1) <= l2_norm(g) * (1 + 1e-12));
    CHECK(l2_norm(c1) <= max_norm * (1 + 1e-12));
    // direction preserved
    const double gn = l2_norm(g), cn = l2_norm(c1);
    if (gn > 1e-12 && cn > 1e-12) {
      double dot = 0;
      for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * c1[i];
      CHECK(dot / (gn * cn) == Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("l2_norm") {
  CHECK(l2_norm({3, 4}) == Approx(5.0));
  CHECK(l2_norm({0, 0, 0}) == 0.0);
  CHECK(l2_norm({1, 1, 1, 1}) == Approx(2.0));
}

TEST_CASE("full_value equals component sum to 1e-12 relative") {
  auto prob = make_quadratic_sum(20, 4, 5, 50.0);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  for (int t = 0; t < 20; ++t) {
    ParameterVector w(4);
    for (double& x : w) x = gauss(rng);
    EvalCounters c;
    const double fv = full_value(*prob, w, c);
    double sum = 0;
    for (int i = 0; i < 20; ++i) sum += prob->component_value(i, w);
    CHECK(fv == Approx(sum).epsilon(1e-12));
  }
}
