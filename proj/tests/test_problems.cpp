#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "fcma/problems.hpp"
#include "fcma/rr.hpp"

using namespace fcma;
using Catch::Approx;

namespace {

// central-difference check of every component gradient at w
double fd_max_rel_error(const FiniteSumProblem& prob, const ParameterVector& w,
                        double h = 1e-6) {
  double worst = 0;
  for (int i = 0; i < prob.component_count(); ++i) {
    const ParameterVector g = prob.component_gradient(i, w);
    const double scale = std::max(1.0, l2_norm(g));
    for (int c = 0; c < prob.dimension(); ++c) {
      ParameterVector wp = w, wm = w;
      wp[c] += h;
      wm[c] -= h;
      const double fd =
          (prob.component_value(i, wp) - prob.component_value(i, wm)) /
          (2.0 * h);
      worst = std::max(worst, std::abs(fd - g[c]) / scale);
    }
  }
  return worst;
}

ParameterVector random_point(int n, Rng& rng, double scale) {
  std::normal_distribution<double> gauss(0.0, scale);
  ParameterVector w(n);
  for (double& x : w) x = gauss(rng);
  return w;
}

}  // namespace

TEST_CASE("quadratic pair basics") {
  auto pair = make_quadratic_pair();
  CHECK(pair->component_count() == 2);
  CHECK(pair->dimension() == 1);
  CHECK(pair->component_value(0, {0.0}) == Approx(0.5));
  CHECK(pair->component_value(1, {0.0}) == Approx(0.5));
  CHECK(pair->component_gradient(0, {0.0})[0] == Approx(-1.0));
  CHECK(pair->component_gradient(1, {0.0})[0] == Approx(1.0));
  REQUIRE(pair->known_optimum().has_value());
  CHECK((*pair->known_optimum())[0] == Approx(0.0).margin(1e-14));
}

TEST_CASE("quadratic sum optimum is stationary and minimal") {
  auto prob = make_quadratic_sum(15, 6, 42, 100.0);
  const ParameterVector w_star = *prob->known_optimum();
  EvalCounters c;
  CHECK(l2_norm(full_gradient(*prob, w_star, c)) < 1e-9);
  const double f_star = full_value(*prob, w_star, c);
  Rng rng(10);
  for (int t = 0; t < 100; ++t) {
    const ParameterVector w = random_point(6, rng, 1.0);
    CHECK(full_value(*prob, w, c) >= f_star);
  }
}

TEST_CASE("quadratic sum is seed deterministic") {
  auto a = make_quadratic_sum(5, 4, 7, 10.0);
  auto b = make_quadratic_sum(5, 4, 7, 10.0);
  const ParameterVector w = {0.1, 0.7, -0.3, 0.9};
  for (int i = 0; i < 5; ++i) {
    CHECK(a->component_value(i, w) == b->component_value(i, w));
    CHECK(a->component_gradient(i, w) == b->component_gradient(i, w));
  }
  CHECK_THROWS_AS(make_quadratic_sum(0, 3, 1, 10.0), ConfigError);
  CHECK_THROWS_AS(make_quadratic_sum(3, 3, 1, 0.5), ConfigError);
}

TEST_CASE("quadratic sum analysis constants are populated and positive") {
  auto prob = make_quadratic_sum(10, 5, 11, 10.0);
  CHECK_FALSE(prob->constants().has_value());
  const ProblemConstants& pc =
      prob->compute_constants(ParameterVector(5, 0.0), 10.0, 0.05 * 10 * 10.0);
  CHECK(pc.L >= 1.0);
  CHECK(pc.L_f > 0);
  CHECK(pc.M == 10.0);
  CHECK(pc.C == 1.0);
  CHECK(pc.D == 10.0);
  CHECK(prob->constants().has_value());
}

TEST_CASE("gradient finite-difference checks across all problems") {
  Rng rng(2024);
  auto quad = make_quadratic_sum(8, 5, 3, 30.0);
  auto logi = make_logistic(5, 4, 50, 0.05, 1e-2, 3);
  auto mlp = make_mlp(4, 6, 3);
  auto rosen = make_rosenbrock_sum(3);
  for (int t = 0; t < 5; ++t) {
    CHECK(fd_max_rel_error(*quad, random_point(5, rng, 1.0)) < 1e-5);
    CHECK(fd_max_rel_error(*logi, random_point(4, rng, 0.8)) < 1e-5);
    CHECK(fd_max_rel_error(*mlp, random_point(mlp->dimension(), rng, 0.6)) <
          1e-5);
    CHECK(fd_max_rel_error(*rosen, random_point(6, rng, 0.7)) < 1e-5);
  }
}

TEST_CASE("logistic regression behaves like a classifier") {
  auto prob = make_logistic(4, 3, 80, 0.0, 1e-2, 5);
  // heavy ridge shrinks the optimum toward zero
  auto heavy = make_logistic(4, 3, 80, 0.0, 1e3, 5);
  CHECK(l2_norm(heavy->reference_optimum(1e-8)) < 0.1);
  // noiseless planted separator is almost perfectly classified
  const ParameterVector& w_star = prob->reference_optimum(1e-8);
  CHECK(prob->accuracy(w_star) >= 0.95);
  // reference optimum is stationary
  EvalCounters c;
  CHECK(l2_norm(full_gradient(*prob, w_star, c)) <= 1e-8);
  CHECK(prob->lipschitz_bound() > 0);
  CHECK_THROWS_AS(make_logistic(3, 3, 80, 0.0, 1e-2, 5), ConfigError);
}

TEST_CASE("mlp with identical hidden units has identical per-unit gradients") {
  auto mlp = make_mlp(3, 4, 9);
  const int h = 3;
  const int n = mlp->dimension();
  REQUIRE(n == 4 * h + 1);
  // identical rows in W1, identical b1 and w2 entries
  ParameterVector w(n, 0.0);
  for (int u = 0; u < h; ++u) {
    w[2 * u] = 0.3;
    w[2 * u + 1] = -0.2;
    w[2 * h + u] = 0.1;       // b1
    w[2 * h + h + u] = 0.7;   // w2
  }
  w[n - 1] = 0.05;  // b2
  for (int i = 0; i < mlp->component_count(); ++i) {
    const ParameterVector g = mlp->component_gradient(i, w);
    for (int u = 1; u < h; ++u) {
      CHECK(g[2 * u] == Approx(g[0]).margin(1e-14));
      CHECK(g[2 * u + 1] == Approx(g[1]).margin(1e-14));
      CHECK(g[2 * h + u] == Approx(g[2 * h]).margin(1e-14));
      CHECK(g[2 * h + h + u] == Approx(g[2 * h + h]).margin(1e-14));
    }
  }
}

TEST_CASE("rosenbrock sum examples") {
  auto prob = make_rosenbrock_sum(3);
  CHECK(prob->dimension() == 6);
  const ParameterVector ones(6, 1.0);
  EvalCounters c;
  CHECK(full_value(*prob, ones, c) == Approx(0.0).margin(1e-15));
  CHECK(l2_norm(full_gradient(*prob, ones, c)) == Approx(0.0).margin(1e-14));
  // the classic value at the origin, once per pair
  const ParameterVector zeros(6, 0.0);
  CHECK(prob->component_value(0, zeros) == Approx(1.0));
  CHECK(full_value(*prob, zeros, c) == Approx(3.0));
  // components only touch their own coordinate pair
  const ParameterVector g = prob->component_gradient(1, {1, 2, 3, 4, 5, 6});
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 0.0);
  CHECK(g[4] == 0.0);
  CHECK(g[5] == 0.0);
  CHECK((g[2] != 0.0 || g[3] != 0.0));
}

TEST_CASE("mlp dataset is balanced and seed deterministic") {
  auto a = make_mlp(4, 5, 21);
  auto b = make_mlp(4, 5, 21);
  Rng rng(1);
  const ParameterVector w = random_point(a->dimension(), rng, 0.4);
  for (int i = 0; i < a->component_count(); ++i)
    CHECK(a->component_value(i, w) == b->component_value(i, w));
  CHECK_THROWS_AS(make_mlp(0, 5, 1), ConfigError);
}
