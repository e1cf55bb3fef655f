#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "fcma/baselines.hpp"
#include "fcma/problems.hpp"

using namespace fcma;
using Catch::Approx;

namespace {

// single quadratic component f(w) = 1/2 w^2
std::shared_ptr<QuadraticSum> make_single() {
  std::vector<Eigen::MatrixXd> mats(1, Eigen::MatrixXd::Identity(1, 1));
  std::vector<Eigen::VectorXd> centers(1, Eigen::VectorXd::Zero(1));
  return std::make_shared<QuadraticSum>(std::move(mats), std::move(centers));
}

}  // namespace

TEST_CASE("baseline config validation") {
  BaselineConfig cfg;
  cfg.learning_rate = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.learning_rate = 0.01;
  cfg.adam_beta1 = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.adam_beta1 = 0.9;
  cfg.clip_norm = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.clip_norm.reset();
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("sgd one epoch on a single component") {
  auto prob = make_single();
  BaselineConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.max_epochs = 1;
  const BaselineRunResult res = sgd_run(*prob, cfg, {1.0}, 0);
  // one gradient step: w <- 1 - 0.1 * 1
  CHECK(res.report.w[0] == Approx(0.9));
  REQUIRE(res.trace.size() == 1);
  CHECK(*res.trace[0].f_tilde == Approx(0.5));
  CHECK(res.report.stop_reason == StopReason::kMaxEpochs);
}

TEST_CASE("sgd and plain RR produce bitwise identical trajectories") {
  auto prob = make_quadratic_sum(12, 4, 6, 15.0);
  BaselineConfig cfg;
  cfg.learning_rate = 0.02;
  cfg.max_epochs = 40;
  cfg.clip_norm = 5.0;
  const BaselineRunResult a = sgd_run(*prob, cfg, ParameterVector(4, 1.0), 77);
  const BaselineRunResult b =
      plain_rr_run(*prob, cfg, ParameterVector(4, 1.0), 77);
  CHECK(a.report.w == b.report.w);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i)
    CHECK(*a.trace[i].f_tilde == *b.trace[i].f_tilde);
}

TEST_CASE("inverse-k decay divides the step by 1+k") {
  auto prob = make_single();
  BaselineConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.decay = LrDecay::kInverseK;
  cfg.max_epochs = 3;
  const BaselineRunResult res = sgd_run(*prob, cfg, {1.0}, 0);
  REQUIRE(res.trace.size() == 3);
  CHECK(*res.trace[0].alpha == Approx(0.1));
  CHECK(*res.trace[1].alpha == Approx(0.05));
  CHECK(*res.trace[2].alpha == Approx(0.1 / 3.0));
}

TEST_CASE("divergence detector stops a blown-up run") {
  auto pair = make_quadratic_pair();
  BaselineConfig cfg;
  cfg.learning_rate = 1e3;
  cfg.max_epochs = 50;
  const BaselineRunResult res = sgd_run(*pair, cfg, {0.0}, 2);
  CHECK(res.report.stop_reason == StopReason::kDiverged);
  CHECK(res.report.epochs < 50);
}

TEST_CASE("baselines are stationary on a constant problem") {
  ConstantProblem prob({1.0, 2.0}, 3);
  BaselineConfig cfg;
  cfg.max_epochs = 10;
  const ParameterVector w0 = {0.5, -0.5, 2.0};
  CHECK(sgd_run(prob, cfg, w0, 1).report.w == w0);
  CHECK(plain_rr_run(prob, cfg, w0, 1).report.w == w0);
  cfg.kind = BaselineKind::kAdam;
  CHECK(adam_run(prob, cfg, w0, 1).report.w == w0);
}

TEST_CASE("adam first step matches the bias-corrected update") {
  auto prob = make_single();
  BaselineConfig cfg;
  cfg.kind = BaselineKind::kAdam;
  cfg.learning_rate = 0.001;
  cfg.max_epochs = 1;
  const BaselineRunResult res = adam_run(*prob, cfg, {1.0}, 0);
  // g = 1; after bias correction m_hat = v_hat = 1 at t = 1,
  // so the update is lr / (1 + eps)
  const double expect = 1.0 - 0.001 / (1.0 + cfg.adam_eps);
  CHECK(res.report.w[0] == Approx(expect).epsilon(1e-15));
  CHECK(std::abs(1.0 - res.report.w[0]) == Approx(cfg.learning_rate).epsilon(1e-6));
}

TEST_CASE("adam first-step magnitude is lr regardless of gradient scale") {
  // bias correction makes |w1 - w0| ~ lr at t = 1 for any nonzero gradient
  std::vector<Eigen::MatrixXd> mats(1, Eigen::MatrixXd::Constant(1, 1, 50.0));
  std::vector<Eigen::VectorXd> centers(1, Eigen::VectorXd::Zero(1));
  QuadraticSum steep(std::move(mats), std::move(centers));
  BaselineConfig cfg;
  cfg.kind = BaselineKind::kAdam;
  cfg.learning_rate = 0.001;
  cfg.max_epochs = 1;
  const BaselineRunResult res = adam_run(steep, cfg, {1.0}, 0);
  CHECK(std::abs(1.0 - res.report.w[0]) ==
        Approx(cfg.learning_rate).epsilon(1e-6));
}

TEST_CASE("baseline counter accounting") {
  auto prob = make_quadratic_sum(7, 3, 5, 10.0);
  BaselineConfig cfg;
  cfg.learning_rate = 0.001;
  cfg.max_epochs = 9;
  const BaselineRunResult res = sgd_run(*prob, cfg, ParameterVector(3, 0.0), 4);
  // init f(w0) + final f and grad; nothing mid-run
  CHECK(res.report.counters.full_f_evals == 2);
  CHECK(res.report.counters.component_grad_evals ==
        static_cast<std::uint64_t>(9 * 7 + 7));
  for (const TraceRecord& rec : res.trace) {
    CHECK(rec.full_f_evals == 1);  // only the init evaluation so far
    CHECK_FALSE(rec.phi.has_value());
    CHECK_FALSE(rec.zeta.has_value());
    CHECK(rec.branch.empty());
  }
}

TEST_CASE("adam converges on the single quadratic") {
  auto prob = make_single();
  BaselineConfig cfg;
  cfg.kind = BaselineKind::kAdam;
  cfg.learning_rate = 0.05;
  cfg.max_epochs = 500;
  const BaselineRunResult res = adam_run(*prob, cfg, {1.0}, 0);
  CHECK(std::abs(res.report.w[0]) < 1e-3);
}
