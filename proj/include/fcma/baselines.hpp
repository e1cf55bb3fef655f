#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>

#include "fcma/core.hpp"
#include "fcma/rr.hpp"
#include "fcma/trace.hpp"

namespace fcma {

enum class BaselineKind { kSgd, kPlainRr, kAdam };

enum class LrDecay { kNone, kInverseK };

struct BaselineConfig {
  BaselineKind kind = BaselineKind::kSgd;
  double learning_rate = 0.01;
  LrDecay decay = LrDecay::kNone;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int max_epochs = 250;
  std::optional<double> clip_norm;

  void validate() const {
    if (!(learning_rate > 0)) throw ConfigError("learning_rate must be > 0");
    if (!(adam_beta1 > 0 && adam_beta1 < 1) ||
        !(adam_beta2 > 0 && adam_beta2 < 1))
      throw ConfigError("adam betas must be in (0,1)");
    if (!(adam_eps > 0)) throw ConfigError("adam_eps must be > 0");
    if (max_epochs < 0) throw ConfigError("max_epochs must be >= 0");
    if (clip_norm && !(*clip_norm > 0))
      throw ConfigError("clip_norm must be > 0");
  }
};

struct BaselineRunResult {
  Trace trace;
  FinalReport report;
};

namespace detail {

// Running-loss divergence check; baselines never evaluate the full
// objective mid-run, so the per-epoch batch-loss sum stands in for f(w).
inline bool diverged(double f_estimate, double f_w0) {
  return !(f_estimate <= 1e6 * std::max(f_w0, 1.0));
}

inline void finish_report(const FiniteSumProblem& problem, FinalReport& rep,
                          const ParameterVector& w, int epochs,
                          StopReason reason, EvalCounters& counters) {
  rep.w = w;
  rep.final_f = full_value(problem, w, counters);
  rep.final_grad_norm = l2_norm(full_gradient(problem, w, counters));
  rep.epochs = epochs;
  rep.stop_reason = reason;
  rep.counters = counters;
}

inline void fill_dense(const FiniteSumProblem& problem, TraceRecord& rec,
                       const ParameterVector& w_epoch_start) {
  EvalCounters scratch;
  rec.f_true = full_value(problem, w_epoch_start, scratch);
  rec.grad_norm = l2_norm(full_gradient(problem, w_epoch_start, scratch));
}

}  // namespace detail

/// Per-batch SGD over shuffled epochs: w <- w - a * clip(grad f_i(w)).
/// Same inner loop as a random-reshuffling epoch; kept as an explicit
/// transcription so the two stay independently testable.
inline BaselineRunResult sgd_run(const FiniteSumProblem& problem,
                                 const BaselineConfig& cfg,
                                 const ParameterVector& w0, std::uint64_t seed,
                                 bool dense_trace = false) {
  cfg.validate();
  BaselineRunResult out;
  const int P = problem.component_count();
  ParameterVector w = w0;
  Rng rng(seed);
  EvalCounters counters;
  const double f_w0 = full_value(problem, w0, counters);
  StopReason reason = StopReason::kMaxEpochs;
  int k = 0;
  for (; k < cfg.max_epochs; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    const ParameterVector w_start = w;
    const double lr = cfg.decay == LrDecay::kInverseK
                          ? cfg.learning_rate / (1.0 + k)
                          : cfg.learning_rate;
    const Permutation perm = sample_permutation(rng, P);
    double f_tilde = 0;
    for (int i = 0; i < P; ++i) {
      const int h = perm[i];
      const double loss = problem.component_value(h, w);
      if (!std::isfinite(loss))
        throw RunError("sgd: non-finite loss at epoch " + std::to_string(k));
      f_tilde += loss;
      const ParameterVector g =
          clip_gradient(problem.component_gradient(h, w), cfg.clip_norm);
      for (std::size_t c = 0; c < w.size(); ++c) w[c] -= lr * g[c];
      if (!all_finite(w))
        throw RunError("sgd: non-finite iterate at epoch " + std::to_string(k));
    }
    counters.component_f_evals += static_cast<std::uint64_t>(P);
    counters.component_grad_evals += static_cast<std::uint64_t>(P);

    TraceRecord rec;
    rec.epoch = k;
    rec.f_tilde = f_tilde;
    rec.alpha = lr;
    rec.full_f_evals = counters.full_f_evals;
    rec.component_grad_evals = counters.component_grad_evals;
    if (dense_trace) detail::fill_dense(problem, rec, w_start);
    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    out.trace.push_back(std::move(rec));
    if (detail::diverged(f_tilde, f_w0)) {
      reason = StopReason::kDiverged;
      ++k;
      break;
    }
  }
  detail::finish_report(problem, out.report, w, k, reason, counters);
  return out;
}

/// Plain random reshuffling with constant (or 1/(1+k)) step: accept the
/// epoch's end point unconditionally.
inline BaselineRunResult plain_rr_run(const FiniteSumProblem& problem,
                                      const BaselineConfig& cfg,
                                      const ParameterVector& w0,
                                      std::uint64_t seed,
                                      bool dense_trace = false) {
  cfg.validate();
  BaselineRunResult out;
  const int P = problem.component_count();
  ParameterVector w = w0;
  Rng rng(seed);
  EvalCounters counters;
  const double f_w0 = full_value(problem, w0, counters);
  StopReason reason = StopReason::kMaxEpochs;
  int k = 0;
  for (; k < cfg.max_epochs; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    const ParameterVector w_start = w;
    const double zeta = cfg.decay == LrDecay::kInverseK
                            ? cfg.learning_rate / (1.0 + k)
                            : cfg.learning_rate;
    const Permutation perm = sample_permutation(rng, P);
    const RrOutcome rr =
        rr_epoch(problem, w, zeta, perm, cfg.clip_norm, counters);
    w = rr.w_tilde;

    TraceRecord rec;
    rec.epoch = k;
    rec.f_tilde = rr.f_tilde;
    rec.alpha = zeta;
    rec.norm_d = l2_norm(rr.direction);
    rec.full_f_evals = counters.full_f_evals;
    rec.component_grad_evals = counters.component_grad_evals;
    if (dense_trace) detail::fill_dense(problem, rec, w_start);
    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    out.trace.push_back(std::move(rec));
    if (detail::diverged(rr.f_tilde, f_w0)) {
      reason = StopReason::kDiverged;
      ++k;
      break;
    }
  }
  detail::finish_report(problem, out.report, w, k, reason, counters);
  return out;
}

/// Per-batch Adam with bias-corrected first and second moment estimates.
inline BaselineRunResult adam_run(const FiniteSumProblem& problem,
                                  const BaselineConfig& cfg,
                                  const ParameterVector& w0,
                                  std::uint64_t seed,
                                  bool dense_trace = false) {
  cfg.validate();
  BaselineRunResult out;
  const int P = problem.component_count();
  ParameterVector w = w0;
  ParameterVector m(w.size(), 0.0), v(w.size(), 0.0);
  Rng rng(seed);
  EvalCounters counters;
  const double f_w0 = full_value(problem, w0, counters);
  StopReason reason = StopReason::kMaxEpochs;
  long t = 0;
  int k = 0;
  for (; k < cfg.max_epochs; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    const ParameterVector w_start = w;
    const Permutation perm = sample_permutation(rng, P);
    double f_tilde = 0;
    for (int i = 0; i < P; ++i) {
      const int h = perm[i];
      const double loss = problem.component_value(h, w);
      if (!std::isfinite(loss))
        throw RunError("adam: non-finite loss at epoch " + std::to_string(k));
      f_tilde += loss;
      const ParameterVector g =
          clip_gradient(problem.component_gradient(h, w), cfg.clip_norm);
      ++t;
      const double bc1 = 1.0 - std::pow(cfg.adam_beta1, t);
      const double bc2 = 1.0 - std::pow(cfg.adam_beta2, t);
      for (std::size_t c = 0; c < w.size(); ++c) {
        m[c] = cfg.adam_beta1 * m[c] + (1.0 - cfg.adam_beta1) * g[c];
        v[c] = cfg.adam_beta2 * v[c] + (1.0 - cfg.adam_beta2) * g[c] * g[c];
        const double m_hat = m[c] / bc1;
        const double v_hat = v[c] / bc2;
        w[c] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
      }
      if (!all_finite(w))
        throw RunError("adam: non-finite iterate at epoch " +
                       std::to_string(k));
    }
    counters.component_f_evals += static_cast<std::uint64_t>(P);
    counters.component_grad_evals += static_cast<std::uint64_t>(P);

    TraceRecord rec;
    rec.epoch = k;
    rec.f_tilde = f_tilde;
    rec.alpha = cfg.learning_rate;
    rec.full_f_evals = counters.full_f_evals;
    rec.component_grad_evals = counters.component_grad_evals;
    if (dense_trace) detail::fill_dense(problem, rec, w_start);
    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    out.trace.push_back(std::move(rec));
    if (detail::diverged(f_tilde, f_w0)) {
      reason = StopReason::kDiverged;
      ++k;
      break;
    }
  }
  detail::finish_report(problem, out.report, w, k, reason, counters);
  return out;
}

}  // namespace fcma
