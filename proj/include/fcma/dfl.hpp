#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "fcma/core.hpp"
#include "fcma/rr.hpp"

namespace fcma {

enum class PsiScaleMode {
  kLiteral,   // psi(w) = sum of the first p batch losses
  kRescaled,  // psi(w) = (P/p) * that sum, scale-matched to f
};

/// Cheap partial-sum model of f over the first p indices of the epoch's
/// permutation, used to price line-search trial points.
class SurrogateModel {
 public:
  SurrogateModel(const FiniteSumProblem& problem, const Permutation& permutation,
                 int p, PsiScaleMode mode)
      : problem_(problem), mode_(mode) {
    if (p < 1 || p > problem.component_count())
      throw ConfigError("surrogate batch count p out of range: " +
                        std::to_string(p));
    indices_.assign(permutation.begin(), permutation.begin() + p);
  }

  double evaluate(const ParameterVector& w, EvalCounters& counters) const {
    double sum = 0;
    for (int h : indices_) sum += problem_.component_value(h, w);
    counters.component_f_evals += indices_.size();
    if (mode_ == PsiScaleMode::kRescaled)
      sum *= static_cast<double>(problem_.component_count()) /
             static_cast<double>(indices_.size());
    return sum;
  }

  int batch_count() const { return static_cast<int>(indices_.size()); }
  PsiScaleMode scale_mode() const { return mode_; }

 private:
  const FiniteSumProblem& problem_;
  std::vector<int> indices_;
  PsiScaleMode mode_;
};

/// Extrapolation loop exceeded its iteration cap; signals a non-coercive
/// surrogate or a near-zero direction.
class DflCapError : public RunError {
 public:
  using RunError::RunError;
};

struct DflResult {
  double alpha = 0;          // accepted step, or 0 on failure
  double f_out = 0;          // f(w + alpha d) on success, f_tilde on failure
  int loop_iters = 0;        // extrapolation iterations
  int full_evals_used = 0;   // 1 iff the early-failure test fired, else 2
  double f_at_w = 0;         // f(w), computed on entry
};

/// Derivative-free extrapolation line-search along d. Starts from
/// alpha = zeta*eta and grows the trial step by 1/delta while the surrogate
/// keeps satisfying the decrease test; at most two full-objective
/// evaluations are spent. Returns alpha > 0 only when
/// f(w + alpha d) <= f(w) - gamma*alpha*||d||^2 holds on the true objective.
inline DflResult dfl_search(const ParameterVector& w, const ParameterVector& d,
                            double zeta, double f_tilde, double gamma,
                            double delta, double eta, int max_iters,
                            const SurrogateModel& psi,
                            const FiniteSumProblem& problem,
                            EvalCounters& counters) {
  DflResult res;
  double alpha = zeta * eta;
  double f_j = f_tilde;
  const double d_sq = squared_norm(d);

  const double f_w = full_value(problem, w, counters);
  res.f_at_w = f_w;

  if (f_tilde > f_w - gamma * alpha * d_sq) {
    res.alpha = 0;
    res.f_out = f_j;
    res.full_evals_used = 1;
    return res;
  }

  while (true) {
    const double psi_trial =
        psi.evaluate(add_scaled(w, alpha / delta, d), counters);
    if (!std::isfinite(psi_trial))
      throw RunError("dfl_search: non-finite surrogate value");
    if (psi_trial > std::min(f_w - gamma * alpha * d_sq, f_j)) break;
    f_j = psi_trial;
    res.loop_iters += 1;
    alpha = alpha / delta;
    if (res.loop_iters > max_iters)
      throw DflCapError(
          "dfl_search: extrapolation exceeded " + std::to_string(max_iters) +
          " iterations (non-coercive surrogate or near-zero direction)");
  }

  const double f_trial = full_value(problem, add_scaled(w, alpha, d), counters);
  res.full_evals_used = 2;
  if (f_trial <= f_w - gamma * alpha * d_sq) {
    res.alpha = alpha;
    res.f_out = f_trial;
  } else {
    res.alpha = 0;
    res.f_out = f_tilde;  // f_0
  }
  return res;
}

}  // namespace fcma
