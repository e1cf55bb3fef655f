#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fcma/core.hpp"

namespace fcma {

using Rng = std::mt19937_64;

/// A bijection on {0..P-1}, produced only by sample_permutation.
using Permutation = std::vector<int>;

/// Uniform random permutation via Fisher-Yates; deterministic given the
/// generator state.
inline Permutation sample_permutation(Rng& rng, int P) {
  Permutation order(P);
  for (int i = 0; i < P; ++i) order[i] = i;
  for (int i = P - 1; i > 0; --i) {
    // modulo draw; bias is negligible for desk-scale P
    const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[i], order[j]);
  }
  return order;
}

struct RrOutcome {
  ParameterVector w_tilde;               // end of the inner trajectory
  ParameterVector direction;             // d = -sum of (clipped) gradients
  double f_tilde = 0;                    // sum of per-batch losses
  Permutation permutation;
  std::vector<double> per_batch_losses;  // in sweep order
};

/// One random-reshuffling epoch: for each component in permutation order,
/// record the batch loss at the current inner iterate, take a step of
/// length zeta along the negative (clipped) component gradient, and
/// accumulate the aggregated direction.
inline RrOutcome rr_epoch(const FiniteSumProblem& problem,
                          const ParameterVector& w, double zeta,
                          const Permutation& permutation,
                          std::optional<double> clip_norm,
                          EvalCounters& counters) {
  const int P = problem.component_count();
  RrOutcome out;
  out.permutation = permutation;
  out.per_batch_losses.reserve(P);
  out.w_tilde = w;
  out.direction.assign(w.size(), 0.0);
  out.f_tilde = 0;

  for (int i = 0; i < P; ++i) {
    const int h = permutation[i];
    const double loss = problem.component_value(h, out.w_tilde);
    if (!std::isfinite(loss))
      throw RunError("rr_epoch: non-finite loss at batch " +
                     std::to_string(i) + " (component " + std::to_string(h) +
                     ")");
    out.per_batch_losses.push_back(loss);
    out.f_tilde += loss;

    ParameterVector g =
        clip_gradient(problem.component_gradient(h, out.w_tilde), clip_norm);
    for (std::size_t c = 0; c < g.size(); ++c) {
      out.direction[c] -= g[c];
      out.w_tilde[c] -= zeta * g[c];
    }
    if (!all_finite(out.w_tilde))
      throw RunError("rr_epoch: non-finite iterate at batch " +
                     std::to_string(i) + " (component " + std::to_string(h) +
                     ")");
  }
  counters.component_f_evals += static_cast<std::uint64_t>(P);
  counters.component_grad_evals += static_cast<std::uint64_t>(P);
  return out;
}

}  // namespace fcma
