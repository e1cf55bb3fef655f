#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "fcma/core.hpp"
#include "fcma/dfl.hpp"
#include "fcma/rr.hpp"
#include "fcma/trace.hpp"

namespace fcma {

/// F-CMA controls plus harness-level knobs. Defaults follow the method's
/// published defaults.
struct HyperParams {
  double zeta0 = 0.05;      // initial learning rate
  double theta = 0.75;      // learning rate decrease factor
  double tau = 0.01;        // controls the norm of the direction
  double gamma = 0.01;      // sufficient-decrease factor
  double delta = 0.90;      // step-size increase factor within DFL
  double eta = 0.50;        // learning-rate scaling before DFL
  double alpha_min = 1e-10; // floor for zeta when the small-step rule fires
  double epsilon = 1e-10;   // early-stop threshold on zeta

  double psi_fraction = 0.1;
  PsiScaleMode psi_scale_mode = PsiScaleMode::kRescaled;
  std::optional<double> clip_norm;
  bool clip_direction = false;  // additionally clip the aggregated d^k
  int dfl_max_iters = 200;
  int max_epochs = 250;

  void validate() const {
    auto in_open_unit = [](double x) { return x > 0 && x < 1; };
    if (!(zeta0 > 0)) throw ConfigError("zeta0 must be > 0");
    if (!in_open_unit(theta)) throw ConfigError("theta must be in (0,1)");
    if (!(tau > 0)) throw ConfigError("tau must be > 0");
    if (!in_open_unit(gamma)) throw ConfigError("gamma must be in (0,1)");
    if (!in_open_unit(delta)) throw ConfigError("delta must be in (0,1)");
    if (!in_open_unit(eta)) throw ConfigError("eta must be in (0,1)");
    if (!(alpha_min > 0)) throw ConfigError("alpha_min must be > 0");
    if (!(epsilon > 0)) throw ConfigError("epsilon must be > 0");
    if (!(psi_fraction > 0 && psi_fraction <= 1))
      throw ConfigError("psi_fraction must be in (0,1]");
    if (clip_norm && !(*clip_norm > 0))
      throw ConfigError("clip_norm must be > 0");
    if (dfl_max_iters < 1) throw ConfigError("dfl_max_iters must be >= 1");
    if (max_epochs < 0) throw ConfigError("max_epochs must be >= 0");
  }
};

/// Outcome tag for one outer iteration; one per epoch.
enum class BranchTag {
  kRrAccept,          // sufficient decrease on f_tilde, zeta unchanged
  kNormSmallAccept,   // ||d|| small, tentative point in the level set
  kNormSmallReject,   // ||d|| small, tentative point rejected
  kLsSmallLsPoint,    // DFL step small, DFL point accepted
  kLsSmallTentative,  // DFL step small, tentative point accepted
  kLsSmallReject,     // DFL step small, both rejected
  kLsAccept,          // DFL point accepted
  kLsReject,          // DFL point rejected
};

inline std::string to_string(BranchTag t) {
  switch (t) {
    case BranchTag::kRrAccept: return "RR_ACCEPT";
    case BranchTag::kNormSmallAccept: return "NORM_SMALL_ACCEPT";
    case BranchTag::kNormSmallReject: return "NORM_SMALL_REJECT";
    case BranchTag::kLsSmallLsPoint: return "LS_SMALL_LSPOINT";
    case BranchTag::kLsSmallTentative: return "LS_SMALL_TENTATIVE";
    case BranchTag::kLsSmallReject: return "LS_SMALL_REJECT";
    case BranchTag::kLsAccept: return "LS_ACCEPT";
    case BranchTag::kLsReject: return "LS_REJECT";
  }
  return "?";
}

struct FcmaState {
  ParameterVector w;
  double zeta = 0;
  double phi = 0;
  double f_w0 = 0;  // set once at init
  int epoch = 0;
  Rng rng;
  EvalCounters counters;
};

/// Per-epoch internals exposed for differential testing and contract checks.
struct EpochDetail {
  RrOutcome rr;
  std::optional<DflResult> dfl;
  BranchTag branch = BranchTag::kRrAccept;
  double alpha = 0;
  double norm_d = 0;
  ParameterVector w_before;
  double zeta_before = 0;
  double phi_before = 0;
  bool dfl_cap_hit = false;
};

inline FcmaState fcma_init(const FiniteSumProblem& problem,
                           const HyperParams& hp, const ParameterVector& w0,
                           std::uint64_t seed) {
  hp.validate();
  if (static_cast<int>(w0.size()) != problem.dimension())
    throw ConfigError("w0 dimension mismatch");
  FcmaState st;
  st.w = w0;
  st.zeta = hp.zeta0;
  st.rng.seed(seed);
  st.f_w0 = full_value(problem, w0, st.counters);
  st.phi = st.f_w0;
  st.epoch = 0;
  return st;
}

/// Value of f without touching counters; used only for dense tracing.
inline double raw_full_value(const FiniteSumProblem& problem,
                             const ParameterVector& w) {
  EvalCounters scratch;
  return full_value(problem, w, scratch);
}

inline double raw_grad_norm(const FiniteSumProblem& problem,
                            const ParameterVector& w) {
  EvalCounters scratch;
  return l2_norm(full_gradient(problem, w, scratch));
}

/// One outer F-CMA iteration: RR epoch, sufficient-decrease test,
/// direction-norm safeguard, DFL, learning-rate and phi updates, and the
/// level-set acceptance cases.
inline EpochDetail fcma_epoch_step(FcmaState& state,
                                   const FiniteSumProblem& problem,
                                   const HyperParams& hp) {
  const int P = problem.component_count();
  EpochDetail det;
  det.w_before = state.w;
  det.zeta_before = state.zeta;
  det.phi_before = state.phi;

  const Permutation perm = sample_permutation(state.rng, P);
  det.rr = rr_epoch(problem, state.w, state.zeta, perm, hp.clip_norm,
                    state.counters);
  if (hp.clip_direction)
    det.rr.direction = clip_gradient(det.rr.direction, hp.clip_norm);
  const double f_tilde = det.rr.f_tilde;
  det.norm_d = l2_norm(det.rr.direction);

  const double zeta = state.zeta;
  double zeta_next;
  double phi_next;
  double alpha = 0;

  if (f_tilde <= std::min(state.phi - hp.gamma * zeta, state.f_w0)) {
    det.branch = BranchTag::kRrAccept;
    zeta_next = zeta;
    alpha = zeta;
    phi_next = f_tilde;
  } else if (det.norm_d <= hp.tau * zeta) {
    zeta_next = hp.theta * zeta;
    if (f_tilde <= state.f_w0) {
      det.branch = BranchTag::kNormSmallAccept;
      alpha = zeta;
    } else {
      det.branch = BranchTag::kNormSmallReject;
      alpha = 0;
    }
    phi_next = state.phi;
  } else {
    const int p = std::max(
        1, static_cast<int>(std::ceil(hp.psi_fraction * static_cast<double>(P))));
    const SurrogateModel psi(problem, perm, p, hp.psi_scale_mode);
    DflResult dfl;
    try {
      dfl = dfl_search(state.w, det.rr.direction, zeta, f_tilde, hp.gamma,
                       hp.delta, hp.eta, hp.dfl_max_iters, psi, problem,
                       state.counters);
    } catch (const DflCapError&) {
      // iteration cap: treat as a rejected line-search and flag the epoch
      det.dfl_cap_hit = true;
      dfl.alpha = 0;
      dfl.f_out = f_tilde;
      dfl.full_evals_used = 2;
    }
    det.dfl = dfl;
    const double alpha_tilde = dfl.alpha;
    const double f_hat = dfl.f_out;

    if (det.dfl_cap_hit) {
      det.branch = BranchTag::kLsReject;
      zeta_next = hp.theta * zeta;
      alpha = 0;
    } else if (alpha_tilde * det.norm_d * det.norm_d <= hp.tau * zeta) {
      zeta_next = hp.theta * zeta;
      if (alpha_tilde > 0 && f_hat <= state.f_w0) {
        det.branch = BranchTag::kLsSmallLsPoint;
        alpha = alpha_tilde;
      } else if (alpha_tilde == 0 && f_tilde <= state.f_w0) {
        det.branch = BranchTag::kLsSmallTentative;
        alpha = zeta;
      } else {
        det.branch = BranchTag::kLsSmallReject;
        alpha = 0;
      }
    } else {
      zeta_next = std::max(alpha_tilde, hp.alpha_min);
      if (alpha_tilde > 0 && f_hat <= state.f_w0) {
        det.branch = BranchTag::kLsAccept;
        alpha = alpha_tilde;
      } else {
        det.branch = BranchTag::kLsReject;
        alpha = 0;
      }
    }
    phi_next = std::min({f_hat, f_tilde, state.phi});
  }

  det.alpha = alpha;
  if (det.branch == BranchTag::kRrAccept) {
    // alpha = zeta here, so w + alpha*d equals the RR end point; reusing it
    // keeps the RR-equivalence prefix exact at the bit level
    state.w = det.rr.w_tilde;
  } else {
    for (std::size_t c = 0; c < state.w.size(); ++c)
      state.w[c] += alpha * det.rr.direction[c];
  }
  state.zeta = zeta_next;
  state.phi = phi_next;
  state.epoch += 1;
  return det;
}

inline bool should_stop(const FcmaState& state, const HyperParams& hp) {
  return state.zeta < hp.epsilon || state.epoch >= hp.max_epochs;
}

inline TraceRecord make_fcma_trace_record(const FcmaState& state,
                                          const EpochDetail& det,
                                          double f_tilde) {
  TraceRecord rec;
  rec.epoch = state.epoch - 1;
  rec.f_tilde = f_tilde;
  rec.phi = state.phi;
  rec.zeta = state.zeta;
  rec.alpha = det.alpha;
  rec.norm_d = det.norm_d;
  rec.branch = to_string(det.branch) + (det.dfl_cap_hit ? "!CAP" : "");
  rec.full_f_evals = state.counters.full_f_evals;
  rec.component_grad_evals = state.counters.component_grad_evals;
  if (det.dfl) rec.f_true = det.dfl->f_at_w;
  return rec;
}

struct FcmaRunResult {
  Trace trace;
  FinalReport report;
};

using EpochObserver =
    std::function<void(const FcmaState& after, const EpochDetail&)>;

inline FcmaRunResult fcma_run(const FiniteSumProblem& problem,
                              const HyperParams& hp, const ParameterVector& w0,
                              std::uint64_t seed, bool dense_trace = false,
                              const EpochObserver& observer = {}) {
  FcmaRunResult out;
  FcmaState state = fcma_init(problem, hp, w0, seed);
  while (!should_stop(state, hp)) {
    const auto t0 = std::chrono::steady_clock::now();
    const EpochDetail det = fcma_epoch_step(state, problem, hp);
    const auto t1 = std::chrono::steady_clock::now();
    TraceRecord rec = make_fcma_trace_record(state, det, det.rr.f_tilde);
    rec.wall_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
    if (dense_trace) {
      rec.f_true = det.dfl ? det.dfl->f_at_w
                           : raw_full_value(problem, det.w_before);
      rec.grad_norm = raw_grad_norm(problem, det.w_before);
    }
    out.trace.push_back(std::move(rec));
    if (observer) observer(state, det);
  }
  out.report.w = state.w;
  out.report.final_f = full_value(problem, state.w, state.counters);
  out.report.final_grad_norm =
      l2_norm(full_gradient(problem, state.w, state.counters));
  out.report.epochs = state.epoch;
  out.report.stop_reason = state.zeta < hp.epsilon ? StopReason::kEpsilon
                                                   : StopReason::kMaxEpochs;
  out.report.counters = state.counters;
  return out;
}

}  // namespace fcma
