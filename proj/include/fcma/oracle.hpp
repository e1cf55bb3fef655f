#pragma once

// Line-by-line pseudocode transcriptions used to generate expected values
// and for differential testing. Deliberately plain and unoptimized; shares
// nothing with the production headers beyond the problem interface.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "fcma/core.hpp"

namespace fcma::oracle {

struct RrStep {
  int component = 0;
  double batch_loss = 0;
  ParameterVector iterate;  // w after this inner step
};

struct RrResult {
  ParameterVector w_tilde;
  ParameterVector direction;
  double f_tilde = 0;
  std::vector<RrStep> steps;
};

inline std::vector<int> permutation(std::mt19937_64& rng, int P) {
  std::vector<int> order(P);
  for (int i = 0; i < P; ++i) order[i] = i;
  for (int i = P - 1; i > 0; --i) {
    const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[i], order[j]);
  }
  return order;
}

inline RrResult rr(const FiniteSumProblem& problem, const ParameterVector& w,
                   double zeta, const std::vector<int>& perm,
                   std::optional<double> clip_norm) {
  RrResult res;
  ParameterVector w_cur = w;
  res.direction.assign(w.size(), 0.0);
  res.f_tilde = 0;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    const int h = perm[i];
    const double loss = problem.component_value(h, w_cur);
    res.f_tilde += loss;

    ParameterVector g = problem.component_gradient(h, w_cur);
    if (clip_norm) {
      double norm = 0;
      for (double x : g) norm += x * x;
      norm = std::sqrt(norm);
      if (norm > *clip_norm) {
        const double scale = *clip_norm / norm;
        for (double& x : g) x *= scale;
      }
    }
    ParameterVector d_tilde(g.size());
    for (std::size_t c = 0; c < g.size(); ++c) d_tilde[c] = -g[c];
    for (std::size_t c = 0; c < g.size(); ++c)
      res.direction[c] += d_tilde[c];
    for (std::size_t c = 0; c < g.size(); ++c)
      w_cur[c] = w_cur[c] + zeta * d_tilde[c];

    res.steps.push_back({h, loss, w_cur});
  }
  res.w_tilde = w_cur;
  return res;
}

struct DflResult {
  double alpha = 0;
  double f_out = 0;
  int loop_iters = 0;
  int full_evals_used = 0;
  double f_at_w = 0;
  std::vector<double> trial_alphas;  // alpha value at each while-test
  std::vector<double> f_j_values;    // accepted surrogate values
};

inline double plain_full_value(const FiniteSumProblem& problem,
                               const ParameterVector& w) {
  double sum = 0;
  for (int i = 0; i < problem.component_count(); ++i)
    sum += problem.component_value(i, w);
  return sum;
}

inline double psi_value(const FiniteSumProblem& problem,
                        const std::vector<int>& perm, int p, bool rescaled,
                        const ParameterVector& w) {
  double sum = 0;
  for (int i = 0; i < p; ++i) sum += problem.component_value(perm[i], w);
  if (rescaled)
    sum *= static_cast<double>(problem.component_count()) /
           static_cast<double>(p);
  return sum;
}

inline DflResult dfl(const FiniteSumProblem& problem, const ParameterVector& w,
                     const ParameterVector& d, double zeta, double f_tilde,
                     double gamma, double delta, double eta, int max_iters,
                     const std::vector<int>& perm, int p, bool rescaled) {
  DflResult res;
  double alpha = zeta * eta;
  double f_j = f_tilde;
  double d_sq = 0;
  for (double x : d) d_sq += x * x;

  const double f_w = plain_full_value(problem, w);
  res.f_at_w = f_w;

  if (f_tilde > f_w - gamma * alpha * d_sq) {
    res.alpha = 0;
    res.f_out = f_j;
    res.full_evals_used = 1;
    return res;
  }

  while (true) {
    res.trial_alphas.push_back(alpha);
    ParameterVector trial(w.size());
    for (std::size_t c = 0; c < w.size(); ++c)
      trial[c] = w[c] + (alpha / delta) * d[c];
    const double psi_trial = psi_value(problem, perm, p, rescaled, trial);
    if (!(psi_trial <= std::min(f_w - gamma * alpha * d_sq, f_j))) break;
    f_j = psi_trial;
    res.f_j_values.push_back(f_j);
    res.loop_iters += 1;
    alpha = alpha / delta;
    if (res.loop_iters > max_iters)
      throw RunError("oracle dfl: iteration cap exceeded");
  }

  ParameterVector final_point(w.size());
  for (std::size_t c = 0; c < w.size(); ++c)
    final_point[c] = w[c] + alpha * d[c];
  const double f_trial = plain_full_value(problem, final_point);
  res.full_evals_used = 2;
  if (f_trial <= f_w - gamma * alpha * d_sq) {
    res.alpha = alpha;
    res.f_out = f_trial;
  } else {
    res.alpha = 0;
    res.f_out = f_tilde;
  }
  return res;
}

struct EpochResult {
  ParameterVector w_next;
  double zeta_next = 0;
  double phi_next = 0;
  double alpha = 0;
  std::string branch;
  RrResult rr;
  std::optional<DflResult> dfl;
};

struct EpochParams {
  double theta = 0.75;
  double tau = 0.01;
  double gamma = 0.01;
  double delta = 0.90;
  double eta = 0.50;
  double alpha_min = 1e-10;
  double psi_fraction = 0.1;
  bool psi_rescaled = true;
  std::optional<double> clip_norm;
  int dfl_max_iters = 200;
};

inline EpochResult epoch(const FiniteSumProblem& problem,
                         const ParameterVector& w, double zeta, double phi,
                         double f_w0, const EpochParams& hp,
                         std::mt19937_64& rng) {
  const int P = problem.component_count();
  EpochResult res;
  const std::vector<int> perm = permutation(rng, P);
  res.rr = rr(problem, w, zeta, perm, hp.clip_norm);
  const double f_tilde = res.rr.f_tilde;
  double norm_d = 0;
  for (double x : res.rr.direction) norm_d += x * x;
  norm_d = std::sqrt(norm_d);

  double alpha = 0;
  if (f_tilde <= std::min(phi - hp.gamma * zeta, f_w0)) {
    res.branch = "RR_ACCEPT";
    res.zeta_next = zeta;
    alpha = zeta;
    res.phi_next = f_tilde;
  } else if (norm_d <= hp.tau * zeta) {
    res.zeta_next = hp.theta * zeta;
    if (f_tilde <= f_w0) {
      res.branch = "NORM_SMALL_ACCEPT";
      alpha = zeta;
    } else {
      res.branch = "NORM_SMALL_REJECT";
      alpha = 0;
    }
    res.phi_next = phi;
  } else {
    const int p = std::max(
        1, static_cast<int>(std::ceil(hp.psi_fraction * static_cast<double>(P))));
    res.dfl = dfl(problem, w, res.rr.direction, zeta, f_tilde, hp.gamma,
                  hp.delta, hp.eta, hp.dfl_max_iters, perm, p, hp.psi_rescaled);
    const double alpha_tilde = res.dfl->alpha;
    const double f_hat = res.dfl->f_out;
    if (alpha_tilde * norm_d * norm_d <= hp.tau * zeta) {
      res.zeta_next = hp.theta * zeta;
      if (alpha_tilde > 0 && f_hat <= f_w0) {
        res.branch = "LS_SMALL_LSPOINT";
        alpha = alpha_tilde;
      } else if (alpha_tilde == 0 && f_tilde <= f_w0) {
        res.branch = "LS_SMALL_TENTATIVE";
        alpha = zeta;
      } else {
        res.branch = "LS_SMALL_REJECT";
        alpha = 0;
      }
    } else {
      res.zeta_next = std::max(alpha_tilde, hp.alpha_min);
      if (alpha_tilde > 0 && f_hat <= f_w0) {
        res.branch = "LS_ACCEPT";
        alpha = alpha_tilde;
      } else {
        res.branch = "LS_REJECT";
        alpha = 0;
      }
    }
    res.phi_next = std::min({f_hat, f_tilde, phi});
  }

  res.alpha = alpha;
  if (res.branch == "RR_ACCEPT") {
    res.w_next = res.rr.w_tilde;
  } else {
    res.w_next = w;
    for (std::size_t c = 0; c < w.size(); ++c)
      res.w_next[c] += alpha * res.rr.direction[c];
  }
  return res;
}

/// Fixed-step full-batch gradient descent: w <- w - lr * grad f(w).
/// Stops early once the gradient norm falls to tol; errors out if the
/// budget is exhausted with tol > 0 still unmet.
inline ParameterVector full_batch_gd(const FiniteSumProblem& problem,
                                     const ParameterVector& w0, double lr,
                                     long max_iters, double tol = 0) {
  ParameterVector w = w0;
  for (long it = 0; it < max_iters; ++it) {
    ParameterVector g(w.size(), 0.0);
    for (int i = 0; i < problem.component_count(); ++i) {
      const ParameterVector gi = problem.component_gradient(i, w);
      for (std::size_t c = 0; c < w.size(); ++c) g[c] += gi[c];
    }
    double norm = 0;
    for (double x : g) norm += x * x;
    norm = std::sqrt(norm);
    if (tol > 0 && norm <= tol) return w;
    for (std::size_t c = 0; c < w.size(); ++c) w[c] -= lr * g[c];
  }
  if (tol > 0) {
    ParameterVector g(w.size(), 0.0);
    for (int i = 0; i < problem.component_count(); ++i) {
      const ParameterVector gi = problem.component_gradient(i, w);
      for (std::size_t c = 0; c < w.size(); ++c) g[c] += gi[c];
    }
    double norm = 0;
    for (double x : g) norm += x * x;
    if (std::sqrt(norm) > tol)
      throw RunError("full_batch_gd: did not reach tolerance");
  }
  return w;
}

inline void dump(std::ostream& os, const RrResult& r) {
  os << "rr f_tilde=" << r.f_tilde << "\n";
  for (const RrStep& s : r.steps) {
    os << "  batch " << s.component << " loss=" << s.batch_loss << " w=[";
    for (double x : s.iterate) os << x << ' ';
    os << "]\n";
  }
}

inline void dump(std::ostream& os, const DflResult& r) {
  os << "dfl alpha=" << r.alpha << " f_out=" << r.f_out
     << " loop_iters=" << r.loop_iters << " full_evals=" << r.full_evals_used
     << "\n  trial_alphas:";
  for (double a : r.trial_alphas) os << ' ' << a;
  os << "\n  f_j:";
  for (double f : r.f_j_values) os << ' ' << f;
  os << "\n";
}

}  // namespace fcma::oracle
