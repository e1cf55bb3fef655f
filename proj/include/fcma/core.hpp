#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fcma {

/// Dense optimization variable w in R^n.
using ParameterVector = std::vector<double>;

/// Raised when a run cannot continue (non-finite values, exhausted caps).
class RunError : public std::runtime_error {
 public:
  explicit RunError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised for invalid configurations before any evaluation happens.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Evaluation accounting shared by every optimizer.
struct EvalCounters {
  std::uint64_t full_f_evals = 0;
  std::uint64_t component_f_evals = 0;
  std::uint64_t component_grad_evals = 0;
};

/// Analysis constants, populated only for problems where they have a
/// closed form (sums of quadratics). Used by tests, never by the algorithm.
struct ProblemConstants {
  double L = 0;    // max component-gradient Lipschitz constant
  double L_f = 0;  // max component-value Lipschitz constant on the level set
  double C = 0;
  double D = 0;
  double M = 0;
};

/// Finite-sum objective f(w) = sum_{i=0..P-1} f_i(w) with analytic
/// per-component gradients. Components are batches; indices are 0-based
/// internally. Evaluations must be pure functions of (i, w).
class FiniteSumProblem {
 public:
  virtual ~FiniteSumProblem() = default;

  virtual int component_count() const = 0;
  virtual int dimension() const = 0;

  virtual double component_value(int i, const ParameterVector& w) const = 0;
  virtual ParameterVector component_gradient(int i,
                                             const ParameterVector& w) const = 0;

  virtual std::optional<ParameterVector> known_optimum() const { return {}; }
  virtual std::optional<ProblemConstants> constants() const { return {}; }

  virtual std::string name() const { return "problem"; }
};

inline double l2_norm(const ParameterVector& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double squared_norm(const ParameterVector& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return s;
}

inline void axpy(double a, const ParameterVector& x, ParameterVector& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

inline ParameterVector add_scaled(const ParameterVector& x, double a,
                                  const ParameterVector& d) {
  ParameterVector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + a * d[i];
  return out;
}

inline bool all_finite(const ParameterVector& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

/// Rescales g to norm max_norm when it exceeds it; direction is preserved.
/// An empty optional disables clipping.
inline ParameterVector clip_gradient(const ParameterVector& g,
                                     std::optional<double> max_norm) {
  if (!max_norm) return g;
  const double norm = l2_norm(g);
  if (norm <= *max_norm) return g;
  ParameterVector out(g.size());
  const double scale = *max_norm / norm;
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i] * scale;
  return out;
}

/// f(w) = sum of all component values, accumulated left-to-right.
inline double full_value(const FiniteSumProblem& problem,
                         const ParameterVector& w, EvalCounters& counters) {
  const int P = problem.component_count();
  double sum = 0;
  for (int i = 0; i < P; ++i) {
    const double fi = problem.component_value(i, w);
    if (!std::isfinite(fi))
      throw RunError("non-finite value from component " + std::to_string(i) +
                     " of " + problem.name());
    sum += fi;
  }
  counters.full_f_evals += 1;
  counters.component_f_evals += static_cast<std::uint64_t>(P);
  return sum;
}

/// grad f(w) = sum of all component gradients, accumulated left-to-right.
inline ParameterVector full_gradient(const FiniteSumProblem& problem,
                                     const ParameterVector& w,
                                     EvalCounters& counters) {
  const int P = problem.component_count();
  ParameterVector g(w.size(), 0.0);
  for (int i = 0; i < P; ++i) {
    const ParameterVector gi = problem.component_gradient(i, w);
    if (!all_finite(gi))
      throw RunError("non-finite gradient from component " +
                     std::to_string(i) + " of " + problem.name());
    axpy(1.0, gi, g);
  }
  counters.component_grad_evals += static_cast<std::uint64_t>(P);
  return g;
}

}  // namespace fcma
