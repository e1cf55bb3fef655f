#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "fcma/core.hpp"

namespace fcma {

namespace detail {

inline Eigen::VectorXd to_eigen(const ParameterVector& w) {
  return Eigen::Map<const Eigen::VectorXd>(w.data(),
                                           static_cast<long>(w.size()));
}

inline ParameterVector from_eigen(const Eigen::VectorXd& v) {
  return ParameterVector(v.data(), v.data() + v.size());
}

}  // namespace detail

/// Sum of quadratics f_i(w) = 1/2 (w-b_i)' A_i (w-b_i) with SPD A_i.
/// The only shipped problem with closed-form analysis constants.
class QuadraticSum : public FiniteSumProblem {
 public:
  QuadraticSum(std::vector<Eigen::MatrixXd> mats,
               std::vector<Eigen::VectorXd> centers)
      : mats_(std::move(mats)), centers_(std::move(centers)) {
    n_ = static_cast<int>(mats_.front().rows());
    Eigen::MatrixXd total = Eigen::MatrixXd::Zero(n_, n_);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_);
    for (std::size_t i = 0; i < mats_.size(); ++i) {
      total += mats_[i];
      rhs += mats_[i] * centers_[i];
    }
    optimum_ = total.ldlt().solve(rhs);
    total_ = total;
  }

  int component_count() const override {
    return static_cast<int>(mats_.size());
  }
  int dimension() const override { return n_; }

  double component_value(int i, const ParameterVector& w) const override {
    const Eigen::VectorXd d = detail::to_eigen(w) - centers_[i];
    return 0.5 * d.dot(mats_[i] * d);
  }

  ParameterVector component_gradient(int i,
                                     const ParameterVector& w) const override {
    const Eigen::VectorXd d = detail::to_eigen(w) - centers_[i];
    return detail::from_eigen(mats_[i] * d);
  }

  std::optional<ParameterVector> known_optimum() const override {
    return detail::from_eigen(optimum_);
  }

  std::optional<ProblemConstants> constants() const override {
    return constants_;
  }

  std::string name() const override { return "quadratic_sum"; }

  /// Populates the analysis constants for a run started at w0 with
  /// per-component clipping at clip_norm. The constants are deliberately
  /// generous upper bounds: L_f covers a ball twice the level-set radius
  /// plus the worst-case inner-trajectory excursion.
  const ProblemConstants& compute_constants(const ParameterVector& w0,
                                            double clip_norm,
                                            double trajectory_margin) {
    ProblemConstants pc;
    double f0 = 0, fstar = 0;
    for (std::size_t i = 0; i < mats_.size(); ++i) {
      Eigen::VectorXd d = detail::to_eigen(w0) - centers_[i];
      f0 += 0.5 * d.dot(mats_[i] * d);
      d = optimum_ - centers_[i];
      fstar += 0.5 * d.dot(mats_[i] * d);
    }
    const double lambda_min_total =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(total_)
            .eigenvalues()
            .minCoeff();
    const double level_radius =
        std::sqrt(2.0 * std::max(f0 - fstar, 0.0) / lambda_min_total);
    const double radius = 2.0 * level_radius + trajectory_margin;

    pc.L = 0;
    pc.L_f = 0;
    for (std::size_t i = 0; i < mats_.size(); ++i) {
      const double lam_max =
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(mats_[i])
              .eigenvalues()
              .maxCoeff();
      pc.L = std::max(pc.L, lam_max);
      const double center_dist = (optimum_ - centers_[i]).norm();
      pc.L_f = std::max(pc.L_f, lam_max * (radius + center_dist));
    }
    pc.M = clip_norm;
    pc.C = 1.0;
    pc.D = clip_norm;
    constants_ = pc;
    return *constants_;
  }

 private:
  std::vector<Eigen::MatrixXd> mats_;
  std::vector<Eigen::VectorXd> centers_;
  Eigen::MatrixXd total_;
  Eigen::VectorXd optimum_;
  int n_ = 0;
  std::optional<ProblemConstants> constants_;
};

/// Seeded random instance: SPD A_i with eigenvalues in [1, conditioning],
/// Gaussian centers.
inline std::shared_ptr<QuadraticSum> make_quadratic_sum(int P, int n,
                                                        std::uint64_t seed,
                                                        double conditioning) {
  if (P < 1 || n < 1 || conditioning < 1)
    throw ConfigError("make_quadratic_sum: invalid parameters");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> eig(1.0, conditioning);
  std::vector<Eigen::MatrixXd> mats;
  std::vector<Eigen::VectorXd> centers;
  for (int i = 0; i < P; ++i) {
    Eigen::MatrixXd raw(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) raw(r, c) = gauss(rng);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
    Eigen::MatrixXd q = qr.householderQ();
    Eigen::VectorXd evals(n);
    for (int r = 0; r < n; ++r) evals(r) = eig(rng);
    if (n >= 2) {
      evals(0) = 1.0;
      evals(n - 1) = conditioning;
    }
    Eigen::MatrixXd a = q * evals.asDiagonal() * q.transpose();
    a = 0.5 * (a + a.transpose());  // enforce exact symmetry
    mats.push_back(std::move(a));
    Eigen::VectorXd b(n);
    for (int r = 0; r < n; ++r) b(r) = gauss(rng);
    centers.push_back(std::move(b));
  }
  return std::make_shared<QuadraticSum>(std::move(mats), std::move(centers));
}

/// The 1-d pair f_1 = 1/2 (w-1)^2, f_2 = 1/2 (w+1)^2 used module-wide.
inline std::shared_ptr<QuadraticSum> make_quadratic_pair() {
  std::vector<Eigen::MatrixXd> mats(2, Eigen::MatrixXd::Identity(1, 1));
  std::vector<Eigen::VectorXd> centers;
  centers.push_back(Eigen::VectorXd::Constant(1, 1.0));
  centers.push_back(Eigen::VectorXd::Constant(1, -1.0));
  return std::make_shared<QuadraticSum>(std::move(mats), std::move(centers));
}

/// Ridge-regularized logistic regression on a synthetic planted-separator
/// dataset; components are equal-size contiguous sample batches.
class LogisticRegressionProblem : public FiniteSumProblem {
 public:
  LogisticRegressionProblem(Eigen::MatrixXd x, Eigen::VectorXd y, int P,
                            double lambda)
      : x_(std::move(x)), y_(std::move(y)), P_(P), lambda_(lambda) {
    m_ = static_cast<int>(x_.rows());
    n_ = static_cast<int>(x_.cols());
    batch_ = m_ / P_;
  }

  int component_count() const override { return P_; }
  int dimension() const override { return n_; }

  double component_value(int i, const ParameterVector& w) const override {
    const Eigen::VectorXd wv = detail::to_eigen(w);
    double sum = 0;
    for (int j = i * batch_; j < (i + 1) * batch_; ++j) {
      const double t = y_(j) * x_.row(j).dot(wv);
      // stable log(1 + exp(-t))
      sum += t > 0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
    }
    return sum + lambda_ * wv.squaredNorm() / (2.0 * P_);
  }

  ParameterVector component_gradient(int i,
                                     const ParameterVector& w) const override {
    const Eigen::VectorXd wv = detail::to_eigen(w);
    Eigen::VectorXd g = (lambda_ / P_) * wv;
    for (int j = i * batch_; j < (i + 1) * batch_; ++j) {
      const double t = y_(j) * x_.row(j).dot(wv);
      const double sigma = 1.0 / (1.0 + std::exp(t));  // sigmoid(-t)
      g -= sigma * y_(j) * x_.row(j).transpose();
    }
    return detail::from_eigen(g);
  }

  std::string name() const override { return "logistic"; }

  /// Gradient Lipschitz bound for the full objective.
  double lipschitz_bound() const {
    return 0.25 * (x_.transpose() * x_).eigenvalues().real().maxCoeff() +
           lambda_;
  }

  /// Fraction of samples the separator w classifies correctly.
  double accuracy(const ParameterVector& w) const {
    const Eigen::VectorXd wv = detail::to_eigen(w);
    int hits = 0;
    for (int j = 0; j < m_; ++j)
      if (y_(j) * x_.row(j).dot(wv) > 0) ++hits;
    return static_cast<double>(hits) / m_;
  }

  /// Minimizer computed lazily by fixed-step full-batch gradient descent
  /// to gradient norm <= tol; cached.
  const ParameterVector& reference_optimum(double tol = 1e-10) const {
    if (!ref_opt_) {
      const double lr = 1.0 / lipschitz_bound();
      ParameterVector w(n_, 0.0);
      EvalCounters scratch;
      const long max_iters = 5'000'000;
      long it = 0;
      for (; it < max_iters; ++it) {
        const ParameterVector g = full_gradient(*this, w, scratch);
        if (l2_norm(g) <= tol) break;
        axpy(-lr, g, w);
      }
      if (it == max_iters)
        throw RunError("logistic reference optimum did not converge");
      ref_opt_ = w;
    }
    return *ref_opt_;
  }

  void write_dataset_csv(std::ostream& os) const {
    for (int j = 0; j < m_; ++j) {
      for (int c = 0; c < n_; ++c) os << x_(j, c) << ',';
      os << y_(j) << '\n';
    }
  }

 private:
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  int P_, m_, n_, batch_;
  double lambda_;
  mutable std::optional<ParameterVector> ref_opt_;
};

inline std::shared_ptr<LogisticRegressionProblem> make_logistic(
    int P, int n, int m, double noise, double lambda, std::uint64_t seed) {
  if (m % P != 0) throw ConfigError("make_logistic: m must be divisible by P");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd x(m, n);
  for (int j = 0; j < m; ++j)
    for (int c = 0; c < n; ++c) x(j, c) = gauss(rng);
  Eigen::VectorXd w_true(n);
  for (int c = 0; c < n; ++c) w_true(c) = gauss(rng);
  Eigen::VectorXd y(m);
  for (int j = 0; j < m; ++j) {
    y(j) = x.row(j).dot(w_true) >= 0 ? 1.0 : -1.0;
    if (unif(rng) < noise) y(j) = -y(j);
  }
  return std::make_shared<LogisticRegressionProblem>(std::move(x), std::move(y),
                                                     P, lambda);
}

/// One-hidden-layer tanh network with squared-error loss on a seeded
/// two-class spiral; nonconvex. Parameters are packed as
/// [W1 (h x 2, row-major), b1 (h), w2 (h), b2], n = 4h + 1.
class SmoothMlpProblem : public FiniteSumProblem {
 public:
  SmoothMlpProblem(Eigen::MatrixXd inputs, Eigen::VectorXd targets, int hidden,
                   int P)
      : x_(std::move(inputs)), y_(std::move(targets)), h_(hidden), P_(P) {
    m_ = static_cast<int>(x_.rows());
    batch_ = m_ / P_;
    n_ = 4 * h_ + 1;
  }

  int component_count() const override { return P_; }
  int dimension() const override { return n_; }

  double component_value(int i, const ParameterVector& w) const override {
    double sum = 0;
    for (int j = i * batch_; j < (i + 1) * batch_; ++j) {
      const double e = forward(w, j) - y_(j);
      sum += 0.5 * e * e;
    }
    return sum;
  }

  ParameterVector component_gradient(int i,
                                     const ParameterVector& w) const override {
    ParameterVector g(n_, 0.0);
    for (int j = i * batch_; j < (i + 1) * batch_; ++j) backprop(w, j, g);
    return g;
  }

  std::string name() const override { return "smooth_mlp"; }

  void write_dataset_csv(std::ostream& os) const {
    for (int j = 0; j < m_; ++j)
      os << x_(j, 0) << ',' << x_(j, 1) << ',' << y_(j) << '\n';
  }

 private:
  double forward(const ParameterVector& w, int j) const {
    double out = w[n_ - 1];  // b2
    for (int u = 0; u < h_; ++u) {
      const double z =
          w[2 * u] * x_(j, 0) + w[2 * u + 1] * x_(j, 1) + w[2 * h_ + u];
      out += w[2 * h_ + h_ + u] * std::tanh(z);
    }
    return out;
  }

  void backprop(const ParameterVector& w, int j, ParameterVector& g) const {
    const double e = forward(w, j) - y_(j);
    g[n_ - 1] += e;  // b2
    for (int u = 0; u < h_; ++u) {
      const double z =
          w[2 * u] * x_(j, 0) + w[2 * u + 1] * x_(j, 1) + w[2 * h_ + u];
      const double a = std::tanh(z);
      g[2 * h_ + h_ + u] += e * a;  // w2
      const double dz = e * w[2 * h_ + h_ + u] * (1.0 - a * a);
      g[2 * u] += dz * x_(j, 0);
      g[2 * u + 1] += dz * x_(j, 1);
      g[2 * h_ + u] += dz;  // b1
    }
  }

  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  int h_, P_, m_, n_, batch_;
};

inline std::shared_ptr<SmoothMlpProblem> make_mlp(int hidden, int P,
                                                  std::uint64_t seed) {
  if (hidden < 1 || P < 1) throw ConfigError("make_mlp: invalid parameters");
  const int per_class_per_batch = 5;
  const int m = 2 * per_class_per_batch * P;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd x(m, 2);
  Eigen::VectorXd y(m);
  for (int j = 0; j < m; ++j) {
    const int cls = j % 2;
    const double t =
        3.0 * std::numbers::pi * (static_cast<double>(j / 2) / (m / 2));
    const double r = 0.1 + 0.9 * (static_cast<double>(j / 2) / (m / 2));
    const double phase = cls * std::numbers::pi;
    x(j, 0) = r * std::cos(t + phase) + 0.05 * gauss(rng);
    x(j, 1) = r * std::sin(t + phase) + 0.05 * gauss(rng);
    y(j) = cls == 0 ? 1.0 : -1.0;
  }
  return std::make_shared<SmoothMlpProblem>(std::move(x), std::move(y), hidden,
                                            P);
}

/// Separable sum of P two-dimensional Rosenbrock terms over disjoint
/// coordinate pairs; nonconvex, coercive, global optimum at all-ones.
class RosenbrockSum : public FiniteSumProblem {
 public:
  explicit RosenbrockSum(int P) : P_(P) {}

  int component_count() const override { return P_; }
  int dimension() const override { return 2 * P_; }

  double component_value(int i, const ParameterVector& w) const override {
    const double u = w[2 * i], v = w[2 * i + 1];
    const double q = v - u * u;
    return (1.0 - u) * (1.0 - u) + 100.0 * q * q;
  }

  ParameterVector component_gradient(int i,
                                     const ParameterVector& w) const override {
    ParameterVector g(w.size(), 0.0);
    const double u = w[2 * i], v = w[2 * i + 1];
    const double q = v - u * u;
    g[2 * i] = -2.0 * (1.0 - u) - 400.0 * u * q;
    g[2 * i + 1] = 200.0 * q;
    return g;
  }

  std::optional<ParameterVector> known_optimum() const override {
    return ParameterVector(2 * P_, 1.0);
  }

  std::string name() const override { return "rosenbrock_sum"; }

 private:
  int P_;
};

inline std::shared_ptr<RosenbrockSum> make_rosenbrock_sum(int P) {
  if (P < 1) throw ConfigError("make_rosenbrock_sum: P must be >= 1");
  return std::make_shared<RosenbrockSum>(P);
}

/// All components constant; used for degenerate-case tests.
class ConstantProblem : public FiniteSumProblem {
 public:
  ConstantProblem(std::vector<double> values, int n)
      : values_(std::move(values)), n_(n) {}

  int component_count() const override {
    return static_cast<int>(values_.size());
  }
  int dimension() const override { return n_; }

  double component_value(int i, const ParameterVector&) const override {
    return values_[i];
  }

  ParameterVector component_gradient(int, const ParameterVector& w) const override {
    return ParameterVector(w.size(), 0.0);
  }

  std::string name() const override { return "constant"; }

 private:
  std::vector<double> values_;
  int n_;
};

}  // namespace fcma
