#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "pearsan/error.hpp"

namespace pearsan {

enum class OptimizerKind { sgd, adam };

/// First-order update rule over a flat parameter span. Adam keeps its moment
/// estimates between calls, so one instance belongs to one parameter set.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate) : kind_(kind), lr_(learning_rate) {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
      throw Error("optimizer: learning rate must be finite and non-negative");
  }

  OptimizerKind kind() const noexcept { return kind_; }
  double learning_rate() const noexcept { return lr_; }

  void step(std::span<double> params, std::span<const double> grad) {
    if (params.size() != grad.size()) throw DimensionError("optimizer step", params.size(), grad.size());
    if (kind_ == OptimizerKind::sgd) {
      for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr_ * grad[i];
      return;
    }
    if (m_.size() != params.size()) {
      m_.assign(params.size(), 0.0);
      v_.assign(params.size(), 0.0);
      t_ = 0;
    }
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * grad[i];
      v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * grad[i] * grad[i];
      params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + kEps);
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  OptimizerKind kind_;
  double lr_;
  std::vector<double> m_, v_;
  long long t_ = 0;
};

inline const char* to_string(OptimizerKind k) { return k == OptimizerKind::sgd ? "sgd" : "adam"; }

}  // namespace pearsan
