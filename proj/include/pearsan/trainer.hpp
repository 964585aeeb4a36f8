#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "pearsan/dataset.hpp"
#include "pearsan/losses.hpp"
#include "pearsan/optim.hpp"
#include "pearsan/polynomial.hpp"

namespace pearsan {

struct TrainerConfig {
  LossKind loss_kind = LossKind::pearsol;
  int epochs = 300;
  double learning_rate = 1e-5;
  double affine_learning_rate = 1e-3;
  std::size_t batch_size = 0;  // 0 = full dataset
  LossWeights weights{};
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::sgd;
  bool reinit = false;  // loop only: fresh random surrogate each iteration instead of warm start

  void validate() const {
    if (epochs <= 0) throw ConfigError("trainer.epochs", "must be positive");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
      throw ConfigError("trainer.learning_rate", "must be positive");
    if (!(affine_learning_rate > 0.0) || !std::isfinite(affine_learning_rate))
      throw ConfigError("trainer.affine_learning_rate", "must be positive");
    if (loss_kind == LossKind::pearsol && batch_size == 1)
      throw ConfigError("trainer.batch_size", "pearsol needs at least 2 rows per batch");
    weights.validate();
  }
};

struct TrainResult {
  PuboPolynomial poly;
  std::vector<double> loss_history;  // loss at the start of each epoch
  double final_loss = 0.0;           // full-dataset loss after the last epoch
};

struct AffineTrainResult {
  AffineWrapper wrapper;
  std::vector<double> loss_history;
  double final_loss = 0.0;
};

namespace detail {

/// Per-row lists of active monomial indices; the dataset is fixed during training.
inline std::vector<std::vector<std::uint32_t>> active_terms(const PuboPolynomial& poly, const LatentDataset& data) {
  std::vector<std::vector<std::uint32_t>> out(data.size());
  const auto monos = poly.monomials();
  for (std::size_t r = 0; r < data.size(); ++r) {
    const BitVector& z = data[r].z;
    if (z.size() != poly.n()) throw DimensionError("train: dataset row vs surrogate", poly.n(), z.size());
    for (std::size_t t = 0; t < monos.size(); ++t)
      if (monos[t].active(z)) out[r].push_back(static_cast<std::uint32_t>(t));
  }
  return out;
}

inline double energy_of(std::span<const double> coeffs, const std::vector<std::uint32_t>& active) {
  double e = 0.0;
  for (std::uint32_t t : active) e += coeffs[t];
  return e;
}

inline void check_dataset(const LatentDataset& data, LossKind kind) {
  if (data.empty()) throw Error("train: dataset is empty");
  if (kind != LossKind::pearsol) return;
  if (data.size() < 2)
    throw DegenerateVarianceError("F", "pearsol needs at least 2 rows, dataset has " + std::to_string(data.size()));
  const auto f = data.foms();
  const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
  const double m = detail::mean(f);
  double ss = 0.0;
  for (double v : f) ss += (v - m) * (v - m);
  if (ss / static_cast<double>(f.size() - 1) <= kVarianceFloor)
    throw DegenerateVarianceError("F", "dataset of " + std::to_string(f.size()) +
                                           " rows has figures of merit in [" + format_double(*lo) + ", " +
                                           format_double(*hi) + "]; pearsol needs distinct values");
}

/// Row order per epoch: identity for full batch, seeded shuffle otherwise.
class BatchPlan {
 public:
  BatchPlan(std::size_t rows, std::size_t batch_size, std::uint64_t seed)
      : order_(rows), batch_(batch_size == 0 || batch_size >= rows ? rows : batch_size), rng_(seed) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
  }

  void next_epoch() {
    if (batch_ < order_.size()) std::shuffle(order_.begin(), order_.end(), rng_);
  }
  // The last batch absorbs the remainder, so no batch is smaller than batch_size.
  std::size_t batch_count() const { return std::max<std::size_t>(1, order_.size() / batch_); }
  std::span<const std::size_t> batch(std::size_t b) const {
    const std::size_t lo = b * batch_;
    const std::size_t len = b + 1 == batch_count() ? order_.size() - lo : batch_;
    return std::span<const std::size_t>(order_).subspan(lo, len);
  }

 private:
  std::vector<std::size_t> order_;
  std::size_t batch_;
  Rng rng_;
};

}  // namespace detail

/// Full-dataset loss of `poly` under a non-affine loss kind.
inline double surrogate_loss(const PuboPolynomial& poly, const LatentDataset& data, const TrainerConfig& cfg) {
  const auto f = data.foms();
  const auto h = poly.evaluate_batch(data.states());
  const TrainingBatch batch{f, h};
  return cfg.loss_kind == LossKind::pearsol ? pearsol(batch, cfg.weights, poly.coeff_sq_norm())
                                            : energy_matching(batch);
}

/// Gradient descent on the surrogate coefficients against the dataset.
/// Warm-starts from `poly`.
inline TrainResult train_surrogate(PuboPolynomial poly, const LatentDataset& data, const TrainerConfig& cfg) {
  cfg.validate();
  if (cfg.loss_kind == LossKind::energy_matching_affine)
    throw ConfigError("trainer.loss", "energy_matching_affine trains an AffineWrapper; use train_affine");
  detail::check_dataset(data, cfg.loss_kind);

  const auto active = detail::active_terms(poly, data);
  std::vector<double> fom_all = data.foms();
  detail::BatchPlan plan(data.size(), cfg.batch_size, cfg.seed);
  Optimizer opt(cfg.optimizer, cfg.learning_rate);

  TrainResult result;
  result.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));
  std::vector<double> f, h, grad(poly.size());
  auto loss_on = [&](std::span<const std::size_t> rows, bool want_grad) {
    const auto coeffs = poly.coefficients();
    f.clear();
    h.clear();
    for (std::size_t r : rows) {
      f.push_back(fom_all[r]);
      h.push_back(detail::energy_of(coeffs, active[r]));
    }
    const TrainingBatch batch{f, h};
    const double sq = poly.coeff_sq_norm();
    const double loss = cfg.loss_kind == LossKind::pearsol ? pearsol(batch, cfg.weights, sq) : energy_matching(batch);
    if (want_grad) {
      const LossGradients g = loss_gradients(batch, cfg.weights, cfg.loss_kind, sq);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = 0; k < rows.size(); ++k)
        for (std::uint32_t t : active[rows[k]]) grad[t] += g.d_energy[k];
      if (g.d_coeff_sq_norm != 0.0)
        for (std::size_t t = 0; t < grad.size(); ++t) grad[t] += 2.0 * coeffs[t] * g.d_coeff_sq_norm;
    }
    return loss;
  };

  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    plan.next_epoch();
    const bool full = plan.batch_count() == 1;
    if (!full) result.loss_history.push_back(loss_on(all, false));
    for (std::size_t b = 0; b < plan.batch_count(); ++b) {
      const double loss = loss_on(plan.batch(b), true);
      if (full) result.loss_history.push_back(loss);
      opt.step(poly.mutable_coefficients(), grad);
    }
  }
  result.final_loss = loss_on(all, false);
  result.poly = std::move(poly);
  return result;
}

/// Energy matching against alpha * h + beta. Base coefficients step at
/// learning_rate, alpha and beta at affine_learning_rate; alpha is projected
/// back above AffineWrapper::kAlphaFloor after every step.
inline AffineTrainResult train_affine(AffineWrapper wrapper, const LatentDataset& data, const TrainerConfig& cfg) {
  cfg.validate();
  if (cfg.loss_kind != LossKind::energy_matching_affine)
    throw ConfigError("trainer.loss", "train_affine requires energy_matching_affine");
  detail::check_dataset(data, cfg.loss_kind);

  PuboPolynomial& poly = wrapper.base();
  const auto active = detail::active_terms(poly, data);
  const std::vector<double> fom_all = data.foms();
  detail::BatchPlan plan(data.size(), cfg.batch_size, cfg.seed);
  Optimizer base_opt(cfg.optimizer, cfg.learning_rate);
  Optimizer affine_opt(cfg.optimizer, cfg.affine_learning_rate);

  std::vector<double> grad(poly.size());
  std::array<double, 2> affine_grad{};
  auto loss_on = [&](std::span<const std::size_t> rows, bool want_grad) {
    const auto coeffs = poly.coefficients();
    const double a = wrapper.alpha(), b = wrapper.beta();
    if (want_grad) {
      std::fill(grad.begin(), grad.end(), 0.0);
      affine_grad = {0.0, 0.0};
    }
    double loss = 0.0;
    for (std::size_t r : rows) {
      const double h = detail::energy_of(coeffs, active[r]);
      const double resid = fom_all[r] + a * h + b;
      loss += resid * resid;
      if (want_grad) {
        const double d = 2.0 * resid;
        for (std::uint32_t t : active[r]) grad[t] += a * d;
        affine_grad[0] += d * h;
        affine_grad[1] += d;
      }
    }
    return loss;
  };

  AffineTrainResult result;
  result.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    plan.next_epoch();
    const bool full = plan.batch_count() == 1;
    if (!full) result.loss_history.push_back(loss_on(all, false));
    for (std::size_t bi = 0; bi < plan.batch_count(); ++bi) {
      const double loss = loss_on(plan.batch(bi), true);
      if (full) result.loss_history.push_back(loss);
      base_opt.step(poly.mutable_coefficients(), grad);
      std::array<double, 2> ab{wrapper.alpha(), wrapper.beta()};
      affine_opt.step(ab, affine_grad);
      wrapper.set_alpha(ab[0]);
      wrapper.set_beta(ab[1]);
    }
  }
  result.final_loss = loss_on(all, false);
  result.wrapper = std::move(wrapper);
  return result;
}

}  // namespace pearsan
