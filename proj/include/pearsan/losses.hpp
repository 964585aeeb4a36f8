#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "pearsan/error.hpp"

namespace pearsan {

inline constexpr double kRhoClamp = 1e-6;
inline constexpr double kVarianceFloor = 1e-12;

/// Decoded figures of merit paired with surrogate energies for the same latent vectors.
struct TrainingBatch {
  std::span<const double> fom;     // F
  std::span<const double> energy;  // H

  std::size_t size() const noexcept { return fom.size(); }

  void validate() const {
    if (fom.size() != energy.size()) throw DimensionError("training batch", fom.size(), energy.size());
    if (fom.size() < 2) throw Error("training batch: need at least 2 rows, got " + std::to_string(fom.size()));
    for (std::size_t i = 0; i < fom.size(); ++i)
      if (!std::isfinite(fom[i]) || !std::isfinite(energy[i]))
        throw Error("training batch: non-finite entry at row " + std::to_string(i));
  }
};

struct LossWeights {
  double lambda_a = 10.0;  // Pearson
  double lambda_b = 0.01;  // mean energy
  double lambda_c = 10.0;  // coefficient norm

  void validate() const {
    for (double w : {lambda_a, lambda_b, lambda_c})
      if (!std::isfinite(w) || w < 0.0) throw Error("loss weights must be finite and non-negative");
  }
};

enum class LossKind { pearsol, energy_matching, energy_matching_affine };

inline const char* to_string(LossKind k) {
  switch (k) {
    case LossKind::pearsol: return "pearsol";
    case LossKind::energy_matching: return "energy_matching";
    case LossKind::energy_matching_affine: return "energy_matching_affine";
  }
  return "?";
}

namespace detail {

inline double mean(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Sum of squared deviations, after checking the sample variance floor.
inline double centered_sum_sq(std::span<const double> x, double mean_x, const char* name) {
  double s = 0.0;
  for (double v : x) s += (v - mean_x) * (v - mean_x);
  if (s / static_cast<double>(x.size() - 1) <= kVarianceFloor)
    throw DegenerateVarianceError(name, "sample variance " + std::to_string(s / static_cast<double>(x.size() - 1)) +
                                            " over " + std::to_string(x.size()) + " values");
  return s;
}

inline void check_pair(std::span<const double> x, std::span<const double> y, const char* what) {
  if (x.size() != y.size()) throw DimensionError(what, x.size(), y.size());
  if (x.size() < 2) throw Error(std::string(what) + ": need at least 2 values");
}

}  // namespace detail

/// Pearson correlation with sum-of-squares deviations; throws
/// DegenerateVarianceError("F"/"H") when either list is constant.
inline double pearson(std::span<const double> fom, std::span<const double> energy) {
  detail::check_pair(fom, energy, "pearson");
  const double mf = detail::mean(fom), mh = detail::mean(energy);
  const double sff = detail::centered_sum_sq(fom, mf, "F");
  const double shh = detail::centered_sum_sq(energy, mh, "H");
  double sfh = 0.0;
  for (std::size_t i = 0; i < fom.size(); ++i) sfh += (fom[i] - mf) * (energy[i] - mh);
  return std::clamp(sfh / std::sqrt(sff * shh), -1.0, 1.0);
}

/// log(p / (1 - p)) with p = (rho + 1) / 2, rho clamped to [-1 + eps, 1 - eps].
inline double inverse_logistic(double rho) {
  if (!std::isfinite(rho)) throw Error("inverse_logistic: non-finite input");
  const double r = std::clamp(rho, -1.0 + kRhoClamp, 1.0 - kRhoClamp);
  const double p = 0.5 * (r + 1.0);
  return std::log(p / (1.0 - p));
}

/// d/drho of inverse_logistic; zero outside the clamp interval.
inline double inverse_logistic_derivative(double rho) {
  if (rho <= -1.0 + kRhoClamp || rho >= 1.0 - kRhoClamp) return 0.0;
  return 2.0 / (1.0 - rho * rho);
}

/// (||c||_2 - 1)^2 as a function of the squared norm.
inline double norm_penalty(double coeff_sq_norm) {
  const double d = std::sqrt(coeff_sq_norm) - 1.0;
  return d * d;
}

/// d norm_penalty / d(coeff_sq_norm) = 1 - 1/||c||. Taken as 0 at the origin,
/// where the penalty is not differentiable in the squared norm.
inline double norm_penalty_derivative(double coeff_sq_norm) {
  if (coeff_sq_norm <= 0.0) return 0.0;
  return 1.0 - 1.0 / std::sqrt(coeff_sq_norm);
}

inline double pearsol(const TrainingBatch& batch, const LossWeights& w, double coeff_sq_norm) {
  batch.validate();
  double loss = 0.0;
  if (w.lambda_a != 0.0) loss += w.lambda_a * inverse_logistic(pearson(batch.fom, batch.energy));
  if (w.lambda_b != 0.0) loss += w.lambda_b * detail::mean(batch.energy);
  if (w.lambda_c != 0.0) loss += w.lambda_c * norm_penalty(coeff_sq_norm);
  return loss;
}

/// sum_i (F_i + H_i)^2
inline double energy_matching(const TrainingBatch& batch) {
  batch.validate();
  double s = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double r = batch.fom[i] + batch.energy[i];
    s += r * r;
  }
  return s;
}

struct LossGradients {
  std::vector<double> d_energy;  // dL/dH_i
  double d_coeff_sq_norm = 0.0;  // dL/d(sum c^2)
};

/// Analytic partials of the chosen loss. For energy_matching_affine, pass the
/// affine-transformed energies as batch.energy; the caller chains through alpha.
inline LossGradients loss_gradients(const TrainingBatch& batch, const LossWeights& w, LossKind kind,
                                    double coeff_sq_norm = 1.0) {
  batch.validate();
  const std::size_t n = batch.size();
  LossGradients g;
  g.d_energy.assign(n, 0.0);
  if (kind != LossKind::pearsol) {
    for (std::size_t i = 0; i < n; ++i) g.d_energy[i] = 2.0 * (batch.fom[i] + batch.energy[i]);
    return g;
  }
  if (w.lambda_a != 0.0) {
    // d rho / d H_i = a_i / sqrt(Saa Sbb) - rho b_i / Sbb, with a, b the centered lists.
    const double mf = detail::mean(batch.fom), mh = detail::mean(batch.energy);
    const double sff = detail::centered_sum_sq(batch.fom, mf, "F");
    const double shh = detail::centered_sum_sq(batch.energy, mh, "H");
    double sfh = 0.0;
    for (std::size_t i = 0; i < n; ++i) sfh += (batch.fom[i] - mf) * (batch.energy[i] - mh);
    const double denom = std::sqrt(sff * shh);
    const double rho = sfh / denom;
    const double outer = w.lambda_a * inverse_logistic_derivative(rho);
    for (std::size_t i = 0; i < n; ++i)
      g.d_energy[i] = outer * ((batch.fom[i] - mf) / denom - rho * (batch.energy[i] - mh) / shh);
  }
  if (w.lambda_b != 0.0) {
    const double d = w.lambda_b / static_cast<double>(n);
    for (double& x : g.d_energy) x += d;
  }
  g.d_coeff_sq_norm = w.lambda_c * norm_penalty_derivative(coeff_sq_norm);
  return g;
}

/// (1/N^2) sum_{i,j} (x_i - x_j)(y_i - y_j) / (sigma_x sigma_y), population sigmas.
/// O(N^2); a diagnostic counterpart to pearson.
inline double gamma_pairwise(std::span<const double> x, std::span<const double> y) {
  detail::check_pair(x, y, "gamma_pairwise");
  const double nn = static_cast<double>(x.size());
  const double mx = detail::mean(x), my = detail::mean(y);
  const double sx = std::sqrt(detail::centered_sum_sq(x, mx, "X") / nn);
  const double sy = std::sqrt(detail::centered_sum_sq(y, my, "Y") / nn);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) s += (x[i] - x[j]) * (y[i] - y[j]);
  return s / (nn * nn * sx * sy);
}

}  // namespace pearsan
