#pragma once

#include <cmath>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "pearsan/bits.hpp"
#include "pearsan/error.hpp"
#include "pearsan/optim.hpp"
#include "pearsan/polynomial.hpp"
#include "pearsan/trace.hpp"

namespace pearsan {

enum class CellKind { concatenation, tensorized };

inline const char* to_string(CellKind k) { return k == CellKind::concatenation ? "concatenation" : "tensorized"; }

struct SampleBatch {
  std::vector<BitVector> states;
  std::vector<double> log_probs;
};

/// Recurrent autoregressive Bernoulli model
///   q(z) = q(z_0) q(z_1 | z_0) ... q(z_{n-1} | z_<n-1)
/// with weights shared across positions. Step t reads a one-hot token for
/// z_{t-1} (token 2 is the start symbol at t = 0) and the previous hidden
/// state, emits h_t, and P(z_t = 1) = logistic(u . h_t + c), clamped to
/// [kProbFloor, 1 - kProbFloor].
///
/// Cells:
///   concatenation  h_t = tanh(W [onehot; h_{t-1}] + b)
///   tensorized     h_t = tanh(M[token] h_{t-1} + b)
///
/// All parameters live in one flat vector (see parameters()) so optimizers
/// and finite-difference checks can treat them uniformly.
class AutoregressiveSampler {
 public:
  static constexpr double kProbFloor = 1e-7;
  static constexpr std::size_t kTokens = 3;
  static constexpr std::size_t kStartToken = 2;

  AutoregressiveSampler(std::size_t n, std::size_t hidden_dim, CellKind cell, std::uint64_t seed)
      : n_(n), hidden_(hidden_dim), cell_(cell) {
    if (n == 0) throw Error("sampler: n must be positive");
    if (hidden_dim == 0) throw Error("sampler: hidden_dim must be positive");
    const std::size_t h = hidden_;
    const std::size_t core = cell_ == CellKind::concatenation ? h * (kTokens + h) : kTokens * h * h;
    bias_off_ = core;
    out_off_ = bias_off_ + h;
    out_bias_off_ = out_off_ + h;
    params_.resize(out_bias_off_ + 1);
    Rng rng(seed);
    const double k = 1.0 / std::sqrt(static_cast<double>(h));
    std::uniform_real_distribution<double> uni(-k, k);
    for (double& p : params_) p = uni(rng);
  }

  std::size_t n() const noexcept { return n_; }
  std::size_t hidden_dim() const noexcept { return hidden_; }
  CellKind cell() const noexcept { return cell_; }
  std::size_t parameter_count() const noexcept { return params_.size(); }
  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }

  /// Output weights and bias set to zero: every conditional becomes exactly 1/2.
  void zero_output() {
    for (std::size_t i = out_off_; i < params_.size(); ++i) params_[i] = 0.0;
  }
  void set_output_bias(double c) { params_[out_bias_off_] = c; }

  /// Teacher-forced P(z_t = 1 | z_<t) for every t.
  std::vector<double> conditionals(BitSpan z) const {
    check(z);
    std::vector<double> probs(n_);
    std::vector<double> h(hidden_, 0.0), next(hidden_);
    std::size_t token = kStartToken;
    for (std::size_t t = 0; t < n_; ++t) {
      step_hidden(token, h.data(), next.data());
      h.swap(next);
      probs[t] = emit(h.data()).p;
      token = z[t];
    }
    return probs;
  }

  double log_prob(BitSpan z) const {
    check(z);
    std::vector<double> h(hidden_, 0.0), next(hidden_);
    std::size_t token = kStartToken;
    double lq = 0.0;
    for (std::size_t t = 0; t < n_; ++t) {
      step_hidden(token, h.data(), next.data());
      h.swap(next);
      lq += emit(h.data()).log_of(z[t]);
      token = z[t];
    }
    return lq;
  }

  SampleBatch sample(std::size_t count, Rng& rng) const {
    SampleBatch out;
    out.states.reserve(count);
    out.log_probs.reserve(count);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<double> h(hidden_), next(hidden_);
    for (std::size_t s = 0; s < count; ++s) {
      std::fill(h.begin(), h.end(), 0.0);
      BitVector z(n_);
      std::size_t token = kStartToken;
      double lq = 0.0;
      for (std::size_t t = 0; t < n_; ++t) {
        step_hidden(token, h.data(), next.data());
        h.swap(next);
        const Emission e = emit(h.data());
        z[t] = uni(rng) < e.p ? 1 : 0;
        lq += e.log_of(z[t]);
        token = z[t];
      }
      out.states.push_back(std::move(z));
      out.log_probs.push_back(lq);
    }
    return out;
  }

  /// grad += weight * d log q(z) / d params, by backpropagation through time.
  /// Returns log q(z).
  double accumulate_log_prob_gradient(BitSpan z, double weight, std::span<double> grad) const {
    check(z);
    if (grad.size() != params_.size()) throw DimensionError("sampler gradient", params_.size(), grad.size());
    const std::size_t H = hidden_;
    std::vector<double> hs((n_ + 1) * H, 0.0);
    std::vector<double> dlogit(n_);
    double lq = 0.0;
    for (std::size_t t = 0; t < n_; ++t) {
      const std::size_t token = t == 0 ? kStartToken : z[t - 1];
      step_hidden(token, &hs[t * H], &hs[(t + 1) * H]);
      const Emission e = emit(&hs[(t + 1) * H]);
      lq += e.log_of(z[t]);
      // d log q / d logit = z - p; zero where the probability sits on the clamp.
      dlogit[t] = e.clamped ? 0.0 : weight * (static_cast<double>(z[t]) - e.p);
    }
    const double* u = &params_[out_off_];
    std::vector<double> dh_next(H, 0.0), da(H);
    for (std::size_t t = n_; t-- > 0;) {
      const double* h = &hs[(t + 1) * H];
      const double* h_prev = &hs[t * H];
      const std::size_t token = t == 0 ? kStartToken : z[t - 1];
      const double dl = dlogit[t];
      grad[out_bias_off_] += dl;
      for (std::size_t i = 0; i < H; ++i) {
        grad[out_off_ + i] += dl * h[i];
        da[i] = (dh_next[i] + dl * u[i]) * (1.0 - h[i] * h[i]);
        grad[bias_off_ + i] += da[i];
      }
      std::fill(dh_next.begin(), dh_next.end(), 0.0);
      if (cell_ == CellKind::concatenation) {
        const std::size_t stride = kTokens + H;
        for (std::size_t i = 0; i < H; ++i) {
          const double* row = &params_[i * stride];
          double* grow = &grad[i * stride];
          grow[token] += da[i];
          for (std::size_t j = 0; j < H; ++j) {
            grow[kTokens + j] += da[i] * h_prev[j];
            dh_next[j] += row[kTokens + j] * da[i];
          }
        }
      } else {
        const double* m = &params_[token * H * H];
        double* gm = &grad[token * H * H];
        for (std::size_t i = 0; i < H; ++i)
          for (std::size_t j = 0; j < H; ++j) {
            gm[i * H + j] += da[i] * h_prev[j];
            dh_next[j] += m[i * H + j] * da[i];
          }
      }
    }
    return lq;
  }

 private:
  struct Emission {
    double p;
    double log_p;
    double log_1mp;
    bool clamped;
    double log_of(std::uint8_t bit) const { return bit ? log_p : log_1mp; }
  };

  void check(BitSpan z) const {
    if (z.size() != n_) throw DimensionError("sampler", n_, z.size());
  }

  void step_hidden(std::size_t token, const double* h_prev, double* h_out) const {
    const std::size_t H = hidden_;
    const double* b = &params_[bias_off_];
    if (cell_ == CellKind::concatenation) {
      const std::size_t stride = kTokens + H;
      for (std::size_t i = 0; i < H; ++i) {
        const double* row = &params_[i * stride];
        double a = b[i] + row[token];
        for (std::size_t j = 0; j < H; ++j) a += row[kTokens + j] * h_prev[j];
        h_out[i] = std::tanh(a);
      }
    } else {
      const double* m = &params_[token * H * H];
      for (std::size_t i = 0; i < H; ++i) {
        double a = b[i];
        for (std::size_t j = 0; j < H; ++j) a += m[i * H + j] * h_prev[j];
        h_out[i] = std::tanh(a);
      }
    }
  }

  Emission emit(const double* h) const {
    double logit = params_[out_bias_off_];
    for (std::size_t i = 0; i < hidden_; ++i) logit += params_[out_off_ + i] * h[i];
    // log-sigmoid in the numerically stable form
    const double log_p = -std::log1p(std::exp(-std::abs(logit))) + std::min(logit, 0.0);
    const double log_1mp = -std::log1p(std::exp(-std::abs(logit))) + std::min(-logit, 0.0);
    const double p = std::exp(log_p);
    if (p < kProbFloor) return {kProbFloor, std::log(kProbFloor), std::log1p(-kProbFloor), true};
    if (p > 1.0 - kProbFloor) return {1.0 - kProbFloor, std::log1p(-kProbFloor), std::log(kProbFloor), true};
    return {p, log_p, log_1mp, false};
  }

  std::size_t n_;
  std::size_t hidden_;
  CellKind cell_;
  std::size_t bias_off_ = 0, out_off_ = 0, out_bias_off_ = 0;
  std::vector<double> params_;
};

/// Monte Carlo free energy (1/N) sum_i [h(z_i) + T log q(z_i)] and its parts.
struct FreeEnergyEstimate {
  double value = 0.0;
  double mean_energy = 0.0;
  double mean_log_q = 0.0;
};

/// -mean(log q), the Monte Carlo entropy estimate.
inline double entropy_estimate(std::span<const double> log_probs) {
  if (log_probs.empty()) throw Error("entropy_estimate: empty input");
  double s = 0.0;
  for (double v : log_probs) {
    if (!std::isfinite(v)) throw Error("entropy_estimate: non-finite log-probability");
    s += v;
  }
  return -s / static_cast<double>(log_probs.size());
}

inline FreeEnergyEstimate free_energy_of(std::span<const double> energies, std::span<const double> log_probs,
                                         double temperature) {
  if (energies.size() != log_probs.size()) throw DimensionError("free energy", energies.size(), log_probs.size());
  if (energies.empty()) throw Error("free energy: no samples");
  const double k = static_cast<double>(energies.size());
  FreeEnergyEstimate f;
  f.mean_energy = std::accumulate(energies.begin(), energies.end(), 0.0) / k;
  f.mean_log_q = std::accumulate(log_probs.begin(), log_probs.end(), 0.0) / k;
  f.value = f.mean_energy + temperature * f.mean_log_q;
  return f;
}

inline FreeEnergyEstimate free_energy(const AutoregressiveSampler& sampler, const PuboPolynomial& poly,
                                      double temperature, std::size_t n_samples, Rng& rng) {
  if (temperature < 0.0) throw Error("free_energy: temperature must be non-negative");
  const SampleBatch batch = sampler.sample(n_samples, rng);
  return free_energy_of(poly.evaluate_batch(batch.states), batch.log_probs, temperature);
}

/// Score-function estimate of d/dparams E_q[h + T log q]:
///   g = 1/(N-1) sum_i (L_i - mean L) d log q(z_i),  L_i = h(z_i) + T log q(z_i).
/// Dividing by N-1 rather than N makes the batch-mean baseline unbiased (it
/// equals the leave-one-out baseline). A single sample gives a zero gradient.
inline std::vector<double> free_energy_gradient(const AutoregressiveSampler& sampler, const SampleBatch& batch,
                                                std::span<const double> energies, double temperature) {
  const std::size_t count = batch.states.size();
  if (energies.size() != count) throw DimensionError("free energy gradient", count, energies.size());
  std::vector<double> grad(sampler.parameter_count(), 0.0);
  if (count < 2) return grad;
  std::vector<double> local(count);
  for (std::size_t i = 0; i < count; ++i) local[i] = energies[i] + temperature * batch.log_probs[i];
  const double baseline = std::accumulate(local.begin(), local.end(), 0.0) / static_cast<double>(count);
  const double norm = 1.0 / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i)
    sampler.accumulate_log_prob_gradient(batch.states[i], (local[i] - baseline) * norm, grad);
  return grad;
}

struct VcaConfig {
  std::size_t hidden_dim = 32;
  CellKind cell = CellKind::concatenation;
  double learning_rate = 5e-4;
  std::size_t n_samples = 50;
  OptimizerKind optimizer = OptimizerKind::adam;

  void validate() const {
    if (hidden_dim == 0) throw ConfigError("sampler.hidden_dim", "must be positive");
    if (n_samples == 0) throw ConfigError("sampler.n_samples", "must be positive");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
      throw ConfigError("sampler.learning_rate", "must be non-negative");
  }
};

struct VcaStepResult {
  FreeEnergyEstimate estimate;
  SampleBatch samples;  // drawn before the update
  std::vector<double> energies;
};

/// Draws n_samples, estimates the free energy at `temperature`, and takes one
/// optimizer step on the sampler parameters.
inline VcaStepResult vca_step(AutoregressiveSampler& sampler, Optimizer& optimizer, const PuboPolynomial& poly,
                              double temperature, std::size_t n_samples, Rng& rng) {
  if (temperature < 0.0) throw Error("vca_step: temperature must be non-negative");
  if (n_samples == 0) throw Error("vca_step: need at least one sample");
  VcaStepResult r;
  r.samples = sampler.sample(n_samples, rng);
  r.energies = poly.evaluate_batch(r.samples.states);
  r.estimate = free_energy_of(r.energies, r.samples.log_probs, temperature);
  const auto grad = free_energy_gradient(sampler, r.samples, r.energies, temperature);
  optimizer.step(sampler.parameters(), grad);
  return r;
}

struct AnnealResult {
  AutoregressiveSampler sampler;
  std::vector<BitVector> collected;  // unique, in first-seen order
  RunTrace trace;
  BitVector best_state;
  double best_energy = 0.0;
};

/// One VCA step per schedule temperature. Samples drawn at steps
/// t >= collect_after are deduplicated and collected.
inline AnnealResult anneal(AutoregressiveSampler sampler, const PuboPolynomial& poly, const AnnealSchedule& schedule,
                           const VcaConfig& cfg, int collect_after, Rng& rng) {
  schedule.validate();
  cfg.validate();
  if (collect_after < 0 || collect_after >= schedule.steps)
    throw ConfigError("loop.n_thresh", "collection threshold " + std::to_string(collect_after) +
                                           " must lie in [0, schedule.steps = " + std::to_string(schedule.steps) + ")");
  if (sampler.n() != poly.n()) throw DimensionError("anneal: sampler vs polynomial", poly.n(), sampler.n());
  Optimizer opt(cfg.optimizer, cfg.learning_rate);
  AnnealResult out{std::move(sampler), {}, {}, {}, 0.0};
  std::unordered_set<std::string> seen;
  bool have_best = false;
  out.trace.reserve(static_cast<std::size_t>(schedule.steps));
  for (int t = 0; t < schedule.steps; ++t) {
    const double temp = schedule.temperature(t);
    VcaStepResult r = vca_step(out.sampler, opt, poly, temp, cfg.n_samples, rng);
    for (std::size_t i = 0; i < r.samples.states.size(); ++i) {
      const double e = r.energies[i];
      const BitVector& z = r.samples.states[i];
      if (!have_best || e < out.best_energy || (e == out.best_energy && encoding_less(z, out.best_state))) {
        out.best_energy = e;
        out.best_state = z;
        have_best = true;
      }
      if (t >= collect_after && seen.insert(to_string(z)).second) out.collected.push_back(z);
    }
    out.trace.push_back({t, temp, r.estimate.value, r.estimate.mean_energy, entropy_estimate(r.samples.log_probs),
                         out.best_energy});
  }
  return out;
}

}  // namespace pearsan
