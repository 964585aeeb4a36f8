#pragma once

#include <cmath>
#include <functional>
#include <random>

#include "pearsan/bits.hpp"
#include "pearsan/polynomial.hpp"
#include "pearsan/trace.hpp"

namespace pearsan {

/// Metropolis rule min(1, exp((e_current - e_candidate) / T)); T = 0 is the
/// greedy limit.
inline double acceptance_probability(double e_current, double e_candidate, double temperature) {
  if (e_candidate <= e_current) return 1.0;
  if (temperature <= 0.0) return 0.0;
  return std::exp((e_current - e_candidate) / temperature);
}

enum class SaScheduleKind { linear, constant };

struct SaConfig {
  int steps = 200;
  double t0 = 1.0;
  std::uint64_t seed = 0;
  SaScheduleKind schedule = SaScheduleKind::linear;  // constant holds T = t0

  void validate() const {
    if (steps < 1) throw ConfigError("sa.steps", "must be at least 1");
    if (!(t0 > 0.0)) throw ConfigError("sa.t0", "must be positive");
  }

  double temperature(int t) const {
    return schedule == SaScheduleKind::constant ? t0 : AnnealSchedule{t0, steps}.temperature(t);
  }
};

struct SaResult {
  BitVector best_state;
  double best_energy = 0.0;
  BitVector final_state;
  RunTrace trace;
};

/// Single-bit-flip Metropolis annealing from a uniformly random state. The
/// trace stores the current energy in both free_energy and mean_energy
/// (entropy 0) and the best-so-far in best_energy. `observe`, if set, sees
/// the state after every step.
inline SaResult run_sa(const PuboPolynomial& poly, const SaConfig& cfg,
                       const std::function<void(int, BitSpan, double)>& observe = {}) {
  cfg.validate();
  Rng rng(cfg.seed);
  const std::size_t n = poly.n();
  SaResult out;
  BitVector z = random_bits(n, rng);
  double energy = poly.evaluate(z);
  out.best_state = z;
  out.best_energy = energy;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  out.trace.reserve(static_cast<std::size_t>(cfg.steps));
  for (int t = 0; t < cfg.steps; ++t) {
    const double temp = cfg.temperature(t);
    const std::size_t bit = pick(rng);
    const double delta = poly.flip_delta(z, bit);
    const double a = acceptance_probability(energy, energy + delta, temp);
    if (a >= 1.0 || uni(rng) < a) {
      z[bit] ^= 1u;
      energy += delta;
      if (energy < out.best_energy || (energy == out.best_energy && encoding_less(z, out.best_state))) {
        // re-evaluate so accumulated rounding never leaks into the reported best
        energy = poly.evaluate(z);
        if (energy < out.best_energy || (energy == out.best_energy && encoding_less(z, out.best_state))) {
          out.best_energy = energy;
          out.best_state = z;
        }
      }
    }
    if (observe) observe(t, z, energy);
    out.trace.push_back({t, temp, energy, energy, 0.0, out.best_energy});
  }
  out.final_state = std::move(z);
  return out;
}

}  // namespace pearsan
