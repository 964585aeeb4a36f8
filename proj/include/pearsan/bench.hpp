#pragma once

#include <array>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pearsan/config.hpp"
#include "pearsan/loop.hpp"
#include "pearsan/sampler_sa.hpp"
#include "pearsan/sampler_vca.hpp"

namespace pearsan {

inline constexpr std::array<const char*, 3> kBenchMethods{"vca-concatenation", "vca-tensorized", "sa"};

struct MethodBench {
  std::string label;
  std::vector<RunTrace> traces;             // one per instance
  std::vector<double> mean_best_by_step;    // averaged over instances
};

struct BenchResult {
  std::array<MethodBench, 3> methods;
  std::size_t steps = 0;
};

/// Both VCA cells and SA on the same seeded random PUBO instances with the
/// same linear schedule. Instance i uses polynomial seed derive_seed(seed, 1, i).
inline BenchResult bench_annealers(const BenchConfig& cfg, const VcaConfig& vca) {
  cfg.validate();
  vca.validate();
  const AnnealSchedule schedule{cfg.t0, cfg.steps};
  BenchResult out;
  out.steps = static_cast<std::size_t>(cfg.steps);
  for (std::size_t m = 0; m < out.methods.size(); ++m) {
    out.methods[m].label = kBenchMethods[m];
    out.methods[m].traces.resize(cfg.instances);
  }
  parallel_for(cfg.instances * out.methods.size(), [&](std::size_t job) {
    const std::size_t m = job / cfg.instances, i = job % cfg.instances;
    const PuboPolynomial poly = random_init(cfg.n, cfg.order, derive_seed(cfg.seed, 1, i));
    if (m < 2) {
      VcaConfig v = vca;
      v.cell = m == 0 ? CellKind::concatenation : CellKind::tensorized;
      AutoregressiveSampler sampler(cfg.n, v.hidden_dim, v.cell, derive_seed(cfg.seed, 2, i));
      Rng rng(derive_seed(cfg.seed, 3, i));
      out.methods[m].traces[i] = anneal(std::move(sampler), poly, schedule, v, 0, rng).trace;
    } else {
      SaConfig sc{cfg.steps, cfg.t0, derive_seed(cfg.seed, 4, i), SaScheduleKind::linear};
      out.methods[m].traces[i] = run_sa(poly, sc).trace;
    }
  });
  for (auto& method : out.methods) {
    method.mean_best_by_step.assign(out.steps, 0.0);
    for (const auto& trace : method.traces)
      for (std::size_t t = 0; t < out.steps; ++t)
        method.mean_best_by_step[t] += trace[t].best_energy / static_cast<double>(cfg.instances);
  }
  return out;
}

inline nlohmann::json to_json(const BenchResult& r) {
  nlohmann::json methods = nlohmann::json::object();
  for (const auto& m : r.methods) {
    nlohmann::json at = nlohmann::json::object();
    for (std::size_t q = 1; q <= 4; ++q) {
      const std::size_t k = r.steps * q / 4;
      if (k >= 1) at[std::to_string(k)] = m.mean_best_by_step[k - 1];
    }
    methods[m.label] = {{"mean_best_energy_final", m.mean_best_by_step.back()}, {"mean_best_energy_at_step", at}};
  }
  return {{"steps", r.steps}, {"instances", r.methods[0].traces.size()}, {"methods", std::move(methods)}};
}

// CSV columns: step,temperature,mean_best_energy
inline void write_convergence_csv(std::ostream& os, const MethodBench& m) {
  os << "step,temperature,mean_best_energy\n";
  for (std::size_t t = 0; t < m.mean_best_by_step.size(); ++t)
    os << t << ',' << format_double(m.traces.front()[t].temperature) << ',' << format_double(m.mean_best_by_step[t])
       << '\n';
}

}  // namespace pearsan
