#pragma once

#include <algorithm>
#include <exception>
#include <limits>
#include <array>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "pearsan/dataset.hpp"
#include "pearsan/losses.hpp"
#include "pearsan/polynomial.hpp"
#include "pearsan/problem.hpp"
#include "pearsan/sampler_vca.hpp"
#include "pearsan/stats.hpp"
#include "pearsan/trainer.hpp"

namespace pearsan {

struct LoopConfig {
  int tau_max = 10;
  int n_thresh = 20;
  std::size_t bootstrap_size = 100;
  int surrogate_order = 2;
  TrainerConfig trainer{};
  AnnealSchedule schedule{};
  VcaConfig sampler{};
  std::uint64_t seed = 0;

  void validate() const {
    if (tau_max <= 0) throw ConfigError("loop.tau_max", "must be positive");
    if (n_thresh < 0) throw ConfigError("loop.n_thresh", "must be non-negative");
    schedule.validate();
    if (n_thresh >= schedule.steps)
      throw ConfigError("loop.n_thresh", "n_thresh (" + std::to_string(n_thresh) + ") must be < schedule.steps (" +
                                             std::to_string(schedule.steps) + ")");
    if (bootstrap_size < 2) throw ConfigError("loop.bootstrap_size", "must be at least 2");
    if (surrogate_order < 1 || surrogate_order > kMaxOrder)
      throw ConfigError("loop.surrogate_order", "must be 1, 2 or 3");
    trainer.validate();
    sampler.validate();
  }
};

struct IterationSummary {
  int tau = 0;
  std::size_t n_new = 0;           // rows added to the dataset
  std::size_t n_collected = 0;     // unique vectors the sampler produced after n_thresh
  double mean_fom_new = 0.0;       // over the collected vectors
  double max_fom_new = 0.0;
  double mean_fom_cumulative = 0.0;
  double surrogate_final_loss = 0.0;
  double pearson_final = 0.0;      // pearson(F, H) on the dataset the surrogate was trained on
  std::vector<double> collected_foms;
};

struct PearsanResult {
  LatentDataset dataset;
  std::vector<IterationSummary> iterations;
  DatasetRow best;
  std::vector<RunTrace> anneal_traces;
  std::vector<std::vector<double>> loss_histories;
  PuboPolynomial surrogate;  // for the affine kind, alpha * base
};

namespace detail {

inline DatasetRow best_row(const LatentDataset& d) {
  const DatasetRow* best = &d[0];
  for (const auto& r : d.rows())
    if (r.fom > best->fom || (r.fom == best->fom && encoding_less(r.z, best->z))) best = &r;
  return *best;
}

enum : std::uint64_t { kSeedBootstrap = 1, kSeedSurrogate, kSeedTrainer, kSeedSampler, kSeedAnneal };

}  // namespace detail

/// Alternates surrogate training and VCA sampling for tau_max iterations.
/// Iteration tau trains on Z^(tau), anneals a freshly initialized sampler,
/// and merges the vectors collected after n_thresh into Z^(tau+1)
/// (rows tagged tau + 1). Bootstrap rows carry tau = 0.
inline PearsanResult run_pearsan(const Problem& problem, const LoopConfig& cfg) {
  cfg.validate();
  const std::size_t n = problem.n_latent();
  Rng boot_rng(derive_seed(cfg.seed, detail::kSeedBootstrap));
  PearsanResult out;
  out.dataset = bootstrap_dataset(problem, cfg.bootstrap_size, boot_rng);

  const bool affine = cfg.trainer.loss_kind == LossKind::energy_matching_affine;
  PuboPolynomial poly = random_init(n, cfg.surrogate_order, derive_seed(cfg.seed, detail::kSeedSurrogate));
  AffineWrapper wrapper(poly);

  for (int tau = 0; tau < cfg.tau_max; ++tau) {
    const auto t = static_cast<std::uint64_t>(tau);
    TrainerConfig tc = cfg.trainer;
    tc.seed = derive_seed(cfg.seed, detail::kSeedTrainer, t);
    if (tc.reinit && tau > 0) {
      poly = random_init(n, cfg.surrogate_order, derive_seed(cfg.seed, detail::kSeedSurrogate, t));
      wrapper = AffineWrapper(poly);
    }

    IterationSummary s;
    s.tau = tau;
    PuboPolynomial energy;
    try {
      if (affine) {
        AffineTrainResult r = train_affine(std::move(wrapper), out.dataset, tc);
        wrapper = std::move(r.wrapper);
        s.surrogate_final_loss = r.final_loss;
        out.loss_histories.push_back(std::move(r.loss_history));
        energy = wrapper.scaled_polynomial();
      } else {
        TrainResult r = train_surrogate(std::move(poly), out.dataset, tc);
        poly = std::move(r.poly);
        s.surrogate_final_loss = r.final_loss;
        out.loss_histories.push_back(std::move(r.loss_history));
        energy = poly;
      }
      // alpha > 0 leaves the correlation unchanged, so the base is used for the affine kind
      const PuboPolynomial& scored = affine ? wrapper.base() : poly;
      s.pearson_final = pearson(out.dataset.foms(), scored.evaluate_batch(out.dataset.states()));
    } catch (const DegenerateVarianceError& e) {
      throw DegenerateVarianceError(e.which(), "iteration " + std::to_string(tau) + ", dataset of " +
                                                   std::to_string(out.dataset.size()) + " rows: " + e.what());
    }

    AutoregressiveSampler sampler(n, cfg.sampler.hidden_dim, cfg.sampler.cell,
                                  derive_seed(cfg.seed, detail::kSeedSampler, t));
    Rng anneal_rng(derive_seed(cfg.seed, detail::kSeedAnneal, t));
    AnnealResult a = anneal(std::move(sampler), energy, cfg.schedule, cfg.sampler, cfg.n_thresh, anneal_rng);

    s.n_collected = a.collected.size();
    s.collected_foms.reserve(a.collected.size());
    double sum = 0.0;
    s.max_fom_new = -std::numeric_limits<double>::infinity();
    for (auto& z : a.collected) {
      const double f = fom_of(problem, z);
      s.collected_foms.push_back(f);
      sum += f;
      s.max_fom_new = std::max(s.max_fom_new, f);
      if (out.dataset.insert(std::move(z), f, tau + 1)) ++s.n_new;
    }
    s.mean_fom_new = a.collected.empty() ? 0.0 : sum / static_cast<double>(a.collected.size());
    if (a.collected.empty()) s.max_fom_new = 0.0;
    s.mean_fom_cumulative = out.dataset.mean_fom();
    out.iterations.push_back(std::move(s));
    out.anneal_traces.push_back(std::move(a.trace));
  }
  out.surrogate = affine ? wrapper.scaled_polynomial() : poly;
  out.best = detail::best_row(out.dataset);
  return out;
}

inline nlohmann::json to_json(const IterationSummary& s) {
  return {{"tau", s.tau},
          {"n_new", s.n_new},
          {"mean_fom_new", s.mean_fom_new},
          {"max_fom_new", s.max_fom_new},
          {"mean_fom_cumulative", s.mean_fom_cumulative},
          {"surrogate_final_loss", s.surrogate_final_loss},
          {"pearson_final", s.pearson_final}};
}

inline nlohmann::json summary_json(const Problem& problem, const LoopConfig& cfg, const PearsanResult& r) {
  nlohmann::json iters = nlohmann::json::array();
  for (const auto& s : r.iterations) iters.push_back(to_json(s));
  return {{"problem", problem.name},
          {"n", problem.n_latent()},
          {"seed", cfg.seed},
          {"loss", to_string(cfg.trainer.loss_kind)},
          {"dataset_size", r.dataset.size()},
          {"iterations", std::move(iters)},
          {"best", {{"z", to_string(r.best.z)}, {"fom", r.best.fom}, {"tau", r.best.tau}}},
          {"known_max_fom", problem.max_fom ? nlohmann::json(*problem.max_fom) : nlohmann::json(nullptr)}};
}

/// Runs fn(0..count-1) over up to hardware_concurrency threads. Each index
/// writes only its own output slot, so results do not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(count);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline constexpr std::array<LossKind, 3> kComparedLosses{LossKind::pearsol, LossKind::energy_matching,
                                                         LossKind::energy_matching_affine};

struct ArmReport {
  LossKind kind = LossKind::pearsol;
  std::vector<double> mean_fom_by_iteration;  // tau = 1..tau_max-1, averaged over repeats
  std::vector<double> final_mean_fom;         // per repeat, last iteration
  std::vector<double> final_foms;             // pooled collected FOMs of the last iteration
  Histogram final_histogram;
  std::vector<nlohmann::json> summaries;      // per repeat
};

struct ComparisonReport {
  std::array<ArmReport, 3> arms;
  WelchResult pearsol_vs_em;
  WelchResult pearsol_vs_em_affine;
  std::size_t pearsol_wins_vs_em = 0;  // repeats with pearsol final mean >= em final mean
  std::size_t repeats = 0;
};

inline constexpr std::size_t kHistogramBins = 20;

/// Runs every loss kind on identical seeds and problem. Repeat r uses seed
/// derive_seed(cfg.seed, r) in all arms.
inline ComparisonReport compare_losses(const Problem& problem, const LoopConfig& cfg, std::size_t repeats) {
  if (repeats < 2) throw ConfigError("loop.repeats", "compare needs at least 2 repeats");
  cfg.validate();
  std::vector<PearsanResult> runs(kComparedLosses.size() * repeats);
  parallel_for(runs.size(), [&](std::size_t job) {
    LoopConfig c = cfg;
    c.trainer.loss_kind = kComparedLosses[job / repeats];
    c.seed = derive_seed(cfg.seed, 0x52455045, job % repeats);
    runs[job] = run_pearsan(problem, c);
  });

  ComparisonReport rep;
  rep.repeats = repeats;
  for (std::size_t k = 0; k < kComparedLosses.size(); ++k) {
    ArmReport& arm = rep.arms[k];
    arm.kind = kComparedLosses[k];
    arm.mean_fom_by_iteration.assign(static_cast<std::size_t>(std::max(cfg.tau_max - 1, 0)), 0.0);
    for (std::size_t r = 0; r < repeats; ++r) {
      const PearsanResult& run = runs[k * repeats + r];
      for (int tau = 1; tau < cfg.tau_max; ++tau)
        arm.mean_fom_by_iteration[static_cast<std::size_t>(tau - 1)] +=
            run.iterations[static_cast<std::size_t>(tau)].mean_fom_new / static_cast<double>(repeats);
      const IterationSummary& last = run.iterations.back();
      arm.final_mean_fom.push_back(last.mean_fom_new);
      arm.final_foms.insert(arm.final_foms.end(), last.collected_foms.begin(), last.collected_foms.end());
      LoopConfig c = cfg;
      c.trainer.loss_kind = arm.kind;
      c.seed = derive_seed(cfg.seed, 0x52455045, r);
      arm.summaries.push_back(summary_json(problem, c, run));
    }
    arm.final_histogram = histogram(arm.final_foms, kHistogramBins);
  }
  rep.pearsol_vs_em = welch_t_test(rep.arms[0].final_foms, rep.arms[1].final_foms);
  rep.pearsol_vs_em_affine = welch_t_test(rep.arms[0].final_foms, rep.arms[2].final_foms);
  for (std::size_t r = 0; r < repeats; ++r)
    if (rep.arms[0].final_mean_fom[r] >= rep.arms[1].final_mean_fom[r]) ++rep.pearsol_wins_vs_em;
  return rep;
}

inline nlohmann::json to_json(const WelchResult& w) {
  return {{"t", w.t}, {"dof", w.dof}, {"p_two_sided", w.p_two_sided}, {"mean_a", w.mean_a}, {"mean_b", w.mean_b}};
}

inline nlohmann::json to_json(const ComparisonReport& rep) {
  nlohmann::json arms = nlohmann::json::object();
  for (const auto& arm : rep.arms)
    arms[to_string(arm.kind)] = {{"mean_fom_by_iteration", arm.mean_fom_by_iteration},
                                 {"final_mean_fom", arm.final_mean_fom},
                                 {"final_sample_count", arm.final_foms.size()}};
  return {{"repeats", rep.repeats},
          {"arms", std::move(arms)},
          {"welch_pearsol_vs_energy_matching", to_json(rep.pearsol_vs_em)},
          {"welch_pearsol_vs_energy_matching_affine", to_json(rep.pearsol_vs_em_affine)},
          {"pearsol_wins_vs_energy_matching", rep.pearsol_wins_vs_em}};
}

// CSV columns: bin,count with bin the lower edge.
inline void write_histogram_csv(std::ostream& os, const Histogram& h) {
  os << "bin,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    os << format_double(h.lo + static_cast<double>(i) * h.bin_width()) << ',' << h.counts[i] << '\n';
}

}  // namespace pearsan
