#include <gtest/gtest.h>

#include <sstream>

#include "pearsan/loop.hpp"

using namespace pearsan;

namespace {

LoopConfig desk_config(std::uint64_t seed = 0) {
  LoopConfig c;
  c.trainer.optimizer = OptimizerKind::adam;
  c.trainer.learning_rate = 1e-3;
  c.sampler.learning_rate = 5e-3;
  c.seed = seed;
  return c;
}

LoopConfig small_config(std::uint64_t seed = 0) {
  LoopConfig c = desk_config(seed);
  c.tau_max = 3;
  c.trainer.epochs = 30;
  c.schedule.steps = 30;
  c.n_thresh = 5;
  c.bootstrap_size = 40;
  c.sampler.hidden_dim = 8;
  return c;
}

class ConstantFom final : public FomOracle {
 public:
  double operator()(const Design&) const override { return 0.25; }
};

}  // namespace

TEST(Loop, DefaultsMatchParameterTable) {
  const LoopConfig c;
  EXPECT_EQ(c.tau_max, 10);
  EXPECT_EQ(c.n_thresh, 20);
  EXPECT_EQ(c.sampler.n_samples, 50u);
  EXPECT_EQ(c.sampler.learning_rate, 5e-4);
  EXPECT_EQ(c.sampler.hidden_dim, 32u);
  EXPECT_EQ(c.schedule.steps, 100);
  EXPECT_EQ(c.surrogate_order, 2);
}

TEST(Loop, ConfigValidation) {
  LoopConfig c;
  c.n_thresh = 100;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.tau_max = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.bootstrap_size = 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.surrogate_order = 4;
  EXPECT_THROW(c.validate(), ConfigError);
  try {
    LoopConfig d;
    d.n_thresh = 100;
    d.validate();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "loop.n_thresh");
  }
}

TEST(Loop, SingleIteration) {
  const auto problem = make_planted_quadratic_problem(8, 1);
  LoopConfig c = small_config();
  c.tau_max = 1;
  const auto r = run_pearsan(problem, c);
  ASSERT_EQ(r.iterations.size(), 1u);
  EXPECT_EQ(r.loss_histories.size(), 1u);
  EXPECT_EQ(r.anneal_traces.size(), 1u);
  EXPECT_EQ(r.anneal_traces[0].size(), 30u);
  EXPECT_EQ(r.dataset.size(), 40u + r.iterations[0].n_new);
}

TEST(Loop, DatasetInvariants) {
  const auto problem = make_hidden_target_problem(10, 2);
  const auto c = small_config(4);
  const auto r = run_pearsan(problem, c);
  ASSERT_EQ(r.iterations.size(), 3u);
  std::size_t size = c.bootstrap_size;
  double prev_mean = 0.0;
  std::size_t prev_size = 0;
  for (std::size_t i = 0; i < r.iterations.size(); ++i) {
    const auto& s = r.iterations[i];
    EXPECT_EQ(s.tau, static_cast<int>(i));
    EXPECT_LE(s.n_new, s.n_collected);
    EXPECT_EQ(s.collected_foms.size(), s.n_collected);
    size += s.n_new;
    EXPECT_GE(s.max_fom_new, s.mean_fom_new);
    // cumulative mean moves toward the mean of what was added
    if (i > 0 && s.n_new > 0 && s.n_new == s.n_collected) {
      const double added = s.mean_fom_new;
      const double expect = (prev_mean * prev_size + added * s.n_new) / (prev_size + s.n_new);
      EXPECT_NEAR(s.mean_fom_cumulative, expect, 1e-9);
      if (added > prev_mean) {
        EXPECT_GE(s.mean_fom_cumulative, prev_mean);
      }
    }
    prev_mean = s.mean_fom_cumulative;
    prev_size = size;
  }
  EXPECT_EQ(r.dataset.size(), size);
  for (const auto& row : r.dataset.rows()) {
    EXPECT_EQ(row.fom, fom_of(problem, row.z));
    EXPECT_GE(row.tau, 0);
    EXPECT_LE(row.tau, c.tau_max);
    EXPECT_LE(row.fom, 1.0);
  }
  for (const auto& row : r.dataset.rows()) {
    EXPECT_LE(row.fom, r.best.fom);
    if (row.fom == r.best.fom) {
      EXPECT_FALSE(encoding_less(row.z, r.best.z));
    }
  }
}

TEST(Loop, BitwiseDeterministic) {
  const auto problem = make_planted_quadratic_problem(9, 2);
  const auto c = small_config(11);
  const auto a = run_pearsan(problem, c), b = run_pearsan(problem, c);
  std::ostringstream ca, cb;
  write_csv(ca, a.dataset);
  write_csv(cb, b.dataset);
  EXPECT_EQ(ca.str(), cb.str());
  EXPECT_EQ(summary_json(problem, c, a).dump(), summary_json(problem, c, b).dump());
  const auto other = run_pearsan(problem, small_config(12));
  std::ostringstream co;
  write_csv(co, other.dataset);
  EXPECT_NE(ca.str(), co.str());
}

TEST(Loop, ReinitAndAffineArmsRun) {
  const auto problem = make_planted_quadratic_problem(8, 3);
  auto c = small_config(2);
  c.trainer.reinit = true;
  EXPECT_EQ(run_pearsan(problem, c).iterations.size(), 3u);
  c.trainer.loss_kind = LossKind::energy_matching_affine;
  c.trainer.affine_learning_rate = 1e-1;
  const auto r = run_pearsan(problem, c);
  EXPECT_EQ(r.iterations.size(), 3u);
  for (const auto& s : r.iterations) EXPECT_LE(std::abs(s.pearson_final), 1.0);
}

TEST(Loop, DegenerateFomsSurfaceWithIteration) {
  Problem p{"constant", std::make_shared<IdentityDecoder>(6), std::make_shared<ConstantFom>(), std::nullopt,
            std::nullopt};
  try {
    run_pearsan(p, small_config());
    FAIL();
  } catch (const DegenerateVarianceError& e) {
    EXPECT_EQ(e.which(), "F");
    EXPECT_NE(std::string(e.what()).find("iteration 0"), std::string::npos);
  }
}

TEST(Loop, SummaryJsonFields) {
  const auto problem = make_planted_quadratic_problem(8, 1);
  const auto c = small_config();
  const auto r = run_pearsan(problem, c);
  const auto j = summary_json(problem, c, r);
  ASSERT_EQ(j.at("iterations").size(), 3u);
  for (const char* key :
       {"tau", "n_new", "mean_fom_new", "max_fom_new", "mean_fom_cumulative", "surrogate_final_loss", "pearson_final"})
    EXPECT_TRUE(j.at("iterations")[0].contains(key)) << key;
  EXPECT_EQ(j.at("dataset_size"), r.dataset.size());
  EXPECT_EQ(j.at("best").at("z"), to_string(r.best.z));
}

TEST(Loop, PlantedQuadraticFindsGlobalMax) {
  int hits = 0;
  const auto problem = make_planted_quadratic_problem(12, 7);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = run_pearsan(problem, desk_config(seed));
    hits += r.best.fom == *problem.max_fom;
  }
  EXPECT_GE(hits, 7);
}

TEST(Compare, ReportStructure) {
  const auto problem = make_planted_quadratic_problem(8, 5);
  auto c = small_config(1);
  c.tau_max = 2;
  const auto rep = compare_losses(problem, c, 3);
  EXPECT_EQ(rep.repeats, 3u);
  ASSERT_EQ(rep.arms.size(), 3u);
  EXPECT_EQ(rep.arms[0].kind, LossKind::pearsol);
  EXPECT_EQ(rep.arms[1].kind, LossKind::energy_matching);
  EXPECT_EQ(rep.arms[2].kind, LossKind::energy_matching_affine);
  for (const auto& arm : rep.arms) {
    EXPECT_EQ(arm.mean_fom_by_iteration.size(), 1u);  // iteration 0 excluded
    EXPECT_EQ(arm.final_mean_fom.size(), 3u);
    EXPECT_EQ(arm.summaries.size(), 3u);
    std::size_t total = 0;
    for (auto n : arm.final_histogram.counts) total += n;
    EXPECT_EQ(total, arm.final_foms.size());
  }
  EXPECT_LE(rep.pearsol_wins_vs_em, 3u);
  const auto j = to_json(rep);
  EXPECT_TRUE(j.contains("welch_pearsol_vs_energy_matching"));
  EXPECT_THROW(compare_losses(problem, c, 1), ConfigError);
}

TEST(Compare, Deterministic) {
  const auto problem = make_planted_quadratic_problem(7, 5);
  auto c = small_config(3);
  c.tau_max = 2;
  EXPECT_EQ(to_json(compare_losses(problem, c, 2)).dump(), to_json(compare_losses(problem, c, 2)).dump());
}
