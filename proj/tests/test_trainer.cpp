#include <gtest/gtest.h>

#include "pearsan/losses.hpp"
#include "pearsan/trainer.hpp"

using namespace pearsan;

namespace {

// FOM_i = scale * -h*(z_i) + shift for a hidden polynomial h*.
LatentDataset planted_dataset(std::size_t n, std::size_t rows, std::uint64_t seed, double scale = 1.0,
                              double shift = 0.0) {
  const auto hidden = random_init(n, 2, seed);
  LatentDataset d(n);
  Rng rng(seed + 1);
  while (d.size() < rows) {
    BitVector z = random_bits(n, rng);
    const double f = -scale * hidden.evaluate(z) + shift;
    d.insert(std::move(z), f, 0);
  }
  return d;
}

double dataset_pearson(const PuboPolynomial& p, const LatentDataset& d) {
  return pearson(d.foms(), p.evaluate_batch(d.states()));
}

}  // namespace

TEST(Trainer, DefaultsMatchParameterTable) {
  const TrainerConfig c;
  EXPECT_EQ(c.epochs, 300);
  EXPECT_EQ(c.learning_rate, 1e-5);
  EXPECT_EQ(c.affine_learning_rate, 1e-3);
  EXPECT_EQ(c.batch_size, 0u);
  EXPECT_EQ(c.optimizer, OptimizerKind::sgd);
  EXPECT_EQ(c.loss_kind, LossKind::pearsol);
}

TEST(Trainer, ConfigValidation) {
  TrainerConfig c;
  c.epochs = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.learning_rate = -1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.affine_learning_rate = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.batch_size = 1;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Trainer, PearsolReachesStrongAntitonicity) {
  const auto data = planted_dataset(10, 400, 5);
  TrainerConfig c;
  c.optimizer = OptimizerKind::adam;
  c.learning_rate = 1e-3;
  const auto init = random_init(10, 2, 99);
  const auto r = train_surrogate(init, data, c);
  EXPECT_EQ(r.loss_history.size(), 300u);
  EXPECT_LE(dataset_pearson(r.poly, data), -0.95);
  EXPECT_LT(r.final_loss, r.loss_history.front());
  EXPECT_NEAR(r.final_loss, surrogate_loss(r.poly, data, c), 1e-12);
}

TEST(Trainer, EnergyMatchingDecreasesLoss) {
  const auto data = planted_dataset(10, 300, 6);
  TrainerConfig c;
  c.loss_kind = LossKind::energy_matching;
  c.learning_rate = 1e-5;  // the summed loss scales with rows, so SGD needs a small step
  const auto r = train_surrogate(random_init(10, 2, 1), data, c);
  EXPECT_LT(r.final_loss, r.loss_history.front());
}

TEST(Trainer, SingleRowPearsolIsDegenerate) {
  LatentDataset d(4);
  d.insert(from_string("0101"), 0.5, 0);
  EXPECT_THROW(train_surrogate(random_init(4, 2, 0), d, {}), DegenerateVarianceError);
}

TEST(Trainer, ConstantFomsAreDegenerateWithDiagnostics) {
  LatentDataset d(4);
  d.insert(from_string("0101"), 0.5, 0);
  d.insert(from_string("1101"), 0.5, 0);
  d.insert(from_string("0001"), 0.5, 0);
  try {
    train_surrogate(random_init(4, 2, 0), d, {});
    FAIL();
  } catch (const DegenerateVarianceError& e) {
    EXPECT_EQ(e.which(), "F");
    EXPECT_NE(std::string(e.what()).find("3 rows"), std::string::npos);
  }
}

TEST(Trainer, EmptyDatasetRejected) {
  TrainerConfig c;
  c.loss_kind = LossKind::energy_matching;
  EXPECT_THROW(train_surrogate(random_init(4, 2, 0), LatentDataset(4), c), Error);
}

TEST(Trainer, ZeroStepLimitLeavesCoefficients) {
  const auto data = planted_dataset(8, 100, 3);
  TrainerConfig c;
  c.learning_rate = 1e-300;
  c.epochs = 3;
  const auto init = random_init(8, 2, 4);
  const auto r = train_surrogate(init, data, c);
  for (std::size_t t = 0; t < init.size(); ++t) EXPECT_EQ(r.poly.coefficients()[t], init.coefficients()[t]);
}

TEST(Trainer, EnergyMatchingFixedPoint) {
  const PuboPolynomial h(3, 2, {{Monomial{0}, 0.3}, {Monomial{1}, -0.2}, {Monomial{0, 2}, 0.5}});
  LatentDataset d(3);
  for (std::uint64_t v = 0; v < 8; ++v) {
    BitVector z = decode_bits(v, 3);
    const double f = -h.evaluate(z);
    d.insert(std::move(z), f, 0);
  }
  TrainerConfig c;
  c.loss_kind = LossKind::energy_matching;
  c.learning_rate = 0.1;
  c.epochs = 5;
  const auto r = train_surrogate(h, d, c);
  for (std::size_t t = 0; t < h.size(); ++t) EXPECT_EQ(r.poly.coefficients()[t], h.coefficients()[t]);
  EXPECT_EQ(r.final_loss, 0.0);
}

TEST(Trainer, DeterministicAcrossRuns) {
  const auto data = planted_dataset(8, 120, 9);
  TrainerConfig c;
  c.batch_size = 32;
  c.seed = 5;
  c.learning_rate = 1e-3;
  c.epochs = 20;
  const auto a = train_surrogate(random_init(8, 2, 1), data, c);
  const auto b = train_surrogate(random_init(8, 2, 1), data, c);
  for (std::size_t t = 0; t < a.poly.size(); ++t) EXPECT_EQ(a.poly.coefficients()[t], b.poly.coefficients()[t]);
  EXPECT_EQ(a.loss_history, b.loss_history);
}

TEST(Trainer, MinibatchPlanCoversRemainder) {
  detail::BatchPlan plan(10, 4, 1);
  plan.next_epoch();
  ASSERT_EQ(plan.batch_count(), 2u);
  EXPECT_EQ(plan.batch(0).size(), 4u);
  EXPECT_EQ(plan.batch(1).size(), 6u);
  std::vector<int> seen(10, 0);
  for (std::size_t b = 0; b < plan.batch_count(); ++b)
    for (std::size_t r : plan.batch(b)) ++seen[r];
  for (int s : seen) EXPECT_EQ(s, 1);
}

TEST(Trainer, SgdStepMatchesManualGradient) {
  // one full-batch SGD step equals c - lr * (sum_i dL/dH_i * dH_i/dc + 2 c dL/dsq)
  const auto data = planted_dataset(5, 20, 2);
  TrainerConfig c;
  c.epochs = 1;
  c.learning_rate = 1e-2;
  const auto init = random_init(5, 2, 8);
  const auto f = data.foms();
  const auto h = init.evaluate_batch(data.states());
  const auto g = loss_gradients({f, h}, c.weights, LossKind::pearsol, init.coeff_sq_norm());
  std::vector<double> expect(init.coefficients().begin(), init.coefficients().end());
  for (std::size_t t = 0; t < init.size(); ++t) {
    double d = 2.0 * init.coefficients()[t] * g.d_coeff_sq_norm;
    for (std::size_t r = 0; r < data.size(); ++r) d += g.d_energy[r] * init.gradient_wrt_coefficients(data[r].z)[t];
    expect[t] -= c.learning_rate * d;
  }
  const auto r = train_surrogate(init, data, c);
  for (std::size_t t = 0; t < init.size(); ++t) EXPECT_NEAR(r.poly.coefficients()[t], expect[t], 1e-14);
}

TEST(TrainAffine, StartsAtBaseAndKeepsAlphaPositive) {
  const auto data = planted_dataset(8, 150, 4, 2.0, -5.0);
  const auto base = random_init(8, 2, 3);
  AffineWrapper w(base);
  EXPECT_EQ(w.evaluate(data[0].z), base.evaluate(data[0].z));
  TrainerConfig c;
  c.loss_kind = LossKind::energy_matching_affine;
  c.optimizer = OptimizerKind::adam;
  c.affine_learning_rate = 1e-1;
  c.learning_rate = 1e-3;
  c.epochs = 50;
  const auto r = train_affine(w, data, c);
  EXPECT_GT(r.wrapper.alpha(), 0.0);
  EXPECT_GE(r.wrapper.alpha(), AffineWrapper::kAlphaFloor);
}

TEST(TrainAffine, BeatsPlainEnergyMatchingOnAffineTarget) {
  const auto data = planted_dataset(8, 200, 7, 2.0, -5.0);
  TrainerConfig c;
  c.loss_kind = LossKind::energy_matching;
  c.learning_rate = 1e-4;
  c.epochs = 300;
  const auto plain = train_surrogate(random_init(8, 2, 1), data, c);
  c.loss_kind = LossKind::energy_matching_affine;
  c.affine_learning_rate = 1e-3;
  const auto affine = train_affine(AffineWrapper(random_init(8, 2, 1)), data, c);
  EXPECT_LT(affine.final_loss, plain.final_loss);
}

TEST(TrainAffine, KindMismatchRejected) {
  const auto data = planted_dataset(5, 20, 1);
  TrainerConfig c;
  EXPECT_THROW(train_affine(AffineWrapper(random_init(5, 2, 0)), data, c), ConfigError);
  c.loss_kind = LossKind::energy_matching_affine;
  EXPECT_THROW(train_surrogate(random_init(5, 2, 0), data, c), ConfigError);
}

TEST(Optimizer, ZeroLearningRateLeavesParameters) {
  for (OptimizerKind k : {OptimizerKind::sgd, OptimizerKind::adam}) {
    Optimizer opt(k, 0.0);
    std::vector<double> p{1.0, -2.0}, g{3.0, 4.0};
    opt.step(p, g);
    EXPECT_EQ(p, (std::vector<double>{1.0, -2.0}));
  }
  EXPECT_THROW(Optimizer(OptimizerKind::sgd, -1.0), Error);
}

TEST(Optimizer, AdamFirstStepIsSignedLearningRate) {
  Optimizer opt(OptimizerKind::adam, 0.1);
  std::vector<double> p{0.0, 0.0}, g{5.0, -0.01};
  opt.step(p, g);
  EXPECT_NEAR(p[0], -0.1, 1e-8);
  EXPECT_NEAR(p[1], 0.1, 1e-5);
}
