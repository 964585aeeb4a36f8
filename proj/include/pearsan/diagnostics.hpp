#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "pearsan/dataset.hpp"
#include "pearsan/losses.hpp"
#include "pearsan/polynomial.hpp"

namespace pearsan {

enum class Direction { isotonic, antitonic };

struct ViolationCount {
  std::size_t violations = 0;
  std::size_t comparable = 0;  // pairs with F_i != F_j and H_i != H_j
};

/// Pairs (i < j) whose strict order disagrees with `direction`: isotonic
/// requires dF dH > 0, antitonic dF dH < 0. Ties in either list are skipped.
inline ViolationCount isotonicity_violations(std::span<const double> f, std::span<const double> h, Direction direction) {
  if (f.size() != h.size()) throw DimensionError("isotonicity_violations", f.size(), h.size());
  if (f.size() < 2) throw Error("isotonicity_violations: need at least 2 values");
  ViolationCount c;
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = i + 1; j < f.size(); ++j) {
      const double df = f[i] - f[j], dh = h[i] - h[j];
      if (df == 0.0 || dh == 0.0) continue;
      ++c.comparable;
      const bool same_sign = (df > 0.0) == (dh > 0.0);
      if (same_sign == (direction == Direction::antitonic)) ++c.violations;
    }
  return c;
}

struct PcaResult {
  double e1 = 0.0;  // larger eigenvalue of the sample covariance
  double e2 = 0.0;
  std::array<double, 2> v1{};  // unit eigenvector of e1, (F, H) loadings
  std::array<double, 2> v2{};
  double explained_ratio = 0.0;  // e2 / e1
  int loading_sign = 0;          // sign of v1[0] * v1[1]; negative means inverse correlation
};

/// Closed-form eigendecomposition of the 2x2 sample covariance of (F, H).
inline PcaResult pca_first_two(std::span<const double> f, std::span<const double> h) {
  if (f.size() != h.size()) throw DimensionError("pca_first_two", f.size(), h.size());
  if (f.size() < 3) throw Error("pca_first_two: need at least 3 points");
  const double n = static_cast<double>(f.size());
  const double mf = detail::mean(f), mh = detail::mean(h);
  double a = 0.0, b = 0.0, c = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double x = f[i] - mf, y = h[i] - mh;
    a += x * x;
    b += x * y;
    c += y * y;
  }
  a /= n - 1.0;
  b /= n - 1.0;
  c /= n - 1.0;
  if (a == 0.0 && b == 0.0 && c == 0.0) throw DegenerateVarianceError("F,H", "covariance matrix is zero");
  const double half_tr = 0.5 * (a + c);
  const double disc = std::hypot(0.5 * (a - c), b);
  PcaResult r;
  r.e1 = half_tr + disc;
  r.e2 = std::max(half_tr - disc, 0.0);
  if (b != 0.0) {
    // (e1 - c, b) is the better-conditioned choice when a >= c, (b, e1 - a) otherwise
    double x = a >= c ? r.e1 - c : b, y = a >= c ? b : r.e1 - a;
    const double len = std::hypot(x, y);
    r.v1 = {x / len, y / len};
  } else {
    r.v1 = a >= c ? std::array<double, 2>{1.0, 0.0} : std::array<double, 2>{0.0, 1.0};
  }
  r.v2 = {-r.v1[1], r.v1[0]};
  r.explained_ratio = r.e2 / r.e1;
  const double prod = r.v1[0] * r.v1[1];
  r.loading_sign = prod > 0.0 ? 1 : (prod < 0.0 ? -1 : 0);
  return r;
}

struct CorrelationReport {
  std::size_t rows = 0;
  std::size_t subsample = 0;  // rows used for the O(N^2) statistics
  double pearson = 0.0;
  double gamma = 0.0;
  ViolationCount antitonic_violations{};
  PcaResult pca{};
};

inline constexpr std::size_t kPairwiseCap = 2000;

/// Couples surrogate energies with figures of merit over a dataset. gamma and
/// violation counts run on a fixed-seed subsample of at most kPairwiseCap rows.
inline CorrelationReport correlation_report(const LatentDataset& data, const PuboPolynomial& poly,
                                            std::uint64_t seed = 0) {
  if (data.empty()) throw Error("correlation_report: empty dataset");
  const auto f = data.foms();
  const auto h = poly.evaluate_batch(data.states());
  CorrelationReport r;
  r.rows = data.size();
  r.pearson = pearson(f, h);
  std::vector<double> fs = f, hs = h;
  if (f.size() > kPairwiseCap) {
    std::vector<std::size_t> idx(f.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(kPairwiseCap);
    std::sort(idx.begin(), idx.end());
    fs.clear();
    hs.clear();
    for (std::size_t i : idx) {
      fs.push_back(f[i]);
      hs.push_back(h[i]);
    }
  }
  r.subsample = fs.size();
  r.gamma = gamma_pairwise(fs, hs);
  r.antitonic_violations = isotonicity_violations(fs, hs, Direction::antitonic);
  r.pca = pca_first_two(f, h);
  return r;
}

inline nlohmann::json to_json(const CorrelationReport& r) {
  return {{"rows", r.rows},
          {"subsample", r.subsample},
          {"pearson", r.pearson},
          {"gamma", r.gamma},
          {"antitonic_violations", r.antitonic_violations.violations},
          {"comparable_pairs", r.antitonic_violations.comparable},
          {"pca",
           {{"e1", r.pca.e1},
            {"e2", r.pca.e2},
            {"explained_ratio", r.pca.explained_ratio},
            {"v1", r.pca.v1},
            {"loading_sign", r.pca.loading_sign}}}};
}

}  // namespace pearsan
