#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "pearsan/error.hpp"

namespace pearsan {

struct WelchResult {
  double t = 0.0;
  double dof = 0.0;
  double p_two_sided = 1.0;
  double mean_a = 0.0;
  double mean_b = 0.0;
};

/// Two-sample Welch t-test with Welch-Satterthwaite degrees of freedom.
/// When both sample variances vanish the statistic is taken as 0 with p = 1
/// for equal means; unequal constant samples are rejected.
inline WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw Error("welch_t_test: each sample needs at least 2 values");
  auto moments = [](std::span<const double> x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::pair{m, ss / static_cast<double>(x.size() - 1)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double qa = va / na, qb = vb / nb;
  WelchResult r{0.0, na + nb - 2.0, 1.0, ma, mb};
  if (qa + qb == 0.0) {
    if (ma != mb) throw DegenerateVarianceError("A,B", "both samples constant with different means");
    return r;
  }
  r.t = (ma - mb) / std::sqrt(qa + qb);
  r.dof = (qa + qb) * (qa + qb) / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
  const boost::math::students_t dist(r.dof);
  r.p_two_sided = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  return r;
}

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;

  double bin_width() const { return (hi - lo) / static_cast<double>(counts.size()); }
};

/// Equal-width bins over [lo, hi]; values outside are clamped to the end bins.
inline Histogram histogram(std::span<const double> values, std::size_t bins, double lo = 0.0, double hi = 1.0) {
  if (bins == 0 || !(hi > lo)) throw Error("histogram: need bins > 0 and hi > lo");
  Histogram h{lo, hi, std::vector<std::size_t>(bins, 0)};
  for (double v : values) {
    auto k = static_cast<long long>(std::floor((v - lo) / h.bin_width()));
    k = std::clamp<long long>(k, 0, static_cast<long long>(bins) - 1);
    ++h.counts[static_cast<std::size_t>(k)];
  }
  return h;
}

}  // namespace pearsan
