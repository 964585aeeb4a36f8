#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pearsan/bits.hpp"
#include "pearsan/error.hpp"

namespace pearsan {

inline constexpr int kMaxOrder = 3;
inline constexpr std::size_t kBruteForceLimit = 24;

/// A product of distinct binary variables, indices strictly increasing.
struct Monomial {
  std::array<std::uint32_t, kMaxOrder> idx{};
  std::uint8_t degree = 0;

  Monomial() = default;
  Monomial(std::initializer_list<std::uint32_t> indices) {
    if (indices.size() == 0 || indices.size() > kMaxOrder)
      throw Error("monomial degree must be in [1, 3]");
    degree = static_cast<std::uint8_t>(indices.size());
    std::copy(indices.begin(), indices.end(), idx.begin());
  }
  static Monomial from(std::span<const std::uint32_t> indices) {
    if (indices.empty() || indices.size() > kMaxOrder)
      throw Error("monomial degree must be in [1, 3]");
    Monomial m;
    m.degree = static_cast<std::uint8_t>(indices.size());
    std::copy(indices.begin(), indices.end(), m.idx.begin());
    return m;
  }

  std::span<const std::uint32_t> indices() const { return {idx.data(), degree}; }

  bool contains(std::uint32_t i) const {
    for (std::uint8_t k = 0; k < degree; ++k)
      if (idx[k] == i) return true;
    return false;
  }

  /// Value of the product on z (0 or 1).
  bool active(BitSpan z) const {
    for (std::uint8_t k = 0; k < degree; ++k)
      if (!z[idx[k]]) return false;
    return true;
  }

  // Degree first, then lexicographic: linear terms precede pairs precede triples.
  friend bool operator<(const Monomial& a, const Monomial& b) {
    if (a.degree != b.degree) return a.degree < b.degree;
    return std::lexicographical_compare(a.idx.begin(), a.idx.begin() + a.degree, b.idx.begin(),
                                        b.idx.begin() + b.degree);
  }
  friend bool operator==(const Monomial& a, const Monomial& b) {
    return a.degree == b.degree && std::equal(a.idx.begin(), a.idx.begin() + a.degree, b.idx.begin());
  }
};

struct Term {
  Monomial monomial;
  double coefficient = 0.0;
};

/// Pseudo-boolean polynomial h(z) = sum_s c_s prod_{i in s} z_i over {0,1}^n,
/// with monomials of degree 1..order and no constant term.
///
/// Terms are stored in canonical order (see Monomial::operator<). Coefficients
/// are mutable through mutable_coefficients(); the monomial set is fixed at
/// construction.
class PuboPolynomial {
 public:
  PuboPolynomial() = default;

  PuboPolynomial(std::size_t n, int order, std::vector<Term> terms) : n_(n), order_(order) {
    if (n == 0) throw Error("polynomial: n must be positive");
    if (order < 1 || order > kMaxOrder) throw Error("polynomial: order must be in {1,2,3}");
    std::sort(terms.begin(), terms.end(),
              [](const Term& a, const Term& b) { return a.monomial < b.monomial; });
    monomials_.reserve(terms.size());
    coefficients_.reserve(terms.size());
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const Monomial& m = terms[t].monomial;
      if (m.degree == 0 || m.degree > order)
        throw Error("polynomial: monomial degree " + std::to_string(m.degree) +
                    " outside [1, order=" + std::to_string(order) + "]");
      for (std::uint8_t k = 0; k < m.degree; ++k) {
        if (m.idx[k] >= n) throw Error("polynomial: index " + std::to_string(m.idx[k]) + " out of range");
        if (k > 0 && m.idx[k] <= m.idx[k - 1])
          throw Error("polynomial: monomial indices must be strictly increasing");
      }
      if (t > 0 && terms[t - 1].monomial == m) throw Error("polynomial: duplicate monomial");
      if (!std::isfinite(terms[t].coefficient)) throw Error("polynomial: non-finite coefficient");
      monomials_.push_back(m);
      coefficients_.push_back(terms[t].coefficient);
    }
    build_incidence();
  }

  /// All monomials of degree 1..order over n variables, coefficients zero.
  static PuboPolynomial dense(std::size_t n, int order) {
    std::vector<Term> terms;
    for (std::uint32_t i = 0; i < n; ++i) terms.push_back({Monomial{i}, 0.0});
    if (order >= 2)
      for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j) terms.push_back({Monomial{i, j}, 0.0});
    if (order >= 3)
      for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j)
          for (std::uint32_t k = j + 1; k < n; ++k) terms.push_back({Monomial{i, j, k}, 0.0});
    return PuboPolynomial(n, order, std::move(terms));
  }

  std::size_t n() const noexcept { return n_; }
  int order() const noexcept { return order_; }
  std::size_t size() const noexcept { return monomials_.size(); }

  std::span<const Monomial> monomials() const { return monomials_; }
  std::span<const double> coefficients() const { return coefficients_; }
  std::span<double> mutable_coefficients() { return coefficients_; }

  /// Coefficient of a monomial, 0 if absent.
  double coefficient(const Monomial& m) const {
    auto it = std::lower_bound(monomials_.begin(), monomials_.end(), m);
    if (it == monomials_.end() || !(*it == m)) return 0.0;
    return coefficients_[static_cast<std::size_t>(it - monomials_.begin())];
  }

  double coeff_sq_norm() const {
    double s = 0.0;
    for (double c : coefficients_) s += c * c;
    return s;
  }

  /// Term indices whose monomial contains variable i.
  std::span<const std::uint32_t> incident(std::size_t i) const { return incidence_[i]; }

  double evaluate(BitSpan z) const {
    check(z);
    double e = 0.0;
    for (std::size_t t = 0; t < monomials_.size(); ++t)
      if (monomials_[t].active(z)) e += coefficients_[t];
    return e;
  }

  std::vector<double> evaluate_batch(std::span<const BitVector> batch) const {
    std::vector<double> out;
    out.reserve(batch.size());
    for (const auto& z : batch) out.push_back(evaluate(z));
    return out;
  }

  /// dh/dc_s = prod_{i in s} z_i, aligned with monomials().
  std::vector<double> gradient_wrt_coefficients(BitSpan z) const {
    check(z);
    std::vector<double> g(monomials_.size());
    for (std::size_t t = 0; t < monomials_.size(); ++t) g[t] = monomials_[t].active(z) ? 1.0 : 0.0;
    return g;
  }

  /// h(z with bit i flipped) - h(z), touching only terms that contain i.
  double flip_delta(BitSpan z, std::size_t i) const {
    check(z);
    double partial = 0.0;
    for (std::uint32_t t : incidence_[i]) {
      const Monomial& m = monomials_[t];
      bool others = true;
      for (std::uint8_t k = 0; k < m.degree; ++k)
        if (m.idx[k] != i && !z[m.idx[k]]) {
          others = false;
          break;
        }
      if (others) partial += coefficients_[t];
    }
    return z[i] ? -partial : partial;
  }

 private:
  void check(BitSpan z) const {
    if (z.size() != n_) throw DimensionError("polynomial", n_, z.size());
  }

  void build_incidence() {
    incidence_.assign(n_, {});
    for (std::size_t t = 0; t < monomials_.size(); ++t)
      for (std::uint32_t i : monomials_[t].indices()) incidence_[i].push_back(static_cast<std::uint32_t>(t));
  }

  std::size_t n_ = 0;
  int order_ = 0;
  std::vector<Monomial> monomials_;
  std::vector<double> coefficients_;
  std::vector<std::vector<std::uint32_t>> incidence_;
};

/// alpha * base(z) + beta with alpha kept strictly positive.
class AffineWrapper {
 public:
  static constexpr double kAlphaFloor = 1e-6;

  AffineWrapper() = default;
  explicit AffineWrapper(PuboPolynomial base, double alpha = 1.0, double beta = 0.0)
      : base_(std::move(base)), beta_(beta) {
    set_alpha(alpha);
  }

  const PuboPolynomial& base() const noexcept { return base_; }
  PuboPolynomial& base() noexcept { return base_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }

  void set_alpha(double a) {
    if (!std::isfinite(a)) throw Error("affine wrapper: non-finite alpha");
    alpha_ = std::max(a, kAlphaFloor);
  }
  void set_beta(double b) { beta_ = b; }

  double evaluate(BitSpan z) const { return alpha_ * base_.evaluate(z) + beta_; }

  /// alpha * base as a plain polynomial. Drops beta, which shifts every state
  /// equally and so leaves samplers and minimizers unchanged.
  PuboPolynomial scaled_polynomial() const {
    PuboPolynomial p = base_;
    for (double& c : p.mutable_coefficients()) c *= alpha_;
    return p;
  }

 private:
  PuboPolynomial base_;
  double alpha_ = 1.0;
  double beta_ = 0.0;
};

/// Dense polynomial with i.i.d. standard normal coefficients rescaled to unit 2-norm.
inline PuboPolynomial random_init(std::size_t n, int order, std::uint64_t seed) {
  PuboPolynomial p = PuboPolynomial::dense(n, order);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto c = p.mutable_coefficients();
  double sq = 0.0;
  for (double& x : c) {
    x = normal(rng);
    sq += x * x;
  }
  const double scale = 1.0 / std::sqrt(sq);
  for (double& x : c) x *= scale;
  return p;
}

struct Minimum {
  BitVector state;
  double energy = 0.0;
};

/// Exhaustive minimization over {0,1}^n, n <= 24. Ties go to the smallest
/// little-endian integer encoding.
///
/// Walks states in Gray-code order with incremental deltas and re-evaluates
/// any candidate within a small window of the incumbent exactly, so drift in
/// the running sum cannot change the answer.
inline Minimum brute_force_minimum(const PuboPolynomial& poly) {
  const std::size_t n = poly.n();
  if (n > kBruteForceLimit)
    throw Error("brute_force_minimum: n = " + std::to_string(n) + " exceeds enumeration limit " +
                std::to_string(kBruteForceLimit));
  double scale = 0.0;
  for (double c : poly.coefficients()) scale += std::abs(c);
  const double window = 1e-9 * (1.0 + scale);

  BitVector z(n, 0);
  double running = 0.0;
  std::uint64_t best_code = 0;
  double best = 0.0;  // h(0) = 0
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t g = 1; g < total; ++g) {
    const auto bit = static_cast<std::size_t>(__builtin_ctzll(g));
    running += poly.flip_delta(z, bit);
    z[bit] ^= 1u;
    if (running <= best + window) {
      const double exact = poly.evaluate(z);
      const std::uint64_t code = encode(z);
      if (exact < best || (exact == best && code < best_code)) {
        best = exact;
        best_code = code;
      }
      running = exact;
    }
  }
  return {decode_bits(best_code, n), best};
}

// JSON: {"n": int, "order": int, "terms": [{"idx": [..], "c": float}, ...]}
inline nlohmann::json to_json(const PuboPolynomial& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (std::size_t t = 0; t < p.size(); ++t) {
    const auto idx = p.monomials()[t].indices();
    terms.push_back({{"idx", std::vector<std::uint32_t>(idx.begin(), idx.end())},
                     {"c", p.coefficients()[t]}});
  }
  return {{"n", p.n()}, {"order", p.order()}, {"terms", std::move(terms)}};
}

inline PuboPolynomial polynomial_from_json(const nlohmann::json& j) {
  try {
    const auto n = j.at("n").get<std::size_t>();
    const int order = j.at("order").get<int>();
    std::vector<Term> terms;
    for (const auto& t : j.at("terms")) {
      const auto idx = t.at("idx").get<std::vector<std::uint32_t>>();
      if (idx.empty() || idx.size() > kMaxOrder) throw FormatError("polynomial JSON: term degree outside [1, 3]");
      terms.push_back({Monomial::from(idx), t.at("c").get<double>()});
    }
    return PuboPolynomial(n, order, std::move(terms));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("polynomial JSON: ") + e.what());
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError(std::string("polynomial JSON: ") + e.what());
  }
}

}  // namespace pearsan
