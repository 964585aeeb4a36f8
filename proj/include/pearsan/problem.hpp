#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pearsan/bits.hpp"
#include "pearsan/dataset.hpp"
#include "pearsan/error.hpp"
#include "pearsan/polynomial.hpp"

namespace pearsan {

/// Binary design on a rows x cols grid, row-major.
struct Design {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> cells;

  std::size_t size() const noexcept { return cells.size(); }
  std::uint8_t at(std::size_t r, std::size_t c) const { return cells[r * cols + c]; }
  friend bool operator==(const Design&, const Design&) = default;
};

/// Deterministic latent-to-design map.
class Decoder {
 public:
  virtual ~Decoder() = default;
  virtual std::size_t n_latent() const = 0;
  virtual std::string name() const = 0;
  virtual Design decode(BitSpan z) const = 0;

 protected:
  void check(BitSpan z) const {
    if (z.size() != n_latent()) throw DimensionError("decoder " + name(), n_latent(), z.size());
  }
};

class IdentityDecoder final : public Decoder {
 public:
  explicit IdentityDecoder(std::size_t n) : n_(n) {}
  std::size_t n_latent() const override { return n_; }
  std::string name() const override { return "identity"; }
  Design decode(BitSpan z) const override {
    check(z);
    return {1, n_, std::vector<std::uint8_t>(z.begin(), z.end())};
  }

 private:
  std::size_t n_;
};

/// Latent bits fill a rows x cols quadrant row-major; each bit becomes a
/// tile x tile block; the quadrant is mirrored about both axes into a
/// (2 rows tile) x (2 cols tile) design.
class BlockMirrorDecoder final : public Decoder {
 public:
  BlockMirrorDecoder(std::size_t rows, std::size_t cols, std::size_t tile) : rows_(rows), cols_(cols), tile_(tile) {
    if (rows == 0 || cols == 0 || tile == 0) throw Error("block decoder: dimensions must be positive");
  }
  /// Quadrant shape chosen as the most square factorization of n.
  static BlockMirrorDecoder for_latent(std::size_t n, std::size_t tile) {
    std::size_t r = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
    while (r > 1 && n % r != 0) --r;
    return BlockMirrorDecoder(std::max<std::size_t>(r, 1), n / std::max<std::size_t>(r, 1), tile);
  }

  std::size_t n_latent() const override { return rows_ * cols_; }
  std::string name() const override { return "block-mirror"; }

  Design decode(BitSpan z) const override {
    check(z);
    const std::size_t qr = rows_ * tile_, qc = cols_ * tile_;
    Design d{2 * qr, 2 * qc, std::vector<std::uint8_t>(4 * qr * qc)};
    for (std::size_t r = 0; r < qr; ++r)
      for (std::size_t c = 0; c < qc; ++c) {
        const std::uint8_t v = z[(r / tile_) * cols_ + c / tile_];
        d.cells[r * d.cols + c] = v;
        d.cells[r * d.cols + (d.cols - 1 - c)] = v;
        d.cells[(d.rows - 1 - r) * d.cols + c] = v;
        d.cells[(d.rows - 1 - r) * d.cols + (d.cols - 1 - c)] = v;
      }
    return d;
  }

 private:
  std::size_t rows_, cols_, tile_;
};

/// Decodes z XOR mask through an inner decoder; decode(mask) is the inner
/// decoder's all-zeros design.
class XorMaskDecoder final : public Decoder {
 public:
  XorMaskDecoder(BitVector mask, std::shared_ptr<const Decoder> inner) : mask_(std::move(mask)), inner_(std::move(inner)) {
    if (mask_.size() != inner_->n_latent()) throw DimensionError("xor-mask decoder", inner_->n_latent(), mask_.size());
  }
  std::size_t n_latent() const override { return mask_.size(); }
  std::string name() const override { return "xor-mask(" + inner_->name() + ")"; }
  const BitVector& mask() const noexcept { return mask_; }

  Design decode(BitSpan z) const override {
    check(z);
    BitVector x(z.begin(), z.end());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] ^= mask_[i];
    return inner_->decode(x);
  }

 private:
  BitVector mask_;
  std::shared_ptr<const Decoder> inner_;
};

/// Pure design -> figure of merit map.
class FomOracle {
 public:
  virtual ~FomOracle() = default;
  virtual double operator()(const Design& design) const = 0;
};

/// 1 - hamming(design, target) / size.
class HiddenTargetFom final : public FomOracle {
 public:
  explicit HiddenTargetFom(Design target) : target_(std::move(target)) {}
  const Design& target() const noexcept { return target_; }
  double operator()(const Design& d) const override {
    if (d.rows != target_.rows || d.cols != target_.cols) throw DimensionError("hidden-target fom", target_.size(), d.size());
    std::size_t diff = 0;
    for (std::size_t i = 0; i < d.cells.size(); ++i) diff += d.cells[i] != target_.cells[i];
    return 1.0 - static_cast<double>(diff) / static_cast<double>(d.size());
  }

 private:
  Design target_;
};

/// (upper - h*(x)) / (upper - lower) for a hidden polynomial h* read off a
/// 1 x n design. With exact extremes (n <= 24) the range is exactly [0, 1];
/// otherwise lower/upper are the sums of negative/positive coefficients,
/// which bound h* from both sides.
class PlantedPolynomialFom final : public FomOracle {
 public:
  explicit PlantedPolynomialFom(PuboPolynomial hidden) : hidden_(std::move(hidden)) {
    if (hidden_.n() <= kBruteForceLimit) {
      PuboPolynomial neg = hidden_;
      for (double& c : neg.mutable_coefficients()) c = -c;
      lower_ = brute_force_minimum(hidden_).energy;
      upper_ = -brute_force_minimum(neg).energy;
    } else {
      for (double c : hidden_.coefficients()) (c < 0 ? lower_ : upper_) += c;
    }
    if (!(upper_ > lower_)) throw Error("planted fom: hidden polynomial is constant");
  }

  const PuboPolynomial& hidden() const noexcept { return hidden_; }
  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }

  double operator()(const Design& d) const override {
    return (upper_ - hidden_.evaluate(d.cells)) / (upper_ - lower_);
  }

 private:
  PuboPolynomial hidden_;
  double lower_ = 0.0;
  double upper_ = 0.0;
};

struct Problem {
  std::string name;
  std::shared_ptr<const Decoder> decoder;
  std::shared_ptr<const FomOracle> fom;
  std::optional<double> max_fom;       // exact optimum when known
  std::optional<BitVector> optimum;    // a latent vector attaining max_fom

  std::size_t n_latent() const { return decoder->n_latent(); }
};

inline Design decode(const Problem& p, BitSpan z) { return p.decoder->decode(z); }

inline double fom_of(const Problem& p, BitSpan z) {
  const double f = (*p.fom)(p.decoder->decode(z));
  if (!std::isfinite(f)) throw Error("fom_of: oracle returned a non-finite value");
  return f;
}

/// Hidden target design decode(z*) for a random z*, behind the block-mirror
/// decoder (optionally composed with a random XOR mask).
inline Problem make_hidden_target_problem(std::size_t n, std::uint64_t seed, std::size_t tile = 2, bool xor_mask = false) {
  Rng rng(seed);
  std::shared_ptr<const Decoder> dec = std::make_shared<BlockMirrorDecoder>(BlockMirrorDecoder::for_latent(n, tile));
  if (xor_mask) dec = std::make_shared<XorMaskDecoder>(random_bits(n, rng), dec);
  BitVector star = random_bits(n, rng);
  auto fom = std::make_shared<HiddenTargetFom>(dec->decode(star));
  return {"hidden-target", dec, fom, 1.0, star};
}

/// Planted quadratic: identity decoder, FOM a rescaled negated random
/// second-order polynomial, optimum at its brute-force minimizer.
inline Problem make_planted_quadratic_problem(std::size_t n, std::uint64_t seed, int order = 2) {
  PuboPolynomial hidden = random_init(n, order, derive_seed(seed, 0x504c414e54));
  auto dec = std::make_shared<IdentityDecoder>(n);
  auto fom = std::make_shared<PlantedPolynomialFom>(hidden);
  Problem p{"planted-quadratic", dec, fom, std::nullopt, std::nullopt};
  if (n <= kBruteForceLimit) {
    Minimum m = brute_force_minimum(hidden);
    p.max_fom = fom_of(p, m.state);
    p.optimum = std::move(m.state);
  }
  return p;
}

/// `count` distinct uniform latent vectors with their figures of merit, tagged tau = 0.
inline LatentDataset bootstrap_dataset(const Problem& problem, std::size_t count, Rng& rng) {
  const std::size_t n = problem.n_latent();
  if (count < 2) throw Error("bootstrap_dataset: count must be at least 2");
  if (n < 63 && count > (std::size_t{1} << n))
    throw Error("bootstrap_dataset: cannot draw " + std::to_string(count) + " distinct vectors from 2^" +
                std::to_string(n) + " states");
  LatentDataset d(n);
  if (n <= 20 && 2 * count > (std::size_t{1} << n)) {
    // dense regime: sample without replacement from the full enumeration
    std::vector<std::uint64_t> all(std::size_t{1} << n);
    std::iota(all.begin(), all.end(), std::uint64_t{0});
    std::shuffle(all.begin(), all.end(), rng);
    for (std::size_t i = 0; i < count; ++i) {
      BitVector z = decode_bits(all[i], n);
      const double f = fom_of(problem, z);
      d.insert(std::move(z), f, 0);
    }
    return d;
  }
  while (d.size() < count) {
    BitVector z = random_bits(n, rng);
    if (d.contains(z)) continue;
    const double f = fom_of(problem, z);
    d.insert(std::move(z), f, 0);
  }
  return d;
}

}  // namespace pearsan
