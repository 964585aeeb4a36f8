#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "pearsan/problem.hpp"

using namespace pearsan;

TEST(Decoder, Identity) {
  const IdentityDecoder d(5);
  const BitVector z = from_string("10110");
  const Design x = d.decode(z);
  EXPECT_EQ(x.rows, 1u);
  EXPECT_EQ(x.cols, 5u);
  EXPECT_EQ(x.cells, z);
  EXPECT_THROW(d.decode(BitVector(4, 0)), DimensionError);
}

TEST(Decoder, BlockMirrorShapeAndSymmetry) {
  const BlockMirrorDecoder d(2, 3, 2);
  EXPECT_EQ(d.n_latent(), 6u);
  const Design zero = d.decode(BitVector(6, 0));
  EXPECT_EQ(zero.rows, 8u);
  EXPECT_EQ(zero.cols, 12u);
  for (auto c : zero.cells) EXPECT_EQ(c, 0);
  Rng rng(3);
  for (int k = 0; k < 20; ++k) {
    const BitVector z = random_bits(6, rng);
    const Design x = d.decode(z);
    for (std::size_t r = 0; r < x.rows; ++r)
      for (std::size_t c = 0; c < x.cols; ++c) {
        EXPECT_EQ(x.at(r, c), x.at(x.rows - 1 - r, c));
        EXPECT_EQ(x.at(r, c), x.at(r, x.cols - 1 - c));
      }
    // top-left quadrant holds the latent bits as 2x2 tiles
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 6; ++c) EXPECT_EQ(x.at(r, c), z[(r / 2) * 3 + c / 2]);
  }
}

TEST(Decoder, BlockMirrorIsInjectiveInLatentSpace) {
  const auto d = BlockMirrorDecoder::for_latent(8, 1);
  std::set<std::vector<std::uint8_t>> seen;
  for (std::uint64_t v = 0; v < 256; ++v) seen.insert(d.decode(decode_bits(v, 8)).cells);
  EXPECT_EQ(seen.size(), 256u);
}

TEST(Decoder, ReferentiallyTransparent) {
  const auto p = make_hidden_target_problem(12, 4, 2, true);
  const BitVector z = from_string("110010101100");
  const Design first = decode(p, z);
  for (int k = 0; k < 1000; ++k) ASSERT_EQ(decode(p, z), first);
}

TEST(Decoder, XorMaskZeroesAtMask) {
  auto inner = std::make_shared<BlockMirrorDecoder>(2, 2, 2);
  const BitVector mask = from_string("1011");
  const XorMaskDecoder d(mask, inner);
  for (auto c : d.decode(mask).cells) EXPECT_EQ(c, 0);
  const BitVector z = from_string("0110");
  EXPECT_EQ(d.decode(z), inner->decode(from_string("1101")));
  EXPECT_THROW(XorMaskDecoder(BitVector(3, 0), inner), DimensionError);
}

TEST(Fom, HiddenTargetExtremes) {
  const auto p = make_hidden_target_problem(9, 1);
  ASSERT_TRUE(p.optimum.has_value());
  EXPECT_EQ(fom_of(p, *p.optimum), 1.0);
  BitVector comp = *p.optimum;
  for (auto& b : comp) b ^= 1u;
  EXPECT_EQ(fom_of(p, comp), 0.0);
  const auto px = make_hidden_target_problem(9, 1, 2, true);
  EXPECT_EQ(fom_of(px, *px.optimum), 1.0);
}

TEST(Fom, PlantedQuadraticMaxMatchesEnumeration) {
  const auto p = make_planted_quadratic_problem(12, 3);
  ASSERT_TRUE(p.max_fom.has_value());
  double best = -1.0, lo = 2.0;
  for (std::uint64_t v = 0; v < 4096; ++v) {
    const double f = fom_of(p, decode_bits(v, 12));
    best = std::max(best, f);
    lo = std::min(lo, f);
    ASSERT_LE(f, *p.max_fom);
  }
  EXPECT_EQ(best, *p.max_fom);
  EXPECT_NEAR(best, 1.0, 1e-12);
  EXPECT_NEAR(lo, 0.0, 1e-12);
  EXPECT_EQ(fom_of(p, *p.optimum), *p.max_fom);
}

TEST(Fom, PlantedQuadraticLargeNStaysInUnitRange) {
  const auto p = make_planted_quadratic_problem(30, 2);
  EXPECT_FALSE(p.max_fom.has_value());
  Rng rng(1);
  for (int k = 0; k < 200; ++k) {
    const double f = fom_of(p, random_bits(30, rng));
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
  }
}

TEST(Bootstrap, ForcedAndUnique) {
  const auto p = make_hidden_target_problem(1, 0, 1);
  Rng rng(1);
  const auto d = bootstrap_dataset(p, 2, rng);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_TRUE(d.contains(BitVector{0}));
  EXPECT_TRUE(d.contains(BitVector{1}));
  EXPECT_THROW(bootstrap_dataset(p, 3, rng), Error);
  EXPECT_THROW(bootstrap_dataset(p, 1, rng), Error);
}

TEST(Bootstrap, FomsMatchRecomputation) {
  const auto p = make_planted_quadratic_problem(10, 5);
  for (std::size_t count : {50u, 900u}) {
    Rng rng(2);
    const auto d = bootstrap_dataset(p, count, rng);
    ASSERT_EQ(d.size(), count);
    std::set<std::string> keys;
    for (const auto& row : d.rows()) {
      EXPECT_EQ(row.fom, fom_of(p, row.z));
      EXPECT_EQ(row.tau, 0);
      keys.insert(to_string(row.z));
    }
    EXPECT_EQ(keys.size(), count);
  }
}

TEST(Dataset, UniquenessAndFiniteness) {
  LatentDataset d(3);
  EXPECT_TRUE(d.insert(from_string("010"), 0.5, 0));
  EXPECT_FALSE(d.insert(from_string("010"), 0.9, 1));
  EXPECT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].fom, 0.5);
  EXPECT_THROW(d.insert(from_string("011"), NAN, 0), Error);
  EXPECT_THROW(d.insert(from_string("0111"), 0.1, 0), DimensionError);
}

TEST(Dataset, CsvRoundTrip) {
  LatentDataset d(4);
  d.insert(from_string("0101"), 0.1, 0);
  d.insert(from_string("1111"), 1.0 / 3.0, 2);
  d.insert(from_string("0000"), -2.5e-9, 7);
  std::stringstream ss;
  write_csv(ss, d);
  EXPECT_EQ(ss.str().substr(0, 10), "z,fom,tau\n");
  const auto back = read_dataset_csv(ss);
  ASSERT_EQ(back.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(back[i].z, d[i].z);
    EXPECT_EQ(back[i].fom, d[i].fom);
    EXPECT_EQ(back[i].tau, d[i].tau);
  }
  std::stringstream bad("z,fom,tau\n01x1,0.5,0\n");
  EXPECT_THROW(read_dataset_csv(bad), FormatError);
}

TEST(Bits, EncodingHelpers) {
  EXPECT_EQ(encode(from_string("1000")), 1u);
  EXPECT_EQ(encode(from_string("0001")), 8u);
  EXPECT_EQ(decode_bits(6, 4), from_string("0110"));
  EXPECT_TRUE(encoding_less(from_string("1100"), from_string("0010")));
  EXPECT_FALSE(encoding_less(from_string("0010"), from_string("1100")));
  EXPECT_THROW(from_string("0120"), FormatError);
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 2, 4));
  EXPECT_EQ(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
}
