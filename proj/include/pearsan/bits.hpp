#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pearsan/error.hpp"

namespace pearsan {

/// A binary latent vector. One byte per bit, each byte 0 or 1.
using BitVector = std::vector<std::uint8_t>;
using BitSpan = std::span<const std::uint8_t>;

using Rng = std::mt19937_64;

/// Little-endian integer encoding: bit 0 is the least significant.
inline std::uint64_t encode(BitSpan z) {
  if (z.size() > 64) throw Error("encode: vectors longer than 64 bits have no integer encoding");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < z.size(); ++i)
    if (z[i]) v |= std::uint64_t{1} << i;
  return v;
}

inline BitVector decode_bits(std::uint64_t v, std::size_t n) {
  BitVector z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = static_cast<std::uint8_t>((v >> i) & 1u);
  return z;
}

/// "0110..." with character i holding bit i.
inline std::string to_string(BitSpan z) {
  std::string s(z.size(), '0');
  for (std::size_t i = 0; i < z.size(); ++i)
    if (z[i]) s[i] = '1';
  return s;
}

inline BitVector from_string(std::string_view s) {
  BitVector z(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '1')
      z[i] = 1;
    else if (s[i] != '0')
      throw FormatError("bit string contains a character other than 0/1");
  }
  return z;
}

/// Lexicographic comparison of integer encodings for vectors of equal length.
/// Works for any length: compares from the most significant bit down.
inline bool encoding_less(BitSpan a, BitSpan b) {
  for (std::size_t i = a.size(); i-- > 0;)
    if (a[i] != b[i]) return a[i] < b[i];
  return false;
}

inline BitVector random_bits(std::size_t n, Rng& rng) {
  std::bernoulli_distribution coin(0.5);
  BitVector z(n);
  for (auto& b : z) b = coin(rng) ? 1 : 0;
  return z;
}

/// Derives an independent stream seed from a root seed and a tag.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t tag, std::uint64_t index = 0) {
  // splitmix64 finalizer over a mixed key
  std::uint64_t x = root ^ (tag * 0x9E3779B97F4A7C15ull) ^ (index * 0xBF58476D1CE4E5B9ull);
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace pearsan
