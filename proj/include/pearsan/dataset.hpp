#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "pearsan/bits.hpp"
#include "pearsan/error.hpp"

namespace pearsan {

struct DatasetRow {
  BitVector z;
  double fom = 0.0;
  int tau = 0;  // first dataset index Z^(tau) containing the row
};

/// Accumulated (latent vector, figure of merit) pairs. Bitstrings are unique;
/// insertion of an already-present vector is a no-op.
class LatentDataset {
 public:
  LatentDataset() = default;
  explicit LatentDataset(std::size_t n) : n_(n) {}

  std::size_t n() const noexcept { return n_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }
  const std::vector<DatasetRow>& rows() const noexcept { return rows_; }
  const DatasetRow& operator[](std::size_t i) const { return rows_[i]; }

  bool contains(BitSpan z) const { return keys_.count(to_string(z)) != 0; }

  /// Returns true when the row was added.
  bool insert(BitVector z, double fom, int tau) {
    if (z.size() != n_) throw DimensionError("dataset row", n_, z.size());
    if (!std::isfinite(fom)) throw Error("dataset: non-finite figure of merit");
    if (!keys_.insert(to_string(z)).second) return false;
    rows_.push_back({std::move(z), fom, tau});
    return true;
  }

  std::vector<BitVector> states() const {
    std::vector<BitVector> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(r.z);
    return out;
  }

  std::vector<double> foms() const {
    std::vector<double> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(r.fom);
    return out;
  }

  double mean_fom() const {
    double s = 0.0;
    for (const auto& r : rows_) s += r.fom;
    return rows_.empty() ? 0.0 : s / static_cast<double>(rows_.size());
  }

 private:
  std::size_t n_ = 0;
  std::vector<DatasetRow> rows_;
  std::unordered_set<std::string> keys_;
};

/// Shortest decimal form that round-trips the double.
inline std::string format_double(double v) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

// CSV: header "z,fom,tau"; z as a 0/1 string with character i holding bit i.
inline void write_csv(std::ostream& os, const LatentDataset& d) {
  os << "z,fom,tau\n";
  for (const auto& r : d.rows()) os << to_string(r.z) << ',' << format_double(r.fom) << ',' << r.tau << '\n';
}

inline LatentDataset read_dataset_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "z,fom,tau") throw FormatError("dataset CSV: missing header z,fom,tau");
  LatentDataset d;
  bool first = true;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string z, fom, tau;
    if (!std::getline(ss, z, ',') || !std::getline(ss, fom, ',') || !std::getline(ss, tau))
      throw FormatError("dataset CSV line " + std::to_string(lineno) + ": expected 3 fields");
    BitVector bits = from_string(z);
    if (first) {
      d = LatentDataset(bits.size());
      first = false;
    }
    try {
      if (!d.insert(std::move(bits), std::stod(fom), std::stoi(tau)))
        throw FormatError("dataset CSV line " + std::to_string(lineno) + ": duplicate latent vector");
    } catch (const std::logic_error&) {
      throw FormatError("dataset CSV line " + std::to_string(lineno) + ": bad number");
    }
  }
  return d;
}

}  // namespace pearsan
