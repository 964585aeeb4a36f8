#pragma once

#include <ostream>
#include <vector>

#include "pearsan/dataset.hpp"
#include "pearsan/error.hpp"

namespace pearsan {

/// Linear schedule T(t) = t0 (1 - t / steps); step t = 0..steps-1 runs at
/// T(t) and T(steps) = 0 is the terminal value.
struct AnnealSchedule {
  double t0 = 1.0;
  int steps = 100;

  void validate() const {
    if (steps <= 0) throw ConfigError("schedule.steps", "must be positive");
    if (!(t0 >= 0.0)) throw ConfigError("schedule.t0", "must be non-negative");
  }

  double temperature(int t) const {
    if (t >= steps) return 0.0;
    return t0 * (1.0 - static_cast<double>(t) / static_cast<double>(steps));
  }
};

struct TraceRecord {
  int step = 0;
  double temperature = 0.0;
  double free_energy = 0.0;
  double mean_energy = 0.0;
  double entropy = 0.0;
  double best_energy = 0.0;  // best energy seen up to and including this step
};

using RunTrace = std::vector<TraceRecord>;

// CSV columns: step,temperature,free_energy,mean_energy,entropy
inline void write_trace_csv(std::ostream& os, const RunTrace& trace) {
  os << "step,temperature,free_energy,mean_energy,entropy\n";
  for (const auto& r : trace)
    os << r.step << ',' << format_double(r.temperature) << ',' << format_double(r.free_energy) << ','
       << format_double(r.mean_energy) << ',' << format_double(r.entropy) << '\n';
}

}  // namespace pearsan
