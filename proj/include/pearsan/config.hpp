#pragma once

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "pearsan/error.hpp"
#include "pearsan/loop.hpp"
#include "pearsan/problem.hpp"
#include "pearsan/sampler_sa.hpp"

namespace pearsan {

/// Flat INI-style document: "[section]" headers, "key = value" lines,
/// '#' or ';' comments. Keys are addressed as "section.key".
class IniDocument {
 public:
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };

  static IniDocument parse(std::istream& is) {
    IniDocument doc;
    std::string raw, section;
    std::size_t lineno = 0;
    while (std::getline(is, raw)) {
      ++lineno;
      std::string_view line = strip(cut_comment(raw));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError("", "unterminated section header", lineno);
        section = std::string(strip(line.substr(1, line.size() - 2)));
        if (section.empty()) throw ConfigError("", "empty section name", lineno);
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ConfigError("", "expected 'key = value'", lineno);
      const std::string key(strip(line.substr(0, eq)));
      if (key.empty()) throw ConfigError("", "missing key before '='", lineno);
      if (section.empty()) throw ConfigError(key, "key outside of any [section]", lineno);
      const std::string full = section + "." + key;
      if (doc.entries_.count(full)) throw ConfigError(full, "duplicate key", lineno);
      doc.entries_[full] = {std::string(strip(line.substr(eq + 1))), lineno};
    }
    return doc;
  }

  static IniDocument parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("", "cannot read config file '" + path + "'");
    return parse(is);
  }

  const std::map<std::string, Entry>& entries() const noexcept { return entries_; }
  const Entry* find(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }
  std::size_t line_of(const std::string& key) const {
    const Entry* e = find(key);
    return e ? e->line : 0;
  }

 private:
  static std::string_view cut_comment(std::string_view s) {
    const auto p = s.find_first_of("#;");
    return p == std::string_view::npos ? s : s.substr(0, p);
  }
  static std::string_view strip(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, Entry> entries_;
};

struct ProblemConfig {
  std::string name = "planted-quadratic";
  std::size_t n = 12;
  std::uint64_t seed = 0;
  std::size_t tile = 2;
  bool xor_mask = false;
};

inline Problem make_problem(const ProblemConfig& c) {
  if (c.n == 0) throw ConfigError("problem.n", "must be positive");
  if (c.name == "planted-quadratic") return make_planted_quadratic_problem(c.n, c.seed);
  if (c.name == "hidden-target") return make_hidden_target_problem(c.n, c.seed, c.tile, c.xor_mask);
  throw ConfigError("problem.name", "unknown problem '" + c.name + "' (expected planted-quadratic or hidden-target)");
}

struct BenchConfig {
  std::size_t instances = 20;
  std::size_t n = 16;
  int steps = 200;
  double t0 = 1.0;
  int order = 2;
  std::uint64_t seed = 0;

  void validate() const {
    if (instances == 0) throw ConfigError("bench.instances", "must be positive");
    if (n == 0) throw ConfigError("bench.n", "must be positive");
    if (steps <= 0) throw ConfigError("bench.steps", "must be positive");
    if (!(t0 > 0.0)) throw ConfigError("bench.t0", "must be positive");
    if (order < 1 || order > kMaxOrder) throw ConfigError("bench.order", "must be 1, 2 or 3");
  }
};

enum class RunMode { run, compare };

struct RunConfig {
  ProblemConfig problem{};
  LoopConfig loop{};
  RunMode mode = RunMode::run;
  std::size_t repeats = 10;
  BenchConfig bench{};
};

namespace detail {

template <class T>
T parse_number(const std::string& key, const IniDocument::Entry& e) {
  T v{};
  const char* b = e.value.data();
  const char* end = b + e.value.size();
  auto [p, ec] = std::from_chars(b, end, v);
  if (ec != std::errc{} || p != end) throw ConfigError(key, "cannot parse '" + e.value + "' as a number", e.line);
  return v;
}

// from_chars for double is missing in some standard libraries; strtod with a full-consumption check instead.
template <>
inline double parse_number<double>(const std::string& key, const IniDocument::Entry& e) {
  char* end = nullptr;
  const double v = std::strtod(e.value.c_str(), &end);
  if (e.value.empty() || end != e.value.c_str() + e.value.size() || !std::isfinite(v))
    throw ConfigError(key, "cannot parse '" + e.value + "' as a finite real", e.line);
  return v;
}

inline bool parse_bool(const std::string& key, const IniDocument::Entry& e) {
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  throw ConfigError(key, "expected true/false, got '" + e.value + "'", e.line);
}

template <class E>
E parse_enum(const std::string& key, const IniDocument::Entry& e, std::initializer_list<std::pair<const char*, E>> opts) {
  std::string names;
  for (const auto& [name, v] : opts) {
    if (e.value == name) return v;
    names += names.empty() ? name : std::string(", ") + name;
  }
  throw ConfigError(key, "unknown value '" + e.value + "' (expected one of: " + names + ")", e.line);
}

}  // namespace detail

/// Maps a parsed document onto RunConfig. Absent keys keep their defaults;
/// unknown keys and cross-field violations raise ConfigError with the line.
inline RunConfig run_config_from(const IniDocument& doc) {
  using detail::parse_bool;
  using detail::parse_enum;
  using detail::parse_number;
  RunConfig c;
  using Setter = std::function<void(const std::string&, const IniDocument::Entry&)>;
  auto uns = [](std::size_t& dst) -> Setter {
    return [&dst](const std::string& k, const IniDocument::Entry& e) { dst = parse_number<std::size_t>(k, e); };
  };
  auto u64 = [](std::uint64_t& dst) -> Setter {
    return [&dst](const std::string& k, const IniDocument::Entry& e) { dst = parse_number<std::uint64_t>(k, e); };
  };
  auto integer = [](int& dst) -> Setter {
    return [&dst](const std::string& k, const IniDocument::Entry& e) { dst = parse_number<int>(k, e); };
  };
  auto real = [](double& dst) -> Setter {
    return [&dst](const std::string& k, const IniDocument::Entry& e) { dst = parse_number<double>(k, e); };
  };
  auto flag = [](bool& dst) -> Setter {
    return [&dst](const std::string& k, const IniDocument::Entry& e) { dst = parse_bool(k, e); };
  };
  auto optimizer = [](OptimizerKind& dst) -> Setter {
    return [&dst](const std::string& k, const IniDocument::Entry& e) {
      dst = parse_enum<OptimizerKind>(k, e, {{"sgd", OptimizerKind::sgd}, {"adam", OptimizerKind::adam}});
    };
  };

  LoopConfig& L = c.loop;
  const std::map<std::string, Setter> setters = {
      {"problem.name", [&](const std::string&, const IniDocument::Entry& e) { c.problem.name = e.value; }},
      {"problem.n", uns(c.problem.n)},
      {"problem.seed", u64(c.problem.seed)},
      {"problem.tile", uns(c.problem.tile)},
      {"problem.xor_mask", flag(c.problem.xor_mask)},
      {"trainer.loss",
       [&](const std::string& k, const IniDocument::Entry& e) {
         L.trainer.loss_kind = parse_enum<LossKind>(k, e,
                                                    {{"pearsol", LossKind::pearsol},
                                                     {"energy_matching", LossKind::energy_matching},
                                                     {"energy_matching_affine", LossKind::energy_matching_affine}});
       }},
      {"trainer.epochs", integer(L.trainer.epochs)},
      {"trainer.learning_rate", real(L.trainer.learning_rate)},
      {"trainer.affine_learning_rate", real(L.trainer.affine_learning_rate)},
      {"trainer.batch_size", uns(L.trainer.batch_size)},
      {"trainer.optimizer", optimizer(L.trainer.optimizer)},
      {"trainer.lambda_a", real(L.trainer.weights.lambda_a)},
      {"trainer.lambda_b", real(L.trainer.weights.lambda_b)},
      {"trainer.lambda_c", real(L.trainer.weights.lambda_c)},
      {"trainer.reinit", flag(L.trainer.reinit)},
      {"schedule.t0", real(L.schedule.t0)},
      {"schedule.steps", integer(L.schedule.steps)},
      {"sampler.hidden_dim", uns(L.sampler.hidden_dim)},
      {"sampler.cell",
       [&](const std::string& k, const IniDocument::Entry& e) {
         L.sampler.cell = parse_enum<CellKind>(
             k, e, {{"concatenation", CellKind::concatenation}, {"tensorized", CellKind::tensorized}});
       }},
      {"sampler.learning_rate", real(L.sampler.learning_rate)},
      {"sampler.n_samples", uns(L.sampler.n_samples)},
      {"sampler.optimizer", optimizer(L.sampler.optimizer)},
      {"loop.mode",
       [&](const std::string& k, const IniDocument::Entry& e) {
         c.mode = parse_enum<RunMode>(k, e, {{"run", RunMode::run}, {"compare", RunMode::compare}});
       }},
      {"loop.tau_max", integer(L.tau_max)},
      {"loop.n_thresh", integer(L.n_thresh)},
      {"loop.bootstrap_size", uns(L.bootstrap_size)},
      {"loop.surrogate_order", integer(L.surrogate_order)},
      {"loop.seed", u64(L.seed)},
      {"loop.repeats", uns(c.repeats)},
      {"bench.instances", uns(c.bench.instances)},
      {"bench.n", uns(c.bench.n)},
      {"bench.steps", integer(c.bench.steps)},
      {"bench.t0", real(c.bench.t0)},
      {"bench.order", integer(c.bench.order)},
      {"bench.seed", u64(c.bench.seed)},
  };

  for (const auto& [key, entry] : doc.entries()) {
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(key, "unknown key", entry.line);
    it->second(key, entry);
  }
  try {
    L.validate();
    c.bench.validate();
    if (c.mode == RunMode::compare && c.repeats < 2) throw ConfigError("loop.repeats", "compare needs at least 2");
  } catch (const ConfigError& e) {
    if (e.line() != 0) throw;
    const std::size_t line = doc.line_of(e.field());
    throw ConfigError(e.field(), e.message(), line);
  }
  return c;
}

inline RunConfig load_run_config(const std::string& path) { return run_config_from(IniDocument::parse_file(path)); }

}  // namespace pearsan
