#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pearsan/bench.hpp"
#include "pearsan/config.hpp"
#include "pearsan/diagnostics.hpp"
#include "pearsan/loop.hpp"

namespace pearsan::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

namespace fs = std::filesystem;

inline void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  body(os);
  if (!os) throw Error("write failed for '" + path.string() + "'");
}

inline void write_json(const fs::path& path, const nlohmann::json& j) {
  write_file(path, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

struct Options {
  std::string config;
  std::string outdir = "runs";
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

/// Executes run_pearsan or compare_losses per the config. Returns the run directory.
inline fs::path cmd_run(const Options& opt, std::ostream& log) {
  RunConfig cfg = load_run_config(opt.config);
  if (opt.seed) cfg.loop.seed = *opt.seed;
  const Problem problem = make_problem(cfg.problem);
  const std::string stem = fs::path(opt.config).stem().string();
  const fs::path dir = fs::path(opt.outdir) / (stem + "-seed" + std::to_string(cfg.loop.seed));

  if (cfg.mode == RunMode::run) {
    const PearsanResult r = run_pearsan(problem, cfg.loop);
    write_json(dir / "summary.json", summary_json(problem, cfg.loop, r));
    write_file(dir / "dataset.csv", [&](std::ostream& os) { write_csv(os, r.dataset); });
    for (std::size_t t = 0; t < r.anneal_traces.size(); ++t)
      write_file(dir / "traces" / ("anneal_tau" + std::to_string(t) + ".csv"),
                 [&](std::ostream& os) { write_trace_csv(os, r.anneal_traces[t]); });
    write_json(dir / "report.json", to_json(correlation_report(r.dataset, r.surrogate, cfg.loop.seed)));
    write_json(dir / "surrogate.json", to_json(r.surrogate));
    if (!opt.quiet)
      log << "best fom " << r.best.fom << " at " << to_string(r.best.z) << " (" << r.dataset.size()
          << " rows) -> " << dir.string() << '\n';
    return dir;
  }

  const ComparisonReport rep = compare_losses(problem, cfg.loop, cfg.repeats);
  nlohmann::json arms = nlohmann::json::object();
  for (const auto& arm : rep.arms) {
    arms[to_string(arm.kind)] = arm.summaries;
    write_file(dir / "histograms" / (std::string(to_string(arm.kind)) + ".csv"),
               [&](std::ostream& os) { write_histogram_csv(os, arm.final_histogram); });
  }
  write_json(dir / "summary.json", {{"mode", "compare"}, {"problem", problem.name}, {"arms", std::move(arms)}});
  write_json(dir / "report.json", to_json(rep));
  if (!opt.quiet)
    log << "pearsol >= energy_matching in " << rep.pearsol_wins_vs_em << "/" << rep.repeats
        << " repeats, welch t = " << rep.pearsol_vs_em.t << " -> " << dir.string() << '\n';
  return dir;
}

/// Runs both VCA cells and SA on identical seeded instances.
inline fs::path cmd_bench_annealers(const Options& opt, std::ostream& log) {
  RunConfig cfg = load_run_config(opt.config);
  if (opt.seed) cfg.bench.seed = *opt.seed;
  const std::string stem = fs::path(opt.config).stem().string();
  const fs::path dir = fs::path(opt.outdir) / (stem + "-bench-seed" + std::to_string(cfg.bench.seed));
  const BenchResult r = bench_annealers(cfg.bench, cfg.loop.sampler);
  write_json(dir / "summary.json", to_json(r));
  for (const auto& m : r.methods) {
    write_file(dir / ("convergence_" + m.label + ".csv"), [&](std::ostream& os) { write_convergence_csv(os, m); });
    for (std::size_t i = 0; i < m.traces.size(); ++i)
      write_file(dir / "traces" / (m.label + "_" + std::to_string(i) + ".csv"),
                 [&](std::ostream& os) { write_trace_csv(os, m.traces[i]); });
  }
  if (!opt.quiet)
    for (const auto& m : r.methods) log << m.label << ": mean best energy " << m.mean_best_by_step.back() << '\n';
  return dir;
}

/// Entry point shared by the executable and the tests.
/// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Surrogate-assisted latent optimization over binary vectors"};
  app.require_subcommand(1);
  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", opt.config, "config file")->required();
    sub->add_option("--outdir", opt.outdir, "output directory root");
    sub->add_option("--seed", opt.seed, "override loop/bench seed");
    sub->add_flag("--quiet", opt.quiet, "suppress progress output");
  };
  CLI::App* run = app.add_subcommand("run", "run the optimization loop or a loss comparison");
  CLI::App* bench = app.add_subcommand("bench", "benchmark VCA cells against simulated annealing");
  add_common(run);
  add_common(bench);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }
  try {
    if (run->parsed())
      cmd_run(opt, out);
    else
      cmd_bench_annealers(opt, out);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace pearsan::cli
