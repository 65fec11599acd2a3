// fracslow command line: run experiment configs, list the catalog, export plot data.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fracslow/cli/config.hpp"
#include "fracslow/cli/plot_data.hpp"
#include "fracslow/cli/runner.hpp"

namespace cli = fracslow::cli;

int main(int argc, char** argv) {
  CLI::App app{"fracslow: slow-fast fBm experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", cli::library_version());

  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::string out;
  app.add_option("--seed", seed, "override the master seed");
  app.add_option("--workers", workers, "worker threads (0: hardware concurrency)");
  app.add_option("--out", out, "output directory (run) or file (plot-data); run defaults to $FRACSLOW_OUT or ./results");

  auto* run = app.add_subcommand("run", "run an experiment config (YAML or JSON) or a replay record");
  std::string config_path;
  run->add_option("config", config_path, "config or replay.json")->required();

  auto* list = app.add_subcommand("list", "list experiment kinds, parameters and presets");
  bool as_json = false;
  list->add_flag("--json", as_json, "machine-readable catalog");

  auto* plot = app.add_subcommand("plot-data", "long-format CSV (experiment,series,x,y,se) from result files");
  std::vector<std::string> inputs;
  plot->add_option("results", inputs, "result directories, result.json files or curve/report CSVs")->required();

  CLI11_PARSE(app, argc, argv);

  if (*list) {
    if (as_json) std::cout << cli::catalog_json().dump(2) << "\n";
    else cli::print_catalog(std::cout);
    return 0;
  }

  if (*plot) {
    try {
      const std::string csv = cli::emit_plot_data(inputs);
      if (out.empty()) {
        std::cout << csv;
      } else {
        std::ofstream f(out, std::ios::binary);
        if (!f) throw fracslow::Error("cannot write " + out);
        f << csv;
      }
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "plot-data: " << e.what() << "\n";
      return cli::exit_code_for(e);
    }
  }

  cli::RunOptions opt;
  opt.out = out;
  opt.seed = seed;
  opt.workers = workers;
  const auto res = cli::run_config_file(config_path, opt);
  if (res.exit_code == cli::kOk) {
    std::cout << res.dir.string() << ": ok (config " << res.config_hash << ")\n";
  } else {
    std::cerr << (res.dir.empty() ? config_path : res.dir.string()) << ": " << res.message << " (exit " << res.exit_code << ")\n";
  }
  return res.exit_code;
}
