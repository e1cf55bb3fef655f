#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "acceptance_suite.hpp"
#include "fcma/config.hpp"
#include "fcma/plot.hpp"
#include "fcma/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"F-CMA finite-sum optimization benchmark harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::uint64_t> seed_override;
  std::string out_override;
  bool dense_override = false;
  auto* run_cmd = app.add_subcommand("run", "run an experiment config");
  run_cmd->add_option("config", config_path, "config file path")->required();
  run_cmd->add_option("--seed", seed_override, "override seed list");
  run_cmd->add_option("--out", out_override, "override output directory");
  run_cmd->add_flag("--dense-trace", dense_override,
                    "force a full evaluation every epoch for plotting");

  std::vector<std::string> trace_paths;
  std::string plot_out = "plot.svg";
  bool log_scale = false;
  auto* plot_cmd = app.add_subcommand("plot", "plot loss curves from traces");
  plot_cmd->add_option("traces", trace_paths, "trace CSV files")->required();
  plot_cmd->add_option("--out", plot_out, "output SVG path");
  plot_cmd->add_flag("--log", log_scale, "log10 y-axis");

  auto* selftest_cmd =
      app.add_subcommand("selftest", "run the acceptance suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      fcma::ExperimentConfig cfg = fcma::parse_config(config_path);
      if (!seed_override.empty()) cfg.seeds = seed_override;
      if (!out_override.empty()) cfg.out_dir = out_override;
      if (dense_override) cfg.dense_trace = true;
      const fcma::MatrixResult res = fcma::run_matrix(cfg);
      for (const fcma::RunSummary& s : res.runs) {
        std::cout << s.optimizer << " seed=" << s.seed << " ";
        if (s.ok)
          std::cout << "f=" << s.final_f << " |grad|=" << s.final_grad_norm
                    << " epochs=" << s.epochs << " stop=" << s.stop_reason
                    << "\n";
        else
          std::cout << "FAILED: " << s.error << "\n";
      }
      std::cout << "summary: " << cfg.out_dir << "/summary.json\n";
      return res.all_ok ? 0 : 1;
    }
    if (*plot_cmd) {
      std::vector<fcma::PlotSeries> series;
      for (const std::string& p : trace_paths)
        for (auto& s : fcma::load_trace_series(p)) series.push_back(std::move(s));
      fcma::emit_plot(series, plot_out, log_scale);
      std::cout << "wrote " << plot_out << "\n";
      return 0;
    }
    if (*selftest_cmd) {
      return run_acceptance_suite(std::cout) == 0 ? 0 : 1;
    }
  } catch (const fcma::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const fcma::RunError& e) {
    std::cerr << "run error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
