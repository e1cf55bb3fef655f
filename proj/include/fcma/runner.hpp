#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "fcma/baselines.hpp"
#include "fcma/config.hpp"
#include "fcma/fcma.hpp"
#include "fcma/trace.hpp"

namespace fcma {

/// Stable per-run seed: FNV-1a over the optimizer name folded into the
/// experiment seed, so every optimizer gets an independent stream.
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 const std::string& optimizer) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : optimizer) {
    h ^= c;
    h *= 1099511628211ull;
  }
  h ^= seed;
  h *= 1099511628211ull;
  return h;
}

struct RunSummary {
  std::string optimizer;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double final_f = 0;
  double final_grad_norm = 0;
  int epochs = 0;
  std::string stop_reason;
  std::optional<int> k_star_loss;  // epoch of best f_true, dense mode only
  double wall_ms = 0;
  EvalCounters counters;
  std::string trace_file;
};

struct MatrixResult {
  std::vector<RunSummary> runs;
  bool all_ok = true;
};

inline std::optional<int> best_loss_epoch(const Trace& trace) {
  std::optional<int> best;
  double best_f = 0;
  for (const TraceRecord& r : trace) {
    if (!r.f_true) continue;
    if (!best || *r.f_true < best_f) {
      best = r.epoch;
      best_f = *r.f_true;
    }
  }
  return best;
}

/// Runs every (optimizer, seed) combination of the config sequentially,
/// writing one trace CSV per run and a summary.json for the whole matrix.
inline MatrixResult run_matrix(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  MatrixResult result;
  fs::create_directories(cfg.out_dir);

  const auto problem = make_problem(cfg.problem);
  const ParameterVector w0 = make_initial_point(cfg.problem, *problem);

  if (cfg.export_dataset) {
    if (auto* lp = dynamic_cast<LogisticRegressionProblem*>(problem.get())) {
      std::ofstream ds(fs::path(cfg.out_dir) / "dataset.csv");
      lp->write_dataset_csv(ds);
    } else if (auto* mp = dynamic_cast<SmoothMlpProblem*>(problem.get())) {
      std::ofstream ds(fs::path(cfg.out_dir) / "dataset.csv");
      mp->write_dataset_csv(ds);
    }
  }

  for (const OptimizerSpec& opt : cfg.optimizers) {
    for (std::uint64_t seed : cfg.seeds) {
      RunSummary s;
      s.optimizer = opt.name;
      s.seed = seed;
      const std::uint64_t run_seed = derive_seed(seed, opt.name);
      const std::string stem = opt.name + "_" + cfg.problem.name + "_seed" +
                               std::to_string(seed);
      s.trace_file = (fs::path(cfg.out_dir) / (stem + ".csv")).string();

      const auto t0 = std::chrono::steady_clock::now();
      try {
        Trace trace;
        FinalReport rep;
        if (opt.name == "fcma") {
          auto rr = fcma_run(*problem, opt.fcma, w0, run_seed, cfg.dense_trace);
          trace = std::move(rr.trace);
          rep = std::move(rr.report);
        } else if (opt.name == "sgd") {
          auto rr = sgd_run(*problem, opt.baseline, w0, run_seed, cfg.dense_trace);
          trace = std::move(rr.trace);
          rep = std::move(rr.report);
        } else if (opt.name == "plain_rr") {
          auto rr = plain_rr_run(*problem, opt.baseline, w0, run_seed,
                                 cfg.dense_trace);
          trace = std::move(rr.trace);
          rep = std::move(rr.report);
        } else if (opt.name == "adam") {
          auto rr = adam_run(*problem, opt.baseline, w0, run_seed,
                             cfg.dense_trace);
          trace = std::move(rr.trace);
          rep = std::move(rr.report);
        } else {
          throw ConfigError("unknown optimizer: " + opt.name);
        }
        std::ofstream out(s.trace_file, std::ios::binary);
        write_trace_csv(out, trace);
        s.ok = true;
        s.final_f = rep.final_f;
        s.final_grad_norm = rep.final_grad_norm;
        s.epochs = rep.epochs;
        s.stop_reason = to_string(rep.stop_reason);
        s.counters = rep.counters;
        s.k_star_loss = best_loss_epoch(trace);
      } catch (const RunError& e) {
        s.ok = false;
        s.error = e.what();
        result.all_ok = false;
      }
      s.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
      result.runs.push_back(std::move(s));
    }
  }

  nlohmann::ordered_json doc;
  doc["problem"] = cfg.problem.name;
  doc["runs"] = nlohmann::ordered_json::array();
  for (const RunSummary& s : result.runs) {
    nlohmann::ordered_json r;
    r["optimizer"] = s.optimizer;
    r["seed"] = s.seed;
    r["ok"] = s.ok;
    if (!s.ok) r["error"] = s.error;
    r["final_f"] = s.final_f;
    r["final_grad_norm"] = s.final_grad_norm;
    r["epochs"] = s.epochs;
    r["stop_reason"] = s.stop_reason;
    if (s.k_star_loss) r["k_star_loss"] = *s.k_star_loss;
    r["wall_ms"] = s.wall_ms;
    r["full_f_evals"] = s.counters.full_f_evals;
    r["component_f_evals"] = s.counters.component_f_evals;
    r["component_grad_evals"] = s.counters.component_grad_evals;
    r["trace_file"] = s.trace_file;
    doc["runs"].push_back(std::move(r));
  }
  std::ofstream summary(std::filesystem::path(cfg.out_dir) / "summary.json");
  summary << doc.dump(2) << "\n";
  return result;
}

}  // namespace fcma
