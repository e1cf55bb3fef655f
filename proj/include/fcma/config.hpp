#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fcma/baselines.hpp"
#include "fcma/core.hpp"
#include "fcma/fcma.hpp"
#include "fcma/problems.hpp"

namespace fcma {

struct ProblemSpec {
  std::string name = "quadratic_sum";
  int P = 10;
  int n = 5;
  int m = 200;          // logistic sample count
  int hidden = 8;       // mlp hidden units
  double conditioning = 10;
  double noise = 0.05;
  double lambda = 1e-2;
  std::uint64_t seed = 1;
  std::string init = "zeros";  // zeros | ones | gauss
  double init_scale = 0.5;
};

struct OptimizerSpec {
  std::string name;  // fcma | sgd | plain_rr | adam
  HyperParams fcma;
  BaselineConfig baseline;
};

struct ExperimentConfig {
  ProblemSpec problem;
  std::vector<OptimizerSpec> optimizers;
  std::vector<std::uint64_t> seeds = {0};
  int max_epochs = 250;
  std::string out_dir = "out";
  bool dense_trace = false;
  bool export_dataset = false;
};

inline std::shared_ptr<FiniteSumProblem> make_problem(const ProblemSpec& ps) {
  if (ps.name == "quadratic_sum")
    return make_quadratic_sum(ps.P, ps.n, ps.seed, ps.conditioning);
  if (ps.name == "quadratic_pair") return make_quadratic_pair();
  if (ps.name == "logistic")
    return make_logistic(ps.P, ps.n, ps.m, ps.noise, ps.lambda, ps.seed);
  if (ps.name == "smooth_mlp") return make_mlp(ps.hidden, ps.P, ps.seed);
  if (ps.name == "rosenbrock_sum") return make_rosenbrock_sum(ps.P);
  throw ConfigError("unknown problem name: " + ps.name);
}

inline ParameterVector make_initial_point(const ProblemSpec& ps,
                                          const FiniteSumProblem& problem) {
  const int n = problem.dimension();
  if (ps.init == "zeros") return ParameterVector(n, 0.0);
  if (ps.init == "ones") return ParameterVector(n, 1.0);
  if (ps.init == "gauss") {
    std::mt19937_64 rng(ps.seed + 1);
    std::normal_distribution<double> gauss(0.0, ps.init_scale);
    ParameterVector w(n);
    for (double& x : w) x = gauss(rng);
    return w;
  }
  throw ConfigError("unknown init: " + ps.init);
}

namespace cfgdetail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& v, const std::string& ctx) {
  std::size_t pos = 0;
  double out;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError(ctx + ": not a number: '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError(ctx + ": trailing junk in '" + v + "'");
  return out;
}

inline long parse_int(const std::string& v, const std::string& ctx) {
  std::size_t pos = 0;
  long out;
  try {
    out = std::stol(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError(ctx + ": not an integer: '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError(ctx + ": trailing junk in '" + v + "'");
  return out;
}

inline bool parse_bool(const std::string& v, const std::string& ctx) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(ctx + ": not a boolean: '" + v + "'");
}

inline std::optional<double> parse_clip(const std::string& v,
                                        const std::string& ctx) {
  if (v == "none") return std::nullopt;
  return parse_double(v, ctx);
}

}  // namespace cfgdetail

/// Flat key-value config with [section] headers. Sections: [problem],
/// [run], and one per optimizer ([fcma], [sgd], [plain_rr], [adam]).
/// Unknown keys and malformed values are rejected with line context.
inline ExperimentConfig parse_config_text(std::istream& in,
                                          const std::string& origin) {
  using namespace cfgdetail;
  ExperimentConfig cfg;
  std::string section;
  OptimizerSpec* opt = nullptr;
  std::optional<int> run_max_epochs;
  std::map<std::string, bool> opt_has_max_epochs;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string ctx = origin + ":" + std::to_string(lineno);

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(ctx + ": malformed section");
      section = trim(line.substr(1, line.size() - 2));
      if (section == "problem" || section == "run") {
        opt = nullptr;
      } else if (section == "fcma" || section == "sgd" ||
                 section == "plain_rr" || section == "adam") {
        for (const auto& o : cfg.optimizers)
          if (o.name == section)
            throw ConfigError(ctx + ": duplicate optimizer section [" +
                              section + "]");
        OptimizerSpec spec;
        spec.name = section;
        if (section == "sgd") spec.baseline.kind = BaselineKind::kSgd;
        if (section == "plain_rr") spec.baseline.kind = BaselineKind::kPlainRr;
        if (section == "adam") {
          spec.baseline.kind = BaselineKind::kAdam;
          spec.baseline.learning_rate = 0.001;
        }
        cfg.optimizers.push_back(spec);
        opt = &cfg.optimizers.back();
      } else {
        throw ConfigError(ctx + ": unknown section [" + section + "]");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(ctx + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    const std::string kctx = ctx + " (" + key + ")";

    if (section == "problem") {
      ProblemSpec& p = cfg.problem;
      if (key == "name") p.name = val;
      else if (key == "P") p.P = static_cast<int>(parse_int(val, kctx));
      else if (key == "n") p.n = static_cast<int>(parse_int(val, kctx));
      else if (key == "m") p.m = static_cast<int>(parse_int(val, kctx));
      else if (key == "hidden") p.hidden = static_cast<int>(parse_int(val, kctx));
      else if (key == "conditioning") p.conditioning = parse_double(val, kctx);
      else if (key == "noise") p.noise = parse_double(val, kctx);
      else if (key == "lambda") p.lambda = parse_double(val, kctx);
      else if (key == "seed") p.seed = static_cast<std::uint64_t>(parse_int(val, kctx));
      else if (key == "init") p.init = val;
      else if (key == "init_scale") p.init_scale = parse_double(val, kctx);
      else throw ConfigError(kctx + ": unknown problem key");
    } else if (section == "run") {
      if (key == "seeds") {
        cfg.seeds.clear();
        std::string item;
        std::istringstream ss(val);
        while (std::getline(ss, item, ',')) {
          item = trim(item);
          if (!item.empty())
            cfg.seeds.push_back(
                static_cast<std::uint64_t>(parse_int(item, kctx)));
        }
        if (cfg.seeds.empty()) throw ConfigError(kctx + ": empty seed list");
      } else if (key == "max_epochs") {
        run_max_epochs = static_cast<int>(parse_int(val, kctx));
      } else if (key == "out") {
        cfg.out_dir = val;
      } else if (key == "dense_trace") {
        cfg.dense_trace = parse_bool(val, kctx);
      } else if (key == "export_dataset") {
        cfg.export_dataset = parse_bool(val, kctx);
      } else {
        throw ConfigError(kctx + ": unknown run key");
      }
    } else if (opt != nullptr) {
      HyperParams& h = opt->fcma;
      BaselineConfig& b = opt->baseline;
      const bool is_fcma = opt->name == "fcma";
      if (is_fcma) {
        if (key == "zeta0") h.zeta0 = parse_double(val, kctx);
        else if (key == "theta") h.theta = parse_double(val, kctx);
        else if (key == "tau") h.tau = parse_double(val, kctx);
        else if (key == "gamma") h.gamma = parse_double(val, kctx);
        else if (key == "delta") h.delta = parse_double(val, kctx);
        else if (key == "eta") h.eta = parse_double(val, kctx);
        else if (key == "alpha_min") h.alpha_min = parse_double(val, kctx);
        else if (key == "epsilon") h.epsilon = parse_double(val, kctx);
        else if (key == "psi_fraction") h.psi_fraction = parse_double(val, kctx);
        else if (key == "psi_scale_mode") {
          if (val == "literal") h.psi_scale_mode = PsiScaleMode::kLiteral;
          else if (val == "rescaled") h.psi_scale_mode = PsiScaleMode::kRescaled;
          else throw ConfigError(kctx + ": expected literal|rescaled");
        }
        else if (key == "clip_norm") h.clip_norm = cfgdetail::parse_clip(val, kctx);
        else if (key == "clip_direction") h.clip_direction = parse_bool(val, kctx);
        else if (key == "dfl_max_iters")
          h.dfl_max_iters = static_cast<int>(parse_int(val, kctx));
        else if (key == "max_epochs") {
          h.max_epochs = static_cast<int>(parse_int(val, kctx));
          opt_has_max_epochs[opt->name] = true;
        }
        else throw ConfigError(kctx + ": unknown fcma key");
      } else {
        if (key == "learning_rate") b.learning_rate = parse_double(val, kctx);
        else if (key == "decay") {
          if (val == "none") b.decay = LrDecay::kNone;
          else if (val == "inverse_k") b.decay = LrDecay::kInverseK;
          else throw ConfigError(kctx + ": expected none|inverse_k");
        }
        else if (key == "beta1") b.adam_beta1 = parse_double(val, kctx);
        else if (key == "beta2") b.adam_beta2 = parse_double(val, kctx);
        else if (key == "adam_eps") b.adam_eps = parse_double(val, kctx);
        else if (key == "clip_norm") b.clip_norm = cfgdetail::parse_clip(val, kctx);
        else if (key == "max_epochs") {
          b.max_epochs = static_cast<int>(parse_int(val, kctx));
          opt_has_max_epochs[opt->name] = true;
        }
        else throw ConfigError(kctx + ": unknown " + opt->name + " key");
      }
    } else {
      throw ConfigError(ctx + ": key outside any section");
    }
  }

  if (cfg.optimizers.empty())
    throw ConfigError(origin + ": no optimizer section found");
  if (run_max_epochs) {
    cfg.max_epochs = *run_max_epochs;
    for (auto& o : cfg.optimizers) {
      if (!opt_has_max_epochs.count(o.name)) {
        o.fcma.max_epochs = *run_max_epochs;
        o.baseline.max_epochs = *run_max_epochs;
      }
    }
  }
  for (const auto& o : cfg.optimizers) {
    if (o.name == "fcma") o.fcma.validate();
    else o.baseline.validate();
  }
  return cfg;
}

inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config_text(in, path);
}

}  // namespace fcma
