#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fcma/core.hpp"

namespace fcma {

/// One per-epoch row of diagnostics. Optimizer-specific columns are left
/// empty by the optimizers that do not produce them.
struct TraceRecord {
  int epoch = 0;
  std::optional<double> f_tilde;
  std::optional<double> phi;
  std::optional<double> zeta;
  std::optional<double> alpha;
  std::optional<double> norm_d;
  std::string branch;  // empty for baselines
  std::uint64_t full_f_evals = 0;
  std::uint64_t component_grad_evals = 0;
  std::optional<double> f_true;
  std::optional<double> grad_norm;
  double wall_ms = 0;
};

using Trace = std::vector<TraceRecord>;

enum class StopReason { kEpsilon, kMaxEpochs, kDiverged };

inline std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::kEpsilon: return "epsilon";
    case StopReason::kMaxEpochs: return "max_epochs";
    case StopReason::kDiverged: return "diverged";
  }
  return "?";
}

struct FinalReport {
  ParameterVector w;
  double final_f = 0;
  double final_grad_norm = 0;
  int epochs = 0;
  StopReason stop_reason = StopReason::kMaxEpochs;
  EvalCounters counters;
};

inline std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::string format_opt(const std::optional<double>& x) {
  return x ? format_g17(*x) : std::string();
}

inline constexpr const char* kTraceCsvHeader =
    "epoch,f_tilde,phi,zeta,alpha,norm_d,branch,full_f_evals,"
    "comp_grad_evals,f_true,grad_norm,wall_ms";

inline void write_trace_csv(std::ostream& os, const Trace& trace) {
  os << kTraceCsvHeader << "\n";
  for (const TraceRecord& r : trace) {
    os << r.epoch << ',' << format_opt(r.f_tilde) << ',' << format_opt(r.phi)
       << ',' << format_opt(r.zeta) << ',' << format_opt(r.alpha) << ','
       << format_opt(r.norm_d) << ',' << r.branch << ',' << r.full_f_evals
       << ',' << r.component_grad_evals << ',' << format_opt(r.f_true) << ','
       << format_opt(r.grad_norm) << ',' << format_g17(r.wall_ms) << "\n";
  }
}

}  // namespace fcma
