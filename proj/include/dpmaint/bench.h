// Copyright 2026 The dpmaint Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Experiment driver: configuration files, the centralized reference solve,
// gap and flow-noise metrics, parameter sweeps and their CSV/text outputs.

#ifndef DPMAINT_BENCH_H_
#define DPMAINT_BENCH_H_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dpmaint/consensus.h"
#include "dpmaint/convergence_monitor.h"
#include "dpmaint/coordinator.h"
#include "dpmaint/grid_case.h"
#include "dpmaint/miqp.h"
#include "dpmaint/regional_model.h"

namespace dpmaint {

// Gap reported for runs that never reached a convergence verdict.
inline constexpr double kNonConvergedGap = 0.16;

// The five noise scales of the standard experiment grid.
inline constexpr double kStandardScales[] = {0.015, 0.03, 0.075, 0.15, 0.30};

struct ExperimentConfig {
  std::filesystem::path case_path;
  std::filesystem::path partition_path;  // empty: one region

  double noise_scale = 0.015;  // omega / epsilon
  double epsilon = 1.0;
  double noise_multiplier = 1.0;
  bool debias = true;

  double cl = 0.1;
  int gamma = 4;
  int lookback = 20;
  double threshold_multiplier = 1.0;
  double min_threshold = 0.0;
  StatisticMode statistic = StatisticMode::kMean;
  int max_alarms_per_block = 1;

  EtaMode eta_mode = EtaMode::kFormula;
  double eta = 1.0;  // used when eta_mode is kExplicit

  double rho_theta = 1e4;
  double rho_f = 1e4;

  ModelConfig model;
  std::string backend = "bundled";
  MiqpLimits regional_limits = RunConfig{}.limits;
  // The reference solve stops at a 1e-4 gap or after five minutes.
  MiqpLimits centralized_limits = [] {
    MiqpLimits l;
    l.relative_gap = 1e-4;
    l.time_limit_seconds = 300.0;
    return l;
  }();
  double time_budget_seconds = 10600.0;
  int max_iterations = 0;
  bool two_phase = true;
  int threads = 1;
  bool record_wall_time = false;

  std::vector<uint64_t> seeds = {1};
  // Sweep axes; an empty axis means the single value above.
  std::vector<double> sweep_scales;
  std::vector<double> sweep_cls;
  std::vector<int> sweep_gammas;

  // Relative paths are resolved against `base_dir`. Unknown keys are
  // rejected. Throws Error(kParse) or Error(kConfiguration).
  static ExperimentConfig FromJson(const std::string& text,
                                   const std::filesystem::path& base_dir);
  static ExperimentConfig Load(const std::filesystem::path& path);
  std::string ToJson() const;

  // Checks file existence and every parameter range. Throws
  // Error(kConfiguration) or the owning module's error.
  void Validate() const;

  double MixingFactorFor(double scale, int gamma) const;
  RunConfig ToRunConfig(double scale, double cl, int gamma,
                        uint64_t seed) const;
};

// A loaded case together with its region split.
struct Instance {
  PowerCase power_case;
  RegionPartition partition;
};

Instance LoadInstance(const ExperimentConfig& config);

struct CentralizedResult {
  SolveStatus status = SolveStatus::kNumericalError;
  double objective = kInf;  // incumbent, including slack penalty
  double bound = -kInf;
  double relaxed_objective = kInf;
  int64_t nodes = 0;
  double slack_mw = 0.0;
  double wall_seconds = 0.0;
  RegionalVariables schedule;
};

// Whole network as one region, no penalties or noise. `phase` kRelaxed
// solves the continuous relaxation only. When the limits stop the search
// early the incumbent and the bound are both reported.
CentralizedResult CentralizedSolve(const PowerCase& c, Phase phase,
                                   const MiqpLimits& limits,
                                   const ModelConfig& model = {},
                                   const std::string& backend = "bundled");

// |decentralized - centralized| / centralized, or kNonConvergedGap when
// `converged` is false. Throws Error(kInvalidArgument) unless
// centralized > 0.
double OptimalityGap(double decentralized, double centralized,
                     bool converged);

// Euclidean norm of the difference. Throws Error(kInvalidArgument) on a
// length mismatch.
double FlowNoiseNorm(std::span<const double> true_flows,
                     std::span<const double> dp_flows);
// Same over observations, scaled from p.u. to MW.
double FlowNoiseNorm(const std::vector<FlowObservation>& flows,
                     double base_mva);

struct CellKey {
  double scale = 0.0;
  double cl = 0.0;
  int gamma = 0;
  uint64_t seed = 0;
};

struct CellResult {
  CellKey key;
  bool ok = false;  // false: the run threw, see `error`
  std::string error;
  std::string status;
  bool converged = false;
  int relaxed_iterations = 0;
  int binary_iterations = 0;
  double objective = 0.0;
  double gap = 0.0;  // NaN without a centralized reference
  double flow_noise_norm = 0.0;  // MW
  double slack_mw = 0.0;
  bool warm_start_used = false;
  double wall_seconds = 0.0;
  std::vector<TraceRecord> trace;
};

// One decentralized run. Errors propagate.
CellResult RunCell(const Instance& instance, const ExperimentConfig& config,
                   const CellKey& key, double centralized_objective);

// Every (scale, cl, gamma, seed) combination, ordered by that key. A cell
// that throws is recorded and the sweep continues.
std::vector<CellResult> Sweep(const Instance& instance,
                              const ExperimentConfig& config,
                              double centralized_objective);

struct CellSummary {
  double scale = 0.0;
  double cl = 0.0;
  int gamma = 0;
  int runs = 0;
  int converged = 0;
  int failed = 0;
  double mean_gap = 0.0;
  double median_gap = 0.0;
  double mean_flow_noise = 0.0;
  // Over every completed run, converged or not.
  double mean_wall_seconds = 0.0;
  double std_wall_seconds = 0.0;
};

std::vector<CellSummary> Summarize(const std::vector<CellResult>& cells);

double Median(std::vector<double> values);

// trace.csv: one row per (cell, region, phase, iteration). Wall time is
// written only when `wall_time` is set, so default outputs are
// byte-reproducible.
void WriteTraceCsv(const std::vector<CellResult>& cells, bool wall_time,
                   std::ostream& out);
// summary.csv: one row per run.
void WriteSummaryCsv(const std::vector<CellResult>& cells, bool wall_time,
                     std::ostream& out);
// Whitespace-separated long format (key columns, metric, value) for gnuplot.
void WritePlotTable(const std::vector<CellResult>& cells, std::ostream& out);
// summary.csv back into results (without traces). Throws Error(kParse).
std::vector<CellResult> ReadSummaryCsv(std::istream& in);
// Per-cell statistics only.
void WriteSummaryReport(const std::vector<CellResult>& cells,
                        std::ostream& out);
// Human-readable report: setup, centralized reference, every run and the
// per-cell statistics.
void WriteReport(const ExperimentConfig& config,
                 const std::optional<CentralizedResult>& centralized,
                 const std::vector<CellResult>& cells, std::ostream& out);

}  // namespace dpmaint

#endif  // DPMAINT_BENCH_H_
