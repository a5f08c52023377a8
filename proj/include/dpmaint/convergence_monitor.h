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

// Control chart on shared-angle discrepancies and the local stopping rule.
//
// Each iteration a region records, per shared bus, the mean over hours (and
// over senders) of (own perturbed angle - received perturbed angle). S_w
// consecutive records form one chart point; S_p points form a decision
// block. A bus trips when its block holds more than max_alarms_per_block
// alarms, and kappa is the number of tripped buses.

#ifndef DPMAINT_CONVERGENCE_MONITOR_H_
#define DPMAINT_CONVERGENCE_MONITOR_H_

#include <cmath>
#include <span>
#include <vector>

namespace dpmaint {

enum class StatisticMode { kMean, kSum };

struct ChartConfig {
  int window = 20;            // S_w, iterations per point
  int points_per_block = 4;   // S_p
  double noise_scale = 0.0;   // exponential angle scale used by AlarmCheck
  double noise_multiplier = 1.0;
  double threshold_multiplier = 1.0;  // L
  // Absolute floor for the alarm threshold; keeps noiseless runs usable.
  double min_threshold = 0.0;
  double cl = 0.1;
  StatisticMode mode = StatisticMode::kMean;
  int max_alarms_per_block = 1;

  // Maps the experiment tuning index onto the chart: S_p = gamma and
  // S_w = lookback.
  static ChartConfig FromGamma(int gamma, int lookback);
  void Validate() const;
  int decision_interval() const { return window * points_per_block; }
};

// Alarm limit for one bus: L * sqrt(2 (m * scale)^2 / (S_w * hours)) in mean
// mode, L * sqrt(2 (m * scale)^2 * S_w / hours) in sum mode, where `hours`
// is the number of hourly values averaged into each record. Never below
// min_threshold.
double AlarmThreshold(const ChartConfig& config, double noise_scale,
                      int hours);
// True means alarm.
inline bool AlarmCheck(double point, double threshold) {
  return std::abs(point) > threshold;
}
// Uses config.noise_scale with single-value records.
bool AlarmCheck(double point, const ChartConfig& config);

// beta_p = beta_d = CL * |B_r| * |T|.
inline double Tolerance(double cl, int shared_buses, int hours) {
  return cl * shared_buses * hours;
}

struct ChartPoint {
  int bus = 0;
  double value = 0.0;
  double threshold = 0.0;
  bool alarm = false;
};

class ChartState {
 public:
  ChartState() = default;
  // `thresholds` holds one alarm limit per bus.
  ChartState(const ChartConfig& config, std::vector<int> buses,
             std::vector<double> thresholds);

  // One discrepancy per bus. Returns the points completed by this record.
  std::vector<ChartPoint> RecordIteration(std::span<const double> discrepancy);

  const std::vector<int>& buses() const { return buses_; }
  int iterations() const { return iterations_; }
  // True right after the last record of a decision block.
  bool AtDecision() const;
  // Tripped buses in the most recently completed block.
  int kappa() const { return kappa_; }
  // Alarms so far in the current block (or the block just completed when
  // AtDecision()).
  int total_alarms() const { return total_alarms_; }
  const std::vector<double>& thresholds() const { return thresholds_; }

 private:
  ChartConfig config_;
  std::vector<int> buses_;
  std::vector<double> thresholds_;
  std::vector<double> window_sum_;
  std::vector<int> block_alarms_;
  int window_fill_ = 0;
  int block_points_ = 0;
  int iterations_ = 0;
  int kappa_ = 0;
  int total_alarms_ = 0;
};

// The local verdict: only at decision iterations; residuals below
// CL * |B_r| * |T| and fewer tripped buses than shared buses. With no shared
// buses the residual and alarm conditions hold vacuously.
bool LocalConvergence(const ChartConfig& config, const ChartState& chart,
                      double primal_residual, double dual_residual,
                      int shared_buses, int hours);

}  // namespace dpmaint

#endif  // DPMAINT_CONVERGENCE_MONITOR_H_
