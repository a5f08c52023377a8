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

#include "dpmaint/convergence_monitor.h"

#include <cmath>
#include <string>

#include "dpmaint/error.h"

namespace dpmaint {

ChartConfig ChartConfig::FromGamma(int gamma, int lookback) {
  ChartConfig c;
  c.points_per_block = gamma;
  c.window = lookback;
  c.Validate();
  return c;
}

void ChartConfig::Validate() const {
  if (window < 1 || points_per_block < 1) {
    throw InvalidArgument("chart window and block size must be at least 1");
  }
  if (!(threshold_multiplier > 0.0) || !(cl > 0.0)) {
    throw InvalidArgument("threshold multiplier and CL must be positive");
  }
  if (!(noise_scale >= 0.0) || !(noise_multiplier >= 0.0) ||
      !(min_threshold >= 0.0)) {
    throw InvalidArgument("chart noise parameters must be nonnegative");
  }
  if (max_alarms_per_block < 0) {
    throw InvalidArgument("max_alarms_per_block must be nonnegative");
  }
}

double AlarmThreshold(const ChartConfig& config, double noise_scale,
                      int hours) {
  if (hours < 1) throw InvalidArgument("alarm threshold needs hours >= 1");
  const double s = config.noise_multiplier * noise_scale;
  const double var = 2.0 * s * s / hours;
  const double sd = config.mode == StatisticMode::kMean
                        ? std::sqrt(var / config.window)
                        : std::sqrt(var * config.window);
  return std::max(config.min_threshold, config.threshold_multiplier * sd);
}

bool AlarmCheck(double point, const ChartConfig& config) {
  return AlarmCheck(point, AlarmThreshold(config, config.noise_scale, 1));
}

ChartState::ChartState(const ChartConfig& config, std::vector<int> buses,
                       std::vector<double> thresholds)
    : config_(config),
      buses_(std::move(buses)),
      thresholds_(std::move(thresholds)) {
  config_.Validate();
  if (thresholds_.size() != buses_.size()) {
    throw InvalidArgument("chart needs one threshold per bus");
  }
  window_sum_.assign(buses_.size(), 0.0);
  block_alarms_.assign(buses_.size(), 0);
}

std::vector<ChartPoint> ChartState::RecordIteration(
    std::span<const double> discrepancy) {
  if (discrepancy.size() != buses_.size()) {
    throw InvalidArgument("chart record needs one value per bus");
  }
  if (AtDecision()) total_alarms_ = 0;
  ++iterations_;
  for (size_t i = 0; i < buses_.size(); ++i) window_sum_[i] += discrepancy[i];
  std::vector<ChartPoint> points;
  if (++window_fill_ < config_.window) return points;

  window_fill_ = 0;
  for (size_t i = 0; i < buses_.size(); ++i) {
    ChartPoint p;
    p.bus = buses_[i];
    p.value = config_.mode == StatisticMode::kMean
                  ? window_sum_[i] / config_.window
                  : window_sum_[i];
    p.threshold = thresholds_[i];
    p.alarm = AlarmCheck(p.value, p.threshold);
    if (p.alarm) {
      ++block_alarms_[i];
      ++total_alarms_;
    }
    window_sum_[i] = 0.0;
    points.push_back(p);
  }
  if (++block_points_ == config_.points_per_block) {
    block_points_ = 0;
    kappa_ = 0;
    for (int& a : block_alarms_) {
      if (a > config_.max_alarms_per_block) ++kappa_;
      a = 0;
    }
  }
  return points;
}

bool ChartState::AtDecision() const {
  return iterations_ > 0 && iterations_ % config_.decision_interval() == 0;
}

bool LocalConvergence(const ChartConfig& config, const ChartState& chart,
                      double primal_residual, double dual_residual,
                      int shared_buses, int hours) {
  if (!chart.AtDecision()) return false;
  if (shared_buses == 0) return true;
  const double beta = Tolerance(config.cl, shared_buses, hours);
  return primal_residual < beta && dual_residual < beta &&
         chart.kappa() < shared_buses;
}

}  // namespace dpmaint
