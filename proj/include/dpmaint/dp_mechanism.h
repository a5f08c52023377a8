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

// Exponential phase-angle perturbation and the flow privacy it induces.
//
// Adding independent Exp(b) noise to both endpoint angles of a line with
// conversion factor gamma turns the flow estimate gamma * (theta_u - theta_v)
// into the true flow plus Laplace(0, |gamma| * b) noise, because the
// difference of two iid exponentials is Laplace distributed. Choosing
// b = omega / (|gamma| * epsilon) therefore makes every flow estimate an
// epsilon-DP Laplace mechanism with sensitivity omega, independently of the
// line. Pairing angles from different iterations or regions keeps this
// property since every draw is fresh.

#ifndef DPMAINT_DP_MECHANISM_H_
#define DPMAINT_DP_MECHANISM_H_

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dpmaint/grid_case.h"

namespace dpmaint {

struct PrivacyConfig {
  double epsilon = 1.0;
  double sensitivity = 1.0;  // omega, p.u. flow
  // m_alpha: shared angle is theta + m_alpha * alpha. 0 disables noise.
  double noise_multiplier = 1.0;
  uint64_t seed = 1;

  // Flow-space Laplace scale omega / epsilon.
  double flow_scale() const { return sensitivity / epsilon; }
  // Exponential scale for the angles at the ends of a line.
  double LineScale(double gamma) const;

  // Interprets an experiment noise scale as omega / epsilon and derives
  // omega from the chosen epsilon.
  static PrivacyConfig FromScale(double scale, double epsilon = 1.0,
                                 double noise_multiplier = 1.0,
                                 uint64_t seed = 1);
  void Validate() const;
};

// One independent, seedable stream per region. Deterministic across
// platforms: mt19937_64 seeded through seed_seq, inverse-CDF sampling.
class NoiseStream {
 public:
  NoiseStream(uint64_t seed, int stream_id);
  explicit NoiseStream(uint64_t seed) : NoiseStream(seed, 0) {}

  // Uniform in [0, 1) with 53 random bits.
  double Uniform();
  double Exponential(double scale);
  double Laplace(double scale);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

// Throws Error(kInvalidArgument) unless scale > 0.
double SampleExponential(double scale, NoiseStream& rng);

// Per-bus exponential scales for the shared buses of one region. A bus on
// several tie lines uses the largest of their line scales, which keeps every
// incident flow at least epsilon-DP.
std::map<int, double> BusNoiseScales(const PowerCase& c,
                                     const RegionPartition& p, int region,
                                     const PrivacyConfig& config);
// Same for every tie-line endpoint in the network.
std::map<int, double> BusNoiseScales(const PowerCase& c,
                                     const RegionPartition& p,
                                     const PrivacyConfig& config);

// Unperturbed angles of one region's shared buses; values[slot * hours + t].
struct AngleTable {
  std::vector<int> buses;
  int hours = 0;
  std::vector<double> values;

  double at(int slot, int t) const { return values[slot * hours + t]; }
};

// Perturbed angles as they travel between regions. Only PerturbAngles can
// create one, so any value it holds has been through the mechanism.
class NoisyAngleMessage {
 public:
  struct Entry {
    int bus = 0;
    int hour = 0;
    double theta_hat = 0.0;
  };

  int sender() const { return sender_; }
  int receiver() const { return receiver_; }
  int iteration() const { return iteration_; }
  const std::vector<Entry>& entries() const { return entries_; }

  // The part of this message addressed to one neighbour.
  NoisyAngleMessage Subset(int receiver, std::span<const int> buses) const;
  // Text payload as transmitted ("theta_hat" records only).
  std::string ToWire() const;

 private:
  friend NoisyAngleMessage PerturbAngles(const AngleTable&,
                                         const std::map<int, double>&,
                                         const PrivacyConfig&, int, int,
                                         NoiseStream&);
  NoisyAngleMessage() = default;

  int sender_ = 0;
  int receiver_ = -1;
  int iteration_ = 0;
  std::vector<Entry> entries_;
};

// theta_hat = theta + m_alpha * alpha with a fresh alpha ~ Exp(scale[bus]) per
// (bus, hour), drawn in bus-major, hour-minor order. Throws
// Error(kInvalidArgument) when a bus has no scale.
NoisyAngleMessage PerturbAngles(const AngleTable& angles,
                                const std::map<int, double>& scales,
                                const PrivacyConfig& config, int iteration,
                                int sender, NoiseStream& rng);

inline double NoisyFlow(double theta_hat_u, double theta_hat_v, double gamma) {
  return gamma * (theta_hat_u - theta_hat_v);
}

// Statistical helpers used by the verification operations and tests.
double LaplaceCdf(double x, double scale);
// Two-sided one-sample Kolmogorov-Smirnov statistic; sorts `samples`.
double KsStatistic(std::vector<double>& samples, double laplace_scale);
// Asymptotic Kolmogorov p-value for statistic d with n samples.
double KolmogorovPValue(double d, size_t n);

struct KsReport {
  size_t samples = 0;
  double statistic = 0.0;
  double p_value = 0.0;
  bool pass = false;  // p_value >= significance
};

// Draws n flow-noise samples gamma * m * (alpha_u - alpha_v) through the
// actual mechanism and tests them against Laplace(0, m * omega / epsilon).
KsReport VerifyFlowNoise(const PrivacyConfig& config, double gamma, size_t n,
                         double significance = 0.01);

struct DpRatioReport {
  size_t samples = 0;
  double shift = 0.0;      // |x - x'|
  double epsilon = 0.0;
  double bound = 0.0;      // e^epsilon
  int bins_used = 0;
  double max_ratio = 0.0;  // worst empirical density ratio over shared bins
  // Bin closest to (or furthest past) its bound.
  double worst_bin_center = 0.0;
  double worst_slack = 0.0;  // delta_stat of that bin
  bool pass = false;       // every bin ratio <= e^eps * (1 + delta_stat)
  std::string ToText() const;
};

// Runs the flow mechanism on x and x' = x + shift (n samples each), bins the
// outputs over their common support and compares density ratios with
// e^epsilon. delta_stat per bin is a one-sided binomial confidence slack on
// the log-ratio, Bonferroni-corrected over the bins. Requires n >= 1e5 and
// throws Error(kInvalidArgument) when fewer than `min_bins` bins hold
// `min_count` samples on both sides.
DpRatioReport VerifyDpRatio(double flow_scale, double sensitivity,
                            double epsilon, double shift, size_t n,
                            uint64_t seed, int bins = 60, int min_bins = 50,
                            size_t min_count = 200);

}  // namespace dpmaint

#endif  // DPMAINT_DP_MECHANISM_H_
