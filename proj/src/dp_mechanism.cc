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

#include "dpmaint/dp_mechanism.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "dpmaint/error.h"

namespace dpmaint {

double PrivacyConfig::LineScale(double gamma) const {
  if (gamma == 0.0) throw InvalidArgument("line with zero susceptance");
  return flow_scale() / std::abs(gamma);
}

PrivacyConfig PrivacyConfig::FromScale(double scale, double epsilon,
                                       double noise_multiplier, uint64_t seed) {
  PrivacyConfig c;
  c.epsilon = epsilon;
  c.sensitivity = scale * epsilon;
  c.noise_multiplier = noise_multiplier;
  c.seed = seed;
  c.Validate();
  return c;
}

void PrivacyConfig::Validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidArgument("privacy budget epsilon must be positive");
  }
  if (!(sensitivity > 0.0) || !std::isfinite(sensitivity)) {
    throw InvalidArgument("sensitivity must be positive");
  }
  if (!(noise_multiplier >= 0.0) || !std::isfinite(noise_multiplier)) {
    throw InvalidArgument("noise multiplier must be nonnegative");
  }
}

NoiseStream::NoiseStream(uint64_t seed, int stream_id) {
  std::seed_seq seq{static_cast<uint32_t>(seed & 0xffffffffu),
                    static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(stream_id)};
  engine_.seed(seq);
}

double NoiseStream::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double NoiseStream::Exponential(double scale) {
  return -scale * std::log1p(-Uniform());
}

double NoiseStream::Laplace(double scale) {
  const double u = Uniform() - 0.5;
  return u < 0 ? scale * std::log1p(2.0 * u) : -scale * std::log1p(-2.0 * u);
}

double SampleExponential(double scale, NoiseStream& rng) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw InvalidArgument("exponential scale must be positive");
  }
  return rng.Exponential(scale);
}

std::map<int, double> BusNoiseScales(const PowerCase& c,
                                     const RegionPartition& p,
                                     const PrivacyConfig& config) {
  config.Validate();
  std::map<int, double> out;
  for (const Line& line : c.lines) {
    if (p.bus_region[line.from] == p.bus_region[line.to]) continue;
    const double b = config.LineScale(line.gamma);
    for (int bus : {line.from, line.to}) {
      auto [it, inserted] = out.emplace(bus, b);
      if (!inserted) it->second = std::max(it->second, b);
    }
  }
  return out;
}

std::map<int, double> BusNoiseScales(const PowerCase& c,
                                     const RegionPartition& p, int region,
                                     const PrivacyConfig& config) {
  const std::map<int, double> all = BusNoiseScales(c, p, config);
  std::map<int, double> out;
  for (int bus : p.regions.at(region).SharedBuses()) out[bus] = all.at(bus);
  return out;
}

NoisyAngleMessage NoisyAngleMessage::Subset(int receiver,
                                            std::span<const int> buses) const {
  const std::set<int> keep(buses.begin(), buses.end());
  NoisyAngleMessage out;
  out.sender_ = sender_;
  out.receiver_ = receiver;
  out.iteration_ = iteration_;
  for (const Entry& e : entries_) {
    if (keep.count(e.bus)) out.entries_.push_back(e);
  }
  return out;
}

std::string NoisyAngleMessage::ToWire() const {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "sender " << sender_ << " receiver " << receiver_ << " iteration "
      << iteration_ << '\n';
  for (const Entry& e : entries_) {
    out << "theta_hat " << e.bus << ' ' << e.hour << ' ' << e.theta_hat
        << '\n';
  }
  return out.str();
}

NoisyAngleMessage PerturbAngles(const AngleTable& angles,
                                const std::map<int, double>& scales,
                                const PrivacyConfig& config, int iteration,
                                int sender, NoiseStream& rng) {
  if (angles.values.size() != angles.buses.size() * angles.hours) {
    throw InvalidArgument("angle table size does not match its layout");
  }
  const double m = config.noise_multiplier;
  NoisyAngleMessage msg;
  msg.sender_ = sender;
  msg.iteration_ = iteration;
  msg.entries_.reserve(angles.values.size());
  for (size_t s = 0; s < angles.buses.size(); ++s) {
    const int bus = angles.buses[s];
    const auto it = scales.find(bus);
    if (it == scales.end()) {
      throw InvalidArgument("no noise scale configured for bus " +
                            std::to_string(bus));
    }
    for (int t = 0; t < angles.hours; ++t) {
      double theta_hat = angles.at(static_cast<int>(s), t);
      if (m > 0.0) theta_hat += m * SampleExponential(it->second, rng);
      msg.entries_.push_back({bus, t, theta_hat});
    }
  }
  return msg;
}

double LaplaceCdf(double x, double scale) {
  return x < 0 ? 0.5 * std::exp(x / scale) : 1.0 - 0.5 * std::exp(-x / scale);
}

double KsStatistic(std::vector<double>& samples, double laplace_scale) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double f = LaplaceCdf(samples[i], laplace_scale);
    d = std::max({d, f - i / n, (i + 1) / n - f});
  }
  return d;
}

double KolmogorovPValue(double d, size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsReport VerifyFlowNoise(const PrivacyConfig& config, double gamma, size_t n,
                         double significance) {
  config.Validate();
  if (!(config.noise_multiplier > 0.0)) {
    throw InvalidArgument("flow noise test needs a positive noise multiplier");
  }
  if (n == 0) throw InvalidArgument("flow noise test needs samples");
  const double b = config.LineScale(gamma);
  const double m = config.noise_multiplier;
  NoiseStream rng(config.seed);
  std::vector<double> noise(n);
  for (size_t i = 0; i < n; ++i) {
    const double a_u = SampleExponential(b, rng);
    const double a_v = SampleExponential(b, rng);
    noise[i] = gamma * m * (a_u - a_v);
  }
  KsReport r;
  r.samples = n;
  r.statistic = KsStatistic(noise, m * config.flow_scale());
  r.p_value = KolmogorovPValue(r.statistic, n);
  r.pass = r.p_value >= significance;
  return r;
}

std::string DpRatioReport::ToText() const {
  std::ostringstream out;
  out << std::setprecision(6);
  out << "samples " << samples << "\nshift " << shift << "\nepsilon "
      << epsilon << "\nbound " << bound << "\nbins " << bins_used
      << "\nmax_ratio " << max_ratio << "\nworst_bin_center "
      << worst_bin_center << "\nworst_slack " << worst_slack << "\nresult "
      << (pass ? "pass" : "fail") << '\n';
  return out.str();
}

DpRatioReport VerifyDpRatio(double flow_scale, double sensitivity,
                            double epsilon, double shift, size_t n,
                            uint64_t seed, int bins, int min_bins,
                            size_t min_count) {
  if (!(flow_scale > 0.0) || !(sensitivity > 0.0) || !(epsilon > 0.0)) {
    throw InvalidArgument("scale, sensitivity and epsilon must be positive");
  }
  if (n < 100000) {
    throw InvalidArgument("privacy ratio check needs at least 1e5 samples");
  }
  if (bins < 1) throw InvalidArgument("privacy ratio check needs bins");
  shift = std::abs(shift);
  // Both mechanisms run through the angle path with gamma = 1.
  PrivacyConfig config;
  config.epsilon = epsilon;
  config.sensitivity = flow_scale * epsilon;
  const double b = config.LineScale(1.0);
  NoiseStream rng_x(seed, 0);
  NoiseStream rng_y(seed, 1);
  const double lo = -3.0 * flow_scale;
  const double hi = shift + 3.0 * flow_scale;
  const double width = (hi - lo) / bins;
  std::vector<size_t> cx(bins, 0), cy(bins, 0);
  auto bin_of = [&](double v) {
    if (v < lo || v >= hi) return -1;
    return std::min(bins - 1, static_cast<int>((v - lo) / width));
  };
  for (size_t i = 0; i < n; ++i) {
    const double fx = 0.0 + NoisyFlow(rng_x.Exponential(b),
                                      rng_x.Exponential(b), 1.0);
    const double fy = shift + NoisyFlow(rng_y.Exponential(b),
                                        rng_y.Exponential(b), 1.0);
    if (int k = bin_of(fx); k >= 0) ++cx[k];
    if (int k = bin_of(fy); k >= 0) ++cy[k];
  }
  DpRatioReport r;
  r.samples = n;
  r.shift = shift;
  r.epsilon = epsilon;
  r.bound = std::exp(epsilon);
  std::vector<int> usable;
  for (int k = 0; k < bins; ++k) {
    if (cx[k] >= min_count && cy[k] >= min_count) usable.push_back(k);
  }
  r.bins_used = static_cast<int>(usable.size());
  if (r.bins_used < min_bins) {
    throw InvalidArgument("only " + std::to_string(r.bins_used) +
                          " bins hold enough samples; need " +
                          std::to_string(min_bins));
  }
  // Two directions per bin, 1% family-wise level.
  const double alpha = 0.01 / (2.0 * r.bins_used);
  const double z =
      boost::math::quantile(boost::math::normal(), 1.0 - alpha);
  r.pass = true;
  double worst_excess = -std::numeric_limits<double>::infinity();
  for (int k : usable) {
    const double a = static_cast<double>(cx[k]);
    const double c = static_cast<double>(cy[k]);
    const double ratio = std::max(a / c, c / a);
    const double slack = std::expm1(z * std::sqrt(1.0 / a + 1.0 / c));
    const double excess = ratio / (r.bound * (1.0 + slack));
    if (excess > 1.0) r.pass = false;
    r.max_ratio = std::max(r.max_ratio, ratio);
    if (excess > worst_excess) {
      worst_excess = excess;
      r.worst_bin_center = lo + (k + 0.5) * width;
      r.worst_slack = slack;
    }
  }
  return r;
}

}  // namespace dpmaint
