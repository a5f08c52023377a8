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

#include "dpmaint/consensus.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <string>

#include "dpmaint/error.h"

namespace dpmaint {
namespace {

constexpr std::array<double, 5> kTableScales = {0.015, 0.03, 0.075, 0.15,
                                                0.30};
constexpr std::array<int, 5> kTableGammas = {4, 8, 12, 16, 20};
// Rows follow kTableScales, columns kTableGammas.
constexpr double kTable[5][5] = {
    {0.997, 0.9976, 0.9982, 0.9988, 0.9994},
    {0.994, 0.9952, 0.9964, 0.9976, 0.9988},
    {0.985, 0.988, 0.991, 0.994, 0.997},
    {0.97, 0.976, 0.982, 0.988, 0.994},
    {0.94, 0.952, 0.964, 0.976, 0.988},
};

void CheckEta(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw InvalidArgument("mixing factor must lie in (0, 1], got " +
                          std::to_string(eta));
  }
}

}  // namespace

double EwmaUpdate(double prev, double received, double eta, bool first) {
  CheckEta(eta);
  if (first) return received;
  return eta * received + (1.0 - eta) * prev;
}

double MixingFactorTable(double scale, int gamma) {
  int row = -1;
  for (size_t i = 0; i < kTableScales.size(); ++i) {
    if (std::abs(scale - kTableScales[i]) <= 1e-9) row = static_cast<int>(i);
  }
  const auto col_it =
      std::find(kTableGammas.begin(), kTableGammas.end(), gamma);
  if (row < 0 || col_it == kTableGammas.end()) {
    throw InvalidArgument("no tabulated mixing factor for scale " +
                          std::to_string(scale) + ", gamma " +
                          std::to_string(gamma));
  }
  return kTable[row][col_it - kTableGammas.begin()];
}

double MixingFactorFormula(double scale, int gamma) {
  const double eta = 1.0 - (0.24 - 0.01 * gamma) * scale;
  CheckEta(eta);
  return eta;
}

double MixingFactor(double scale, int gamma, EtaMode mode) {
  switch (mode) {
    case EtaMode::kTable:
      return MixingFactorTable(scale, gamma);
    case EtaMode::kFormula:
      return MixingFactorFormula(scale, gamma);
    case EtaMode::kExplicit:
      break;
  }
  throw InvalidArgument("explicit mixing factor has no scale mapping");
}

ConsensusState::ConsensusState(const PowerCase& c, const Region& region,
                               double rho_theta, double rho_f, double eta)
    : hours_(c.horizon_hours),
      region_(region.index),
      buses_(region.SharedBuses()),
      ties_(region.tie_lines),
      neighbors_(region.neighbors),
      rho_theta_(rho_theta),
      rho_f_(rho_f) {
  if (!(rho_theta > 0.0) || !(rho_f > 0.0)) {
    throw InvalidArgument("penalty parameters must be positive");
  }
  set_eta(eta);
  const size_t nb = buses_.size() * hours_;
  lambda_.assign(nb, 0.0);
  theta_bar_.assign(nb, 0.0);
  theta_bar_prev_.assign(nb, 0.0);
  const size_t nf = ties_.size() * hours_;
  phi_.assign(nf, 0.0);
  flow_bar_.assign(nf, 0.0);
  std::set<std::pair<int, int>> seen;
  for (const TieLine& tie : ties_) {
    for (int bus : {tie.own_bus, tie.foreign_bus}) {
      const int slot = BusSlot(bus);
      if (seen.insert({slot, tie.neighbor}).second) {
        angle_memory_.push_back(
            Memory{slot, tie.neighbor, std::vector<double>(hours_, 0.0), false});
      }
    }
  }
  flow_memory_.assign(ties_.size(), std::vector<double>(hours_, 0.0));
  flow_initialized_.assign(ties_.size(), false);
}

int ConsensusState::BusSlot(int bus) const {
  const auto it = std::find(buses_.begin(), buses_.end(), bus);
  return it == buses_.end() ? -1 : static_cast<int>(it - buses_.begin());
}

void ConsensusState::set_eta(double eta) {
  CheckEta(eta);
  eta_ = eta;
}

const std::vector<double>* ConsensusState::SmoothedAngle(int bus,
                                                         int neighbor) const {
  const int slot = BusSlot(bus);
  for (const Memory& m : angle_memory_) {
    if (m.slot == slot && m.neighbor == neighbor && m.initialized) {
      return &m.value;
    }
  }
  return nullptr;
}

const std::vector<double>& ConsensusState::SmoothedFlow(int tie) const {
  return flow_memory_.at(tie);
}

void ConsensusState::ResetMemories() {
  for (Memory& m : angle_memory_) m.initialized = false;
  std::fill(flow_initialized_.begin(), flow_initialized_.end(), false);
}

ConsensusResiduals ConsensusState::Update(
    std::span<const double> own_theta, std::span<const double> own_flow,
    std::span<const NoisyAngleMessage> inbox,
    const std::map<int, double>& noise_offset, const PowerCase& c) {
  const int h = hours_;
  if (own_theta.size() != buses_.size() * h ||
      own_flow.size() != ties_.size() * h) {
    throw InvalidArgument("consensus update: own values do not match layout");
  }
  // Debiased angles received this round, keyed by (neighbor, slot).
  std::map<std::pair<int, int>, std::vector<double>> received;
  std::set<int> senders;
  for (const NoisyAngleMessage& msg : inbox) {
    if (std::find(neighbors_.begin(), neighbors_.end(), msg.sender()) ==
        neighbors_.end()) {
      throw ProtocolError("region " + std::to_string(region_) +
                          " received a message from non-neighbour " +
                          std::to_string(msg.sender()));
    }
    if (!senders.insert(msg.sender()).second) {
      throw ProtocolError("duplicate message from region " +
                          std::to_string(msg.sender()));
    }
    for (const NoisyAngleMessage::Entry& e : msg.entries()) {
      const int slot = BusSlot(e.bus);
      if (slot < 0 || e.hour < 0 || e.hour >= h) {
        throw ProtocolError("message entry for bus " + std::to_string(e.bus) +
                            " is not shared with region " +
                            std::to_string(region_));
      }
      auto& row = received[{msg.sender(), slot}];
      if (row.empty()) row.assign(h, std::nan(""));
      const auto off = noise_offset.find(e.bus);
      row[e.hour] = e.theta_hat - (off == noise_offset.end() ? 0.0 : off->second);
    }
  }

  for (Memory& m : angle_memory_) {
    const auto it = received.find({m.neighbor, m.slot});
    if (it == received.end()) continue;
    for (int t = 0; t < h; ++t) {
      if (std::isnan(it->second[t])) {
        throw ProtocolError("incomplete angle message from region " +
                            std::to_string(m.neighbor));
      }
      m.value[t] = EwmaUpdate(m.value[t], it->second[t], eta_, !m.initialized);
    }
    m.initialized = true;
  }

  theta_bar_prev_ = theta_bar_;
  std::vector<double> sum(own_theta.begin(), own_theta.end());
  std::vector<int> count(buses_.size(), 1);
  for (const Memory& m : angle_memory_) {
    if (!m.initialized) continue;
    ++count[m.slot];
    for (int t = 0; t < h; ++t) sum[m.slot * h + t] += m.value[t];
  }
  ConsensusResiduals res;
  for (size_t s = 0; s < buses_.size(); ++s) {
    for (int t = 0; t < h; ++t) {
      const size_t i = s * h + t;
      theta_bar_[i] = sum[i] / count[s];
      res.primal += std::abs(own_theta[i] - theta_bar_[i]);
      res.dual += std::abs(theta_bar_[i] - theta_bar_prev_[i]);
    }
  }

  for (size_t k = 0; k < ties_.size(); ++k) {
    const TieLine& tie = ties_[k];
    const Line& line = c.lines[tie.line];
    const auto from = received.find({tie.neighbor, BusSlot(line.from)});
    const auto to = received.find({tie.neighbor, BusSlot(line.to)});
    const bool have = from != received.end() && to != received.end();
    for (int t = 0; t < h; ++t) {
      const size_t i = k * h + t;
      if (have) {
        const double f_hat =
            NoisyFlow(from->second[t], to->second[t], line.gamma);
        flow_memory_[k][t] = EwmaUpdate(flow_memory_[k][t], f_hat, eta_,
                                        !flow_initialized_[k]);
      }
      flow_bar_[i] = flow_initialized_[k] || have
                         ? IntermediateConsensus(own_flow[i], flow_memory_[k][t])
                         : own_flow[i];
      res.flow_primal += std::abs(own_flow[i] - flow_bar_[i]);
    }
    if (have) flow_initialized_[k] = true;
  }
  return res;
}

void ConsensusState::DualUpdate(std::span<const double> own_theta,
                                std::span<const double> own_flow) {
  if (own_theta.size() != lambda_.size() || own_flow.size() != phi_.size()) {
    throw InvalidArgument("dual update: own values do not match layout");
  }
  for (size_t i = 0; i < lambda_.size(); ++i) {
    lambda_[i] += rho_theta_ * (own_theta[i] - theta_bar_[i]);
  }
  for (size_t i = 0; i < phi_.size(); ++i) {
    phi_[i] += rho_f_ * (own_flow[i] - flow_bar_[i]);
  }
}

}  // namespace dpmaint
