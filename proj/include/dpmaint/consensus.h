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

// Per-region coordination state: EWMA smoothing of received perturbed
// values, intermediate consensus values and dual ascent.
//
// Angles are in radians, flows in p.u. Flow records use the stored line
// orientation (from -> to) in every region, so the two regions adjacent to a
// tie line compare like with like.

#ifndef DPMAINT_CONSENSUS_H_
#define DPMAINT_CONSENSUS_H_

#include <map>
#include <span>
#include <vector>

#include "dpmaint/dp_mechanism.h"
#include "dpmaint/grid_case.h"

namespace dpmaint {

// theta_tilde <- eta * received + (1 - eta) * prev; returns `received` on the
// first iteration of a phase. Throws Error(kInvalidArgument) unless
// eta is in (0, 1].
double EwmaUpdate(double prev, double received, double eta, bool first);

// Mean of the own value and one smoothed neighbour value.
inline double IntermediateConsensus(double own, double smoothed) {
  return 0.5 * (own + smoothed);
}

enum class EtaMode { kTable, kFormula, kExplicit };

// Tabulated mixing-factor grid: scale in {1.5, 3, 7.5, 15, 30} x 1e-2 and
// gamma in {4, 8, 12, 16, 20}. Throws Error(kInvalidArgument) off the grid.
double MixingFactorTable(double scale, int gamma);
// eta = 1 - (0.24 - 0.01 gamma) * scale, which reproduces every grid cell.
double MixingFactorFormula(double scale, int gamma);
double MixingFactor(double scale, int gamma, EtaMode mode);

struct ConsensusResiduals {
  double primal = 0.0;       // sum |theta - theta_bar| over shared buses/hours
  double dual = 0.0;         // sum |theta_bar_k - theta_bar_{k-1}|
  double flow_primal = 0.0;  // sum |f - f_bar| over tie lines/hours
};

class ConsensusState {
 public:
  ConsensusState() = default;
  // Zero duals and consensus values for every shared bus and tie line.
  ConsensusState(const PowerCase& c, const Region& region, double rho_theta,
                 double rho_f, double eta);

  int hours() const { return hours_; }
  const std::vector<int>& buses() const { return buses_; }
  const std::vector<TieLine>& tie_lines() const { return ties_; }
  int BusSlot(int bus) const;  // -1 when not shared by this region

  double rho_theta() const { return rho_theta_; }
  double rho_f() const { return rho_f_; }
  double eta() const { return eta_; }
  void set_eta(double eta);

  // Indexed [slot * hours + t].
  std::vector<double>& lambda() { return lambda_; }
  const std::vector<double>& lambda() const { return lambda_; }
  std::vector<double>& theta_bar() { return theta_bar_; }
  const std::vector<double>& theta_bar() const { return theta_bar_; }
  const std::vector<double>& theta_bar_prev() const { return theta_bar_prev_; }
  // Indexed [tie * hours + t], tie in tie_lines() order.
  std::vector<double>& phi() { return phi_; }
  const std::vector<double>& phi() const { return phi_; }
  std::vector<double>& flow_bar() { return flow_bar_; }
  const std::vector<double>& flow_bar() const { return flow_bar_; }

  // Smoothed copy of the angle that `neighbor` reported for `bus`, or nullptr.
  const std::vector<double>* SmoothedAngle(int bus, int neighbor) const;
  const std::vector<double>& SmoothedFlow(int tie) const;

  // Forgets the EWMA memories so the next Update() re-initialises them.
  // Duals and consensus values are kept.
  void ResetMemories();

  // One consensus round. `own_theta` holds this region's angles for buses()
  // (same slot layout as lambda()), `own_flow` its tie-line flows. Received
  // angles are first shifted by `noise_offset[bus]` (the public noise mean),
  // then smoothed; flows are rebuilt from the received angles. Throws
  // Error(kProtocol) when a message comes from a non-neighbour, names a bus
  // that is not shared with this region, or repeats a sender.
  ConsensusResiduals Update(std::span<const double> own_theta,
                            std::span<const double> own_flow,
                            std::span<const NoisyAngleMessage> inbox,
                            const std::map<int, double>& noise_offset,
                            const PowerCase& c);

  // lambda += rho_theta (theta - theta_bar); phi += rho_f (f - f_bar).
  void DualUpdate(std::span<const double> own_theta,
                  std::span<const double> own_flow);

 private:
  struct Memory {
    int slot = 0;
    int neighbor = 0;
    std::vector<double> value;
    bool initialized = false;
  };

  int hours_ = 0;
  int region_ = 0;
  std::vector<int> buses_;
  std::vector<TieLine> ties_;
  std::vector<int> neighbors_;
  double rho_theta_ = 1.0;
  double rho_f_ = 1.0;
  double eta_ = 1.0;
  std::vector<double> lambda_, theta_bar_, theta_bar_prev_;
  std::vector<double> phi_, flow_bar_;
  std::vector<Memory> angle_memory_;
  std::vector<std::vector<double>> flow_memory_;
  std::vector<bool> flow_initialized_;
};

}  // namespace dpmaint

#endif  // DPMAINT_CONSENSUS_H_
