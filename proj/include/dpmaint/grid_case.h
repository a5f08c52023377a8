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

// Network case, demand/maintenance data and the regional decomposition.
//
// A PowerCase is immutable after LoadCase()/ParseCase() returns; all indices
// (bus, line, generator) are positions in the corresponding vectors. The file
// format is documented in docs/case_format.md.

#ifndef DPMAINT_GRID_CASE_H_
#define DPMAINT_GRID_CASE_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace dpmaint {

struct Line {
  int from = 0;
  int to = 0;
  // Angle-to-flow conversion factor, p.u. flow per radian. Flow from -> to is
  // gamma * (theta_from - theta_to).
  double gamma = 0.0;
  double capacity_mw = 0.0;
};

struct Generator {
  std::string id;
  int bus = 0;
  double dispatch_cost = 0.0;    // $/MWh
  double commitment_cost = 0.0;  // $/h
  double p_min = 0.0;            // MW
  double p_max = 0.0;            // MW
  double ramp = 0.0;             // MW/h
  int min_up = 1;                // h
  int min_down = 1;              // h
  // State in the hour before the horizon starts.
  bool initial_on = false;
  double initial_output = 0.0;
};

// Maintenance data for one degraded generator (a member of G_r^d).
struct MaintenanceSpec {
  int generator = 0;
  std::vector<double> window_costs;  // K_g^m, $ per window, one per window
  int preferred_window = 0;          // zero-based
  int max_deviation = 4;             // in windows

  bool Admissible(int window) const {
    return window >= preferred_window - max_deviation &&
           window <= preferred_window + max_deviation;
  }
};

struct PowerCase {
  std::string name;
  double base_mva = 100.0;
  std::vector<std::string> buses;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  std::vector<std::vector<double>> demand;  // [bus][hour], MW
  int horizon_hours = 0;
  int window_hours = 0;
  std::vector<MaintenanceSpec> maintenance;
  int reference_bus = 0;

  int num_buses() const { return static_cast<int>(buses.size()); }
  int num_windows() const {
    return window_hours > 0 ? horizon_hours / window_hours : 0;
  }
  // Returns -1 when the id is unknown.
  int BusIndex(const std::string& id) const;
  int GeneratorIndex(const std::string& id) const;
  // Maintenance record for a generator, or nullptr when it is not degraded.
  const MaintenanceSpec* MaintenanceFor(int generator) const;
};

// Throws Error(kValidation) naming the offending element.
void ValidateCase(const PowerCase& c);

// Throws Error(kParse) on schema violations (including unknown fields) and
// Error(kValidation) on invariant violations.
PowerCase ParseCase(const std::string& json_text);
PowerCase LoadCase(const std::filesystem::path& path);
std::string SerializeCase(const PowerCase& c);

// Hours [begin, end) of each window. Windows partition the horizon exactly.
struct MaintenanceWindows {
  int window_hours = 0;
  std::vector<int> window_of_hour;
  int count() const {
    return window_hours > 0
               ? static_cast<int>(window_of_hour.size()) / window_hours
               : 0;
  }
  int begin(int m) const { return m * window_hours; }
  int end(int m) const { return (m + 1) * window_hours; }
};

MaintenanceWindows MakeMaintenanceWindows(int horizon_hours, int window_hours);
MaintenanceWindows MakeMaintenanceWindows(const PowerCase& c);

// A line whose endpoints lie in different regions, seen from one side.
struct TieLine {
  int line = 0;
  int own_bus = 0;      // u in U_r
  int foreign_bus = 0;  // v in V_r^u
  int neighbor = 0;     // region index owning foreign_bus
  // Sign that turns the stored line orientation into own -> foreign.
  double orientation = 1.0;
};

// Neighbourhood of a bus b in U_r or I_r.
struct BusNeighborhood {
  std::vector<int> internal;   // I_r^b
  std::vector<int> boundary;   // U_r^b
  std::vector<int> foreign;    // V_r^b
  std::vector<int> regions;    // N_r^b (other regions only)
  std::vector<int> generators; // G_r^b
};

struct Region {
  int index = 0;
  int external_id = 0;
  std::vector<int> internal;   // I_r
  std::vector<int> boundary;   // U_r
  std::vector<int> foreign;    // V_r
  std::vector<int> neighbors;  // N_r
  std::vector<int> generators; // G_r
  std::vector<int> degraded;   // G_r^d
  std::vector<TieLine> tie_lines;
  // Lines with both endpoints inside the region.
  std::vector<int> internal_lines;
  std::map<int, BusNeighborhood> neighborhoods;

  // U_r followed by V_r, in that order; the buses whose angles are shared.
  std::vector<int> SharedBuses() const;
  // I_r, U_r, V_r: every bus carrying an angle variable in this region.
  std::vector<int> ModeledBuses() const;
  bool Owns(int bus) const;
};

struct RegionPartition {
  std::vector<int> bus_region;  // bus -> region index
  std::vector<Region> regions;

  int num_regions() const { return static_cast<int>(regions.size()); }
  bool AreNeighbors(int a, int b) const;
  // Region index for an external region id, or -1.
  int RegionIndex(int external_id) const;
};

// bus id -> external region id. Text format: one "<bus> <region>" pair per
// line; '#' starts a comment.
std::map<std::string, int> ParsePartitionMap(const std::string& text);
std::map<std::string, int> LoadPartitionMap(const std::filesystem::path& path);
std::string SerializePartitionMap(const PowerCase& c,
                                  const RegionPartition& p);

// Throws Error(kValidation) on an uncovered or unknown bus.
RegionPartition Partition(const PowerCase& c,
                          const std::map<std::string, int>& bus_region);
RegionPartition SingleRegion(const PowerCase& c);

}  // namespace dpmaint

#endif  // DPMAINT_GRID_CASE_H_
