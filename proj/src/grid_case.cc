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

#include "dpmaint/grid_case.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "dpmaint/error.h"
#include "json.hpp"

namespace dpmaint {
namespace {

using nlohmann::json;

void CheckKeys(const json& obj, const std::string& where,
               std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) {
    throw ParseError(where + ": expected an object");
  }
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) {
      if (it.key() == a) ok = true;
    }
    if (!ok) throw ParseError(where + ": unknown field '" + it.key() + "'");
  }
}

template <typename T>
T Required(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(where + ": missing field '" + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(where + ": field '" + key + "' has the wrong type");
  }
}

template <typename T>
T Optional(const json& obj, const char* key, const std::string& where,
           T fallback) {
  if (!obj.contains(key)) return fallback;
  return Required<T>(obj, key, where);
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void SortUnique(std::vector<int>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

int PowerCase::BusIndex(const std::string& id) const {
  for (int i = 0; i < num_buses(); ++i) {
    if (buses[i] == id) return i;
  }
  return -1;
}

int PowerCase::GeneratorIndex(const std::string& id) const {
  for (int i = 0; i < static_cast<int>(generators.size()); ++i) {
    if (generators[i].id == id) return i;
  }
  return -1;
}

const MaintenanceSpec* PowerCase::MaintenanceFor(int generator) const {
  for (const auto& m : maintenance) {
    if (m.generator == generator) return &m;
  }
  return nullptr;
}

void ValidateCase(const PowerCase& c) {
  const int nb = c.num_buses();
  if (nb == 0) throw ValidationError("case has no buses");
  std::set<std::string> seen;
  for (const auto& b : c.buses) {
    if (!seen.insert(b).second) throw ValidationError("duplicate bus " + b);
  }
  if (c.base_mva <= 0) throw ValidationError("base_mva must be positive");
  if (c.horizon_hours <= 0) throw ValidationError("horizon hours must be > 0");
  if (c.window_hours <= 0) throw ValidationError("window hours must be > 0");
  if (c.horizon_hours % c.window_hours != 0) {
    throw ValidationError("horizon of " + std::to_string(c.horizon_hours) +
                          "h is not a multiple of the " +
                          std::to_string(c.window_hours) + "h window");
  }
  if (c.reference_bus < 0 || c.reference_bus >= nb) {
    throw ValidationError("reference bus out of range");
  }
  for (size_t i = 0; i < c.lines.size(); ++i) {
    const Line& l = c.lines[i];
    const std::string name = "line " + std::to_string(i);
    if (l.from < 0 || l.from >= nb || l.to < 0 || l.to >= nb) {
      throw ValidationError(name + ": unknown endpoint");
    }
    if (l.from == l.to) throw ValidationError(name + ": self loop");
    if (l.gamma == 0.0) throw ValidationError(name + ": zero susceptance");
    if (!(l.capacity_mw > 0)) {
      throw ValidationError(name + ": capacity must be positive");
    }
  }
  std::set<std::string> gen_ids;
  for (const auto& g : c.generators) {
    const std::string name = "generator " + g.id;
    if (!gen_ids.insert(g.id).second) throw ValidationError("duplicate " + name);
    if (g.bus < 0 || g.bus >= nb) throw ValidationError(name + ": unknown bus");
    if (g.p_min < 0) throw ValidationError(name + ": p_min < 0");
    if (g.p_min > g.p_max) throw ValidationError(name + ": p_min > p_max");
    if (!(g.ramp > 0)) throw ValidationError(name + ": ramp must be positive");
    if (g.min_up < 1) throw ValidationError(name + ": min_up < 1");
    if (g.min_down < 1) throw ValidationError(name + ": min_down < 1");
    if (g.dispatch_cost < 0 || g.commitment_cost < 0) {
      throw ValidationError(name + ": negative cost");
    }
  }
  if (static_cast<int>(c.demand.size()) != nb) {
    throw ValidationError("demand table does not cover every bus");
  }
  for (int b = 0; b < nb; ++b) {
    if (static_cast<int>(c.demand[b].size()) != c.horizon_hours) {
      throw ValidationError("demand for bus " + c.buses[b] +
                            " does not span the horizon");
    }
  }
  const int windows = c.num_windows();
  std::set<int> degraded;
  for (const auto& m : c.maintenance) {
    if (m.generator < 0 || m.generator >= static_cast<int>(c.generators.size())) {
      throw ValidationError("maintenance: unknown generator");
    }
    const std::string name = "maintenance for " + c.generators[m.generator].id;
    if (!degraded.insert(m.generator).second) {
      throw ValidationError("duplicate " + name);
    }
    if (static_cast<int>(m.window_costs.size()) != windows) {
      throw ValidationError(name + ": expected " + std::to_string(windows) +
                            " window costs");
    }
    for (double k : m.window_costs) {
      if (k < 0) throw ValidationError(name + ": negative window cost");
    }
    if (m.max_deviation < 0) throw ValidationError(name + ": negative deviation");
    bool any = false;
    for (int w = 0; w < windows; ++w) any = any || m.Admissible(w);
    if (!any) throw ValidationError(name + ": no admissible window");
  }
}

PowerCase ParseCase(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("case: ") + e.what());
  }
  CheckKeys(doc, "case",
            {"name", "base_mva", "reference_bus", "horizon", "buses", "lines",
             "generators", "demand", "maintenance"});
  PowerCase c;
  c.name = Optional<std::string>(doc, "name", "case", "");
  c.base_mva = Optional<double>(doc, "base_mva", "case", 100.0);

  const json& horizon = doc.contains("horizon") ? doc["horizon"] : json();
  if (horizon.is_null()) throw ParseError("case: missing section 'horizon'");
  CheckKeys(horizon, "horizon", {"hours", "window_hours"});
  c.horizon_hours = Required<int>(horizon, "hours", "horizon");
  c.window_hours = Required<int>(horizon, "window_hours", "horizon");

  if (!doc.contains("buses") || !doc["buses"].is_array()) {
    throw ParseError("case: 'buses' must be an array of ids");
  }
  for (const auto& b : doc["buses"]) {
    if (!b.is_string()) throw ParseError("buses: ids must be strings");
    c.buses.push_back(b.get<std::string>());
  }
  auto bus_of = [&](const std::string& id, const std::string& where) {
    const int i = c.BusIndex(id);
    if (i < 0) throw ValidationError(where + ": unknown bus '" + id + "'");
    return i;
  };

  const std::string ref = Optional<std::string>(
      doc, "reference_bus", "case", c.buses.empty() ? "" : c.buses.front());
  c.reference_bus = bus_of(ref, "reference_bus");

  if (doc.contains("lines")) {
    if (!doc["lines"].is_array()) throw ParseError("case: 'lines' must be an array");
    int i = 0;
    for (const auto& jl : doc["lines"]) {
      const std::string where = "lines[" + std::to_string(i++) + "]";
      CheckKeys(jl, where, {"from", "to", "gamma", "capacity_mw"});
      Line l;
      l.from = bus_of(Required<std::string>(jl, "from", where), where);
      l.to = bus_of(Required<std::string>(jl, "to", where), where);
      l.gamma = Required<double>(jl, "gamma", where);
      l.capacity_mw = Required<double>(jl, "capacity_mw", where);
      c.lines.push_back(l);
    }
  }

  if (doc.contains("generators")) {
    if (!doc["generators"].is_array()) {
      throw ParseError("case: 'generators' must be an array");
    }
    int i = 0;
    for (const auto& jg : doc["generators"]) {
      const std::string where = "generators[" + std::to_string(i++) + "]";
      CheckKeys(jg, where,
                {"id", "bus", "dispatch_cost", "commitment_cost", "p_min",
                 "p_max", "ramp", "min_up", "min_down", "initial_on",
                 "initial_output"});
      Generator g;
      g.id = Required<std::string>(jg, "id", where);
      g.bus = bus_of(Required<std::string>(jg, "bus", where), where);
      g.dispatch_cost = Required<double>(jg, "dispatch_cost", where);
      g.commitment_cost = Required<double>(jg, "commitment_cost", where);
      g.p_min = Required<double>(jg, "p_min", where);
      g.p_max = Required<double>(jg, "p_max", where);
      g.ramp = Required<double>(jg, "ramp", where);
      g.min_up = Required<int>(jg, "min_up", where);
      g.min_down = Required<int>(jg, "min_down", where);
      g.initial_on = Optional<bool>(jg, "initial_on", where, false);
      g.initial_output = Optional<double>(jg, "initial_output", where, 0.0);
      c.generators.push_back(g);
    }
  }

  c.demand.assign(c.buses.size(), std::vector<double>(
                                      std::max(c.horizon_hours, 0), 0.0));
  if (doc.contains("demand")) {
    const json& jd = doc["demand"];
    if (!jd.is_object()) throw ParseError("case: 'demand' must map bus -> array");
    for (auto it = jd.begin(); it != jd.end(); ++it) {
      const int b = c.BusIndex(it.key());
      if (b < 0) throw ParseError("demand: unknown field '" + it.key() + "'");
      if (!it.value().is_array()) {
        throw ParseError("demand." + it.key() + ": expected an array");
      }
      std::vector<double> profile;
      for (const auto& v : it.value()) {
        if (!v.is_number()) throw ParseError("demand." + it.key() + ": non-numeric");
        profile.push_back(v.get<double>());
      }
      c.demand[b] = std::move(profile);
    }
  }

  if (doc.contains("maintenance")) {
    if (!doc["maintenance"].is_array()) {
      throw ParseError("case: 'maintenance' must be an array");
    }
    int i = 0;
    for (const auto& jm : doc["maintenance"]) {
      const std::string where = "maintenance[" + std::to_string(i++) + "]";
      CheckKeys(jm, where,
                {"generator", "window_costs", "preferred_window",
                 "max_deviation"});
      MaintenanceSpec m;
      const std::string gid = Required<std::string>(jm, "generator", where);
      m.generator = c.GeneratorIndex(gid);
      if (m.generator < 0) {
        throw ValidationError(where + ": unknown generator '" + gid + "'");
      }
      m.window_costs = Required<std::vector<double>>(jm, "window_costs", where);
      m.preferred_window = Required<int>(jm, "preferred_window", where);
      m.max_deviation = Optional<int>(jm, "max_deviation", where, 4);
      c.maintenance.push_back(std::move(m));
    }
  }

  ValidateCase(c);
  return c;
}

PowerCase LoadCase(const std::filesystem::path& path) {
  return ParseCase(ReadFile(path));
}

std::string SerializeCase(const PowerCase& c) {
  json doc = json::object();
  doc["name"] = c.name;
  doc["base_mva"] = c.base_mva;
  doc["reference_bus"] = c.buses.at(c.reference_bus);
  doc["horizon"] = {{"hours", c.horizon_hours},
                    {"window_hours", c.window_hours}};
  doc["buses"] = c.buses;
  json lines = json::array();
  for (const auto& l : c.lines) {
    lines.push_back({{"from", c.buses[l.from]},
                     {"to", c.buses[l.to]},
                     {"gamma", l.gamma},
                     {"capacity_mw", l.capacity_mw}});
  }
  doc["lines"] = lines;
  json gens = json::array();
  for (const auto& g : c.generators) {
    gens.push_back({{"id", g.id},
                    {"bus", c.buses[g.bus]},
                    {"dispatch_cost", g.dispatch_cost},
                    {"commitment_cost", g.commitment_cost},
                    {"p_min", g.p_min},
                    {"p_max", g.p_max},
                    {"ramp", g.ramp},
                    {"min_up", g.min_up},
                    {"min_down", g.min_down},
                    {"initial_on", g.initial_on},
                    {"initial_output", g.initial_output}});
  }
  doc["generators"] = gens;
  json demand = json::object();
  for (int b = 0; b < c.num_buses(); ++b) demand[c.buses[b]] = c.demand[b];
  doc["demand"] = demand;
  json maint = json::array();
  for (const auto& m : c.maintenance) {
    maint.push_back({{"generator", c.generators[m.generator].id},
                     {"window_costs", m.window_costs},
                     {"preferred_window", m.preferred_window},
                     {"max_deviation", m.max_deviation}});
  }
  doc["maintenance"] = maint;
  return doc.dump(2);
}

MaintenanceWindows MakeMaintenanceWindows(int horizon_hours, int window_hours) {
  if (window_hours <= 0 || horizon_hours <= 0 ||
      horizon_hours % window_hours != 0) {
    throw ValidationError("horizon of " + std::to_string(horizon_hours) +
                          "h cannot be split into " +
                          std::to_string(window_hours) + "h windows");
  }
  MaintenanceWindows w;
  w.window_hours = window_hours;
  w.window_of_hour.resize(horizon_hours);
  for (int t = 0; t < horizon_hours; ++t) w.window_of_hour[t] = t / window_hours;
  return w;
}

MaintenanceWindows MakeMaintenanceWindows(const PowerCase& c) {
  return MakeMaintenanceWindows(c.horizon_hours, c.window_hours);
}

std::vector<int> Region::SharedBuses() const {
  std::vector<int> out = boundary;
  out.insert(out.end(), foreign.begin(), foreign.end());
  return out;
}

std::vector<int> Region::ModeledBuses() const {
  std::vector<int> out = internal;
  out.insert(out.end(), boundary.begin(), boundary.end());
  out.insert(out.end(), foreign.begin(), foreign.end());
  return out;
}

bool Region::Owns(int bus) const {
  return std::binary_search(internal.begin(), internal.end(), bus) ||
         std::binary_search(boundary.begin(), boundary.end(), bus);
}

bool RegionPartition::AreNeighbors(int a, int b) const {
  if (a < 0 || a >= num_regions()) return false;
  const auto& n = regions[a].neighbors;
  return std::binary_search(n.begin(), n.end(), b);
}

int RegionPartition::RegionIndex(int external_id) const {
  for (const auto& r : regions) {
    if (r.external_id == external_id) return r.index;
  }
  return -1;
}

std::map<std::string, int> ParsePartitionMap(const std::string& text) {
  std::map<std::string, int> out;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = Trim(raw.substr(0, hash));
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string bus;
    int region = 0;
    std::string extra;
    if (!(ls >> bus >> region) || (ls >> extra)) {
      throw ParseError("partition line " + std::to_string(lineno) +
                       ": expected '<bus> <region>'");
    }
    if (!out.emplace(bus, region).second) {
      throw ParseError("partition: bus " + bus + " listed twice");
    }
  }
  return out;
}

std::map<std::string, int> LoadPartitionMap(const std::filesystem::path& path) {
  return ParsePartitionMap(ReadFile(path));
}

std::string SerializePartitionMap(const PowerCase& c,
                                  const RegionPartition& p) {
  std::ostringstream out;
  for (int b = 0; b < c.num_buses(); ++b) {
    out << c.buses[b] << ' ' << p.regions[p.bus_region[b]].external_id << '\n';
  }
  return out.str();
}

RegionPartition Partition(const PowerCase& c,
                          const std::map<std::string, int>& bus_region) {
  const int nb = c.num_buses();
  for (const auto& [bus, region] : bus_region) {
    if (c.BusIndex(bus) < 0) {
      throw ValidationError("partition: unknown bus " + bus);
    }
  }
  std::set<int> ids;
  std::vector<int> external(nb);
  for (int b = 0; b < nb; ++b) {
    auto it = bus_region.find(c.buses[b]);
    if (it == bus_region.end()) {
      throw ValidationError("partition: bus " + c.buses[b] + " is not covered");
    }
    external[b] = it->second;
    ids.insert(it->second);
  }
  // Region ids must be contiguous; a gap is a region without buses.
  const int lo = *ids.begin();
  const int hi = *ids.rbegin();
  for (int id = lo; id <= hi; ++id) {
    if (!ids.count(id)) {
      throw ValidationError("partition: region " + std::to_string(id) +
                            " is empty");
    }
  }

  RegionPartition p;
  p.bus_region.resize(nb);
  for (int b = 0; b < nb; ++b) p.bus_region[b] = external[b] - lo;
  p.regions.resize(hi - lo + 1);
  for (int r = 0; r < p.num_regions(); ++r) {
    p.regions[r].index = r;
    p.regions[r].external_id = lo + r;
  }

  std::vector<std::vector<int>> incident(nb);
  for (int i = 0; i < static_cast<int>(c.lines.size()); ++i) {
    incident[c.lines[i].from].push_back(i);
    incident[c.lines[i].to].push_back(i);
  }

  for (Region& reg : p.regions) {
    const int r = reg.index;
    std::vector<int> boundary, foreign, internal, neighbors;
    for (int b = 0; b < nb; ++b) {
      if (p.bus_region[b] != r) continue;
      bool crosses = false;
      for (int li : incident[b]) {
        const Line& l = c.lines[li];
        const int other = l.from == b ? l.to : l.from;
        if (p.bus_region[other] != r) {
          crosses = true;
          foreign.push_back(other);
          neighbors.push_back(p.bus_region[other]);
          TieLine tl;
          tl.line = li;
          tl.own_bus = b;
          tl.foreign_bus = other;
          tl.neighbor = p.bus_region[other];
          tl.orientation = l.from == b ? 1.0 : -1.0;
          reg.tie_lines.push_back(tl);
        } else if (l.from == b) {
          reg.internal_lines.push_back(li);
        }
      }
      (crosses ? boundary : internal).push_back(b);
    }
    SortUnique(foreign);
    SortUnique(neighbors);
    reg.internal = internal;
    reg.boundary = boundary;
    reg.foreign = foreign;
    reg.neighbors = neighbors;
    std::sort(reg.tie_lines.begin(), reg.tie_lines.end(),
              [](const TieLine& a, const TieLine& b) { return a.line < b.line; });
    std::sort(reg.internal_lines.begin(), reg.internal_lines.end());
    for (int g = 0; g < static_cast<int>(c.generators.size()); ++g) {
      if (p.bus_region[c.generators[g].bus] != r) continue;
      reg.generators.push_back(g);
      if (c.MaintenanceFor(g) != nullptr) reg.degraded.push_back(g);
    }
    for (int b : reg.internal) reg.neighborhoods[b] = {};
    for (int b : reg.boundary) reg.neighborhoods[b] = {};
    for (auto& [b, nbh] : reg.neighborhoods) {
      for (int li : incident[b]) {
        const Line& l = c.lines[li];
        const int other = l.from == b ? l.to : l.from;
        if (p.bus_region[other] != r) {
          nbh.foreign.push_back(other);
          nbh.regions.push_back(p.bus_region[other]);
        } else if (std::binary_search(reg.boundary.begin(), reg.boundary.end(),
                                      other)) {
          nbh.boundary.push_back(other);
        } else {
          nbh.internal.push_back(other);
        }
      }
      SortUnique(nbh.foreign);
      SortUnique(nbh.regions);
      SortUnique(nbh.boundary);
      SortUnique(nbh.internal);
      for (int g : reg.generators) {
        if (c.generators[g].bus == b) nbh.generators.push_back(g);
      }
    }
  }
  return p;
}

RegionPartition SingleRegion(const PowerCase& c) {
  std::map<std::string, int> m;
  for (const auto& b : c.buses) m[b] = 1;
  return Partition(c, m);
}

}  // namespace dpmaint
