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

#include "dpmaint/bench.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <tuple>

#include "dpmaint/error.h"
#include "json.hpp"

namespace dpmaint {
namespace {

using nlohmann::json;

double Now() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void CheckKeys(const json& obj, const std::string& where,
               std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* a) { return it.key() == a; })) {
      throw ParseError(where + ": unknown field '" + it.key() + "'");
    }
  }
}

template <typename T>
void Read(const json& obj, const char* key, T& target) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    target = it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string("config: field '") + key +
                     "' has the wrong type");
  }
}

void ReadLimits(const json& obj, const char* key, MiqpLimits& limits) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  CheckKeys(*it, std::string("config.") + key,
            {"node_limit", "rel_gap", "abs_gap", "time_limit_s", "root_dive"});
  Read(*it, "node_limit", limits.node_limit);
  Read(*it, "rel_gap", limits.relative_gap);
  Read(*it, "abs_gap", limits.absolute_gap);
  Read(*it, "time_limit_s", limits.time_limit_seconds);
  Read(*it, "root_dive", limits.root_dive);
}

json LimitsJson(const MiqpLimits& l) {
  json j = {{"node_limit", l.node_limit},
            {"rel_gap", l.relative_gap},
            {"abs_gap", l.absolute_gap},
            {"root_dive", l.root_dive}};
  if (std::isfinite(l.time_limit_seconds)) {
    j["time_limit_s"] = l.time_limit_seconds;
  }
  return j;
}

std::filesystem::path Resolve(const std::filesystem::path& base,
                              const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

const char* EtaModeName(EtaMode m) {
  switch (m) {
    case EtaMode::kTable:
      return "table";
    case EtaMode::kFormula:
      return "formula";
    case EtaMode::kExplicit:
      return "explicit";
  }
  return "?";
}

// Shortest round-trippable decimal, so CSVs are stable and exact.
std::string Num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream ss;
  ss << std::setprecision(10) << v;
  return ss.str();
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string KeyColumns(const CellKey& k) {
  return Num(k.scale) + "," + Num(k.cl) + "," + std::to_string(k.gamma) +
         "," + std::to_string(k.seed);
}

bool KeyLess(const CellKey& a, const CellKey& b) {
  return std::tie(a.scale, a.cl, a.gamma, a.seed) <
         std::tie(b.scale, b.cl, b.gamma, b.seed);
}

}  // namespace

ExperimentConfig ExperimentConfig::FromJson(
    const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  CheckKeys(j, "config",
            {"case", "partition", "noise_scale", "epsilon",
             "noise_multiplier", "debias", "cl", "gamma", "lookback",
             "threshold_multiplier", "min_threshold", "statistic",
             "max_alarms_per_block", "eta_mode", "eta", "rho_theta", "rho_f",
             "slack_enabled", "slack_penalty", "abs_dual_term", "backend",
             "miqp", "centralized", "time_budget_s", "max_iterations",
             "two_phase", "threads", "record_wall_time", "seeds", "sweep"});
  ExperimentConfig c;
  std::string case_path, partition_path, statistic = "mean",
                                         eta_mode = "formula";
  Read(j, "case", case_path);
  Read(j, "partition", partition_path);
  c.case_path = Resolve(base_dir, case_path);
  c.partition_path = Resolve(base_dir, partition_path);
  Read(j, "noise_scale", c.noise_scale);
  Read(j, "epsilon", c.epsilon);
  Read(j, "noise_multiplier", c.noise_multiplier);
  Read(j, "debias", c.debias);
  Read(j, "cl", c.cl);
  Read(j, "gamma", c.gamma);
  Read(j, "lookback", c.lookback);
  Read(j, "threshold_multiplier", c.threshold_multiplier);
  Read(j, "min_threshold", c.min_threshold);
  Read(j, "statistic", statistic);
  Read(j, "max_alarms_per_block", c.max_alarms_per_block);
  Read(j, "eta_mode", eta_mode);
  Read(j, "eta", c.eta);
  Read(j, "rho_theta", c.rho_theta);
  Read(j, "rho_f", c.rho_f);
  Read(j, "slack_enabled", c.model.slack_enabled);
  Read(j, "slack_penalty", c.model.slack_penalty);
  Read(j, "abs_dual_term", c.model.abs_dual_term);
  Read(j, "backend", c.backend);
  ReadLimits(j, "miqp", c.regional_limits);
  ReadLimits(j, "centralized", c.centralized_limits);
  Read(j, "time_budget_s", c.time_budget_seconds);
  Read(j, "max_iterations", c.max_iterations);
  Read(j, "two_phase", c.two_phase);
  Read(j, "threads", c.threads);
  Read(j, "record_wall_time", c.record_wall_time);
  Read(j, "seeds", c.seeds);
  if (auto it = j.find("sweep"); it != j.end()) {
    CheckKeys(*it, "config.sweep", {"scales", "cls", "gammas"});
    Read(*it, "scales", c.sweep_scales);
    Read(*it, "cls", c.sweep_cls);
    Read(*it, "gammas", c.sweep_gammas);
  }

  if (statistic == "mean") {
    c.statistic = StatisticMode::kMean;
  } else if (statistic == "sum") {
    c.statistic = StatisticMode::kSum;
  } else {
    throw ParseError("config: statistic must be 'mean' or 'sum'");
  }
  if (eta_mode == "table") {
    c.eta_mode = EtaMode::kTable;
  } else if (eta_mode == "formula") {
    c.eta_mode = EtaMode::kFormula;
  } else if (eta_mode == "explicit") {
    c.eta_mode = EtaMode::kExplicit;
  } else {
    throw ParseError("config: eta_mode must be table, formula or explicit");
  }
  return c;
}

ExperimentConfig ExperimentConfig::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return FromJson(ss.str(), path.parent_path());
}

std::string ExperimentConfig::ToJson() const {
  json j = {
      {"case", case_path.string()},
      {"partition", partition_path.string()},
      {"noise_scale", noise_scale},
      {"epsilon", epsilon},
      {"noise_multiplier", noise_multiplier},
      {"debias", debias},
      {"cl", cl},
      {"gamma", gamma},
      {"lookback", lookback},
      {"threshold_multiplier", threshold_multiplier},
      {"min_threshold", min_threshold},
      {"statistic", statistic == StatisticMode::kMean ? "mean" : "sum"},
      {"max_alarms_per_block", max_alarms_per_block},
      {"eta_mode", EtaModeName(eta_mode)},
      {"eta", eta},
      {"rho_theta", rho_theta},
      {"rho_f", rho_f},
      {"slack_enabled", model.slack_enabled},
      {"slack_penalty", model.slack_penalty},
      {"abs_dual_term", model.abs_dual_term},
      {"backend", backend},
      {"miqp", LimitsJson(regional_limits)},
      {"centralized", LimitsJson(centralized_limits)},
      {"time_budget_s", time_budget_seconds},
      {"max_iterations", max_iterations},
      {"two_phase", two_phase},
      {"threads", threads},
      {"record_wall_time", record_wall_time},
      {"seeds", seeds},
      {"sweep",
       {{"scales", sweep_scales}, {"cls", sweep_cls}, {"gammas", sweep_gammas}}},
  };
  return j.dump(2) + "\n";
}

void ExperimentConfig::Validate() const {
  GetBackend(backend);
  if (case_path.empty() || !std::filesystem::exists(case_path)) {
    throw ConfigurationError("case file not found: " + case_path.string());
  }
  if (!partition_path.empty() && !std::filesystem::exists(partition_path)) {
    throw ConfigurationError("partition file not found: " +
                             partition_path.string());
  }
  if (seeds.empty()) throw ConfigurationError("at least one seed is required");
  if (!(rho_theta > 0) || !(rho_f > 0)) {
    throw ConfigurationError("rho_theta and rho_f must be positive");
  }
  if (!(time_budget_seconds > 0)) {
    throw ConfigurationError("time_budget_s must be positive");
  }
  if (max_iterations < 0) {
    throw ConfigurationError("max_iterations must be nonnegative");
  }
  if (threads < 1) throw ConfigurationError("threads must be at least 1");
  if (!(model.slack_penalty > 0)) {
    throw ConfigurationError("slack_penalty must be positive");
  }
  // Range checks of the owning modules, once per grid point.
  const std::vector<double> scales =
      sweep_scales.empty() ? std::vector<double>{noise_scale} : sweep_scales;
  const std::vector<double> cls =
      sweep_cls.empty() ? std::vector<double>{cl} : sweep_cls;
  const std::vector<int> gammas =
      sweep_gammas.empty() ? std::vector<int>{gamma} : sweep_gammas;
  for (double s : scales) {
    for (double l : cls) {
      for (int g : gammas) {
        PrivacyConfig::FromScale(s, epsilon, noise_multiplier, seeds.front())
            .Validate();
        ChartConfig chart = ChartConfig::FromGamma(g, lookback);
        chart.cl = l;
        chart.threshold_multiplier = threshold_multiplier;
        chart.min_threshold = min_threshold;
        chart.mode = statistic;
        chart.max_alarms_per_block = max_alarms_per_block;
        chart.Validate();
      }
    }
  }
  // A sweep records a point without a valid mixing factor as a failed cell.
  if (sweep_scales.empty() && sweep_gammas.empty()) {
    try {
      MixingFactorFor(noise_scale, gamma);
    } catch (const Error& e) {
      throw ConfigurationError(e.what());
    }
  }
}

double ExperimentConfig::MixingFactorFor(double scale, int g) const {
  if (eta_mode == EtaMode::kExplicit) {
    if (!(eta > 0 && eta <= 1)) {
      throw ConfigurationError("eta must be in (0, 1]");
    }
    return eta;
  }
  return MixingFactor(scale, g, eta_mode);
}

RunConfig ExperimentConfig::ToRunConfig(double scale, double cl_value,
                                        int g, uint64_t seed) const {
  RunConfig rc;
  rc.privacy = PrivacyConfig::FromScale(scale, epsilon, noise_multiplier, seed);
  rc.chart = ChartConfig::FromGamma(g, lookback);
  rc.chart.cl = cl_value;
  rc.chart.threshold_multiplier = threshold_multiplier;
  rc.chart.min_threshold = min_threshold;
  rc.chart.mode = statistic;
  rc.chart.max_alarms_per_block = max_alarms_per_block;
  rc.rho_theta = rho_theta;
  rc.rho_f = rho_f;
  rc.eta = MixingFactorFor(scale, g);
  rc.debias = debias;
  rc.model = model;
  rc.backend = backend;
  rc.limits = regional_limits;
  rc.time_budget_seconds = time_budget_seconds;
  rc.max_iterations = max_iterations;
  rc.two_phase = two_phase;
  rc.threads = threads;
  rc.record_wall_time = record_wall_time;
  return rc;
}

Instance LoadInstance(const ExperimentConfig& config) {
  Instance inst;
  inst.power_case = LoadCase(config.case_path);
  inst.partition =
      config.partition_path.empty()
          ? SingleRegion(inst.power_case)
          : Partition(inst.power_case, LoadPartitionMap(config.partition_path));
  return inst;
}

CentralizedResult CentralizedSolve(const PowerCase& c, Phase phase,
                                   const MiqpLimits& limits,
                                   const ModelConfig& model,
                                   const std::string& backend) {
  const double t0 = Now();
  const RegionPartition whole = SingleRegion(c);
  // A single region shares no buses, so the subproblem has no penalty terms.
  const ConsensusState none(c, whole.regions[0], 1.0, 1.0, 1.0);
  CentralizedResult out;
  const RegionalProblem relaxed =
      BuildSubproblem(c, whole, 0, none, Phase::kRelaxed, model);
  const MiqpSolution rs = SolveQp(relaxed.problem);
  if (rs.status != SolveStatus::kOptimal) {
    throw SolverError(std::string("centralized relaxation: ") +
                      ToString(rs.status));
  }
  out.relaxed_objective = rs.objective;

  MiqpSolution sol = rs;
  const RegionalProblem* used = &relaxed;
  RegionalProblem binary;
  if (phase == Phase::kBinary) {
    binary = BuildSubproblem(c, whole, 0, none, Phase::kBinary, model);
    sol = GetBackend(backend)->Solve(binary.problem, limits, nullptr);
    used = &binary;
  }
  out.status = sol.status;
  out.bound = sol.bound;
  out.nodes = sol.nodes;
  if (sol.has_solution()) {
    out.objective = sol.objective;
    out.schedule = ExtractSolution(*used, sol);
    for (const auto& s : out.schedule.slack) {
      for (double v : s) out.slack_mw += v;
    }
  }
  out.wall_seconds = Now() - t0;
  return out;
}

double OptimalityGap(double decentralized, double centralized,
                     bool converged) {
  if (!(centralized > 0)) {
    throw InvalidArgument("optimality gap needs a positive centralized "
                          "objective, got " + Num(centralized));
  }
  if (!converged) return kNonConvergedGap;
  return std::abs(decentralized - centralized) / centralized;
}

double FlowNoiseNorm(std::span<const double> true_flows,
                     std::span<const double> dp_flows) {
  if (true_flows.size() != dp_flows.size()) {
    throw InvalidArgument("flow vectors differ in length: " +
                          std::to_string(true_flows.size()) + " vs " +
                          std::to_string(dp_flows.size()));
  }
  double sum = 0.0;
  for (size_t i = 0; i < true_flows.size(); ++i) {
    const double d = true_flows[i] - dp_flows[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double FlowNoiseNorm(const std::vector<FlowObservation>& flows,
                     double base_mva) {
  std::vector<double> a, b;
  a.reserve(flows.size());
  b.reserve(flows.size());
  for (const FlowObservation& f : flows) {
    a.push_back(base_mva * f.true_flow);
    b.push_back(base_mva * f.dp_flow);
  }
  return FlowNoiseNorm(a, b);
}

CellResult RunCell(const Instance& instance, const ExperimentConfig& config,
                   const CellKey& key, double centralized_objective) {
  CellResult cell;
  cell.key = key;
  const RunConfig rc =
      config.ToRunConfig(key.scale, key.cl, key.gamma, key.seed);
  const double t0 = Now();
  RunResult r = RunTwoPhase(instance.power_case, instance.partition, rc);
  cell.wall_seconds = Now() - t0;
  cell.ok = true;
  cell.status = r.status;
  cell.converged = r.converged;
  for (const PhaseResult& ph : r.phases) {
    (ph.phase == Phase::kRelaxed ? cell.relaxed_iterations
                                 : cell.binary_iterations) = ph.iterations;
  }
  cell.objective = r.objective;
  cell.gap = centralized_objective > 0
                 ? OptimalityGap(r.objective, centralized_objective,
                                 r.converged)
                 : std::nan("");
  cell.flow_noise_norm =
      FlowNoiseNorm(r.final_flows, instance.power_case.base_mva);
  cell.slack_mw = r.slack_mw;
  cell.warm_start_used = r.warm_start_used;
  cell.trace = std::move(r.trace);
  return cell;
}

std::vector<CellResult> Sweep(const Instance& instance,
                              const ExperimentConfig& config,
                              double centralized_objective) {
  std::vector<double> scales = config.sweep_scales;
  std::vector<double> cls = config.sweep_cls;
  std::vector<int> gammas = config.sweep_gammas;
  std::vector<uint64_t> seeds = config.seeds;
  if (scales.empty()) scales = {config.noise_scale};
  if (cls.empty()) cls = {config.cl};
  if (gammas.empty()) gammas = {config.gamma};
  std::vector<CellKey> keys;
  for (double s : scales) {
    for (double l : cls) {
      for (int g : gammas) {
        for (uint64_t seed : seeds) keys.push_back({s, l, g, seed});
      }
    }
  }
  std::sort(keys.begin(), keys.end(), KeyLess);

  std::vector<CellResult> out;
  for (const CellKey& key : keys) {
    try {
      out.push_back(RunCell(instance, config, key, centralized_objective));
    } catch (const std::exception& e) {
      CellResult failed;
      failed.key = key;
      failed.status = "error";
      failed.error = e.what();
      out.push_back(std::move(failed));
    }
  }
  return out;
}

double Median(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("median of an empty set");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<CellSummary> Summarize(const std::vector<CellResult>& cells) {
  std::map<std::tuple<double, double, int>, std::vector<const CellResult*>>
      groups;
  for (const CellResult& c : cells) {
    groups[{c.key.scale, c.key.cl, c.key.gamma}].push_back(&c);
  }
  std::vector<CellSummary> out;
  for (const auto& [k, runs] : groups) {
    CellSummary s;
    std::tie(s.scale, s.cl, s.gamma) = k;
    s.runs = static_cast<int>(runs.size());
    std::vector<double> gaps, walls;
    double noise = 0.0;
    for (const CellResult* c : runs) {
      if (!c->ok) {
        ++s.failed;
        continue;
      }
      if (c->converged) ++s.converged;
      gaps.push_back(c->gap);
      walls.push_back(c->wall_seconds);
      noise += c->flow_noise_norm;
    }
    if (!gaps.empty()) {
      const double n = static_cast<double>(gaps.size());
      for (double g : gaps) s.mean_gap += g / n;
      s.median_gap = Median(gaps);
      s.mean_flow_noise = noise / n;
      for (double w : walls) s.mean_wall_seconds += w / n;
      double var = 0.0;
      for (double w : walls) {
        var += (w - s.mean_wall_seconds) * (w - s.mean_wall_seconds);
      }
      s.std_wall_seconds = walls.size() > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    }
    out.push_back(s);
  }
  return out;
}

void WriteTraceCsv(const std::vector<CellResult>& cells, bool wall_time,
                   std::ostream& out) {
  out << "scale,cl,gamma,seed,phase,iteration,region,local_cost,"
         "subproblem_objective,primal_residual,dual_residual,flow_residual,"
         "tolerance,chart_points,max_abs_point,alarms,kappa,lambda_norm,"
         "phi_norm,slack_mw,local_converged,global_converged";
  if (wall_time) out << ",wall_seconds";
  out << "\n";
  for (const CellResult& c : cells) {
    const std::string key = KeyColumns(c.key);
    for (const TraceRecord& t : c.trace) {
      out << key << ',' << ToString(t.phase) << ',' << t.iteration << ','
          << t.region << ',' << Num(t.local_cost) << ','
          << Num(t.subproblem_objective) << ',' << Num(t.primal_residual)
          << ',' << Num(t.dual_residual) << ',' << Num(t.flow_residual)
          << ',' << Num(t.tolerance) << ',' << t.chart_points << ','
          << Num(t.max_abs_point) << ',' << t.alarms << ',' << t.kappa << ','
          << Num(t.lambda_norm) << ',' << Num(t.phi_norm) << ','
          << Num(t.slack_mw) << ',' << (t.local_converged ? 1 : 0) << ','
          << (t.global_converged ? 1 : 0);
      if (wall_time) out << ',' << Num(t.wall_seconds);
      out << "\n";
    }
  }
}

void WriteSummaryCsv(const std::vector<CellResult>& cells, bool wall_time,
                     std::ostream& out) {
  out << "scale,cl,gamma,seed,status,converged,relaxed_iterations,"
         "binary_iterations,objective,gap,flow_noise_norm_mw,slack_mw,"
         "warm_start_used,error";
  if (wall_time) out << ",wall_seconds";
  out << "\n";
  for (const CellResult& c : cells) {
    out << KeyColumns(c.key) << ',' << c.status << ','
        << (c.converged ? 1 : 0) << ',' << c.relaxed_iterations << ','
        << c.binary_iterations << ',' << Num(c.objective) << ','
        << Num(c.gap) << ',' << Num(c.flow_noise_norm) << ','
        << Num(c.slack_mw) << ',' << (c.warm_start_used ? 1 : 0) << ','
        << CsvField(c.error);
    if (wall_time) out << ',' << Num(c.wall_seconds);
    out << "\n";
  }
}

namespace {

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        fields.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back();
    } else if (ch != '\r') {
      fields.back() += ch;
    }
  }
  return fields;
}

double ParseNum(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) {
    throw ParseError("summary: bad number '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<CellResult> ReadSummaryCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("summary: empty input");
  const std::vector<std::string> header = SplitCsvLine(line);
  std::map<std::string, size_t> col;
  for (size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* need :
       {"scale", "cl", "gamma", "seed", "status", "converged",
        "relaxed_iterations", "binary_iterations", "objective", "gap",
        "flow_noise_norm_mw", "slack_mw", "warm_start_used", "error"}) {
    if (!col.count(need)) {
      throw ParseError(std::string("summary: missing column '") + need + "'");
    }
  }
  std::vector<CellResult> cells;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> f = SplitCsvLine(line);
    if (f.size() != header.size()) {
      throw ParseError("summary line " + std::to_string(line_no) + ": " +
                       std::to_string(f.size()) + " fields, expected " +
                       std::to_string(header.size()));
    }
    auto get = [&](const char* name) { return f[col.at(name)]; };
    CellResult c;
    c.key.scale = ParseNum(get("scale"));
    c.key.cl = ParseNum(get("cl"));
    c.key.gamma = static_cast<int>(ParseNum(get("gamma")));
    c.key.seed = static_cast<uint64_t>(ParseNum(get("seed")));
    c.status = get("status");
    c.error = get("error");
    c.ok = c.status != "error";
    c.converged = get("converged") == "1";
    c.relaxed_iterations = static_cast<int>(ParseNum(get("relaxed_iterations")));
    c.binary_iterations = static_cast<int>(ParseNum(get("binary_iterations")));
    c.objective = ParseNum(get("objective"));
    c.gap = ParseNum(get("gap"));
    c.flow_noise_norm = ParseNum(get("flow_noise_norm_mw"));
    c.slack_mw = ParseNum(get("slack_mw"));
    c.warm_start_used = get("warm_start_used") == "1";
    if (col.count("wall_seconds")) c.wall_seconds = ParseNum(get("wall_seconds"));
    cells.push_back(std::move(c));
  }
  return cells;
}

void WritePlotTable(const std::vector<CellResult>& cells, std::ostream& out) {
  out << "# scale cl gamma seed metric value\n";
  for (const CellResult& c : cells) {
    if (!c.ok) continue;
    const std::string key = Num(c.key.scale) + ' ' + Num(c.key.cl) + ' ' +
                            std::to_string(c.key.gamma) + ' ' +
                            std::to_string(c.key.seed) + ' ';
    out << key << "gap " << Num(c.gap) << "\n";
    out << key << "flow_noise_norm_mw " << Num(c.flow_noise_norm) << "\n";
    out << key << "objective " << Num(c.objective) << "\n";
    out << key << "iterations "
        << c.relaxed_iterations + c.binary_iterations << "\n";
  }
}

void WriteReport(const ExperimentConfig& config,
                 const std::optional<CentralizedResult>& centralized,
                 const std::vector<CellResult>& cells, std::ostream& out) {
  out << "case: " << config.case_path.string() << "\n";
  out << "partition: "
      << (config.partition_path.empty() ? std::string("(single region)")
                                        : config.partition_path.string())
      << "\n";
  out << "rho_theta " << Num(config.rho_theta) << ", rho_f "
      << Num(config.rho_f) << ", lookback " << config.lookback
      << ", eta mode " << EtaModeName(config.eta_mode) << "\n";
  if (centralized) {
    out << "centralized: status " << ToString(centralized->status)
        << ", objective " << Num(centralized->objective) << ", bound "
        << Num(centralized->bound) << ", relaxation "
        << Num(centralized->relaxed_objective) << ", nodes "
        << centralized->nodes << ", slack " << Num(centralized->slack_mw)
        << " MW, " << std::fixed << std::setprecision(2)
        << centralized->wall_seconds << " s\n";
    out.unsetf(std::ios::floatfield);
  }
  out << "\nruns\n";
  for (const CellResult& c : cells) {
    out << "  scale " << Num(c.key.scale) << " cl " << Num(c.key.cl)
        << " gamma " << c.key.gamma << " seed " << c.key.seed << ": ";
    if (!c.ok) {
      out << "error: " << c.error << "\n";
      continue;
    }
    out << c.status << ", iterations " << c.relaxed_iterations << "+"
        << c.binary_iterations << ", objective " << Num(c.objective)
        << ", gap " << Num(c.gap) << ", flow noise "
        << Num(c.flow_noise_norm) << " MW\n";
  }
  out << "\n";
  WriteSummaryReport(cells, out);
}

void WriteSummaryReport(const std::vector<CellResult>& cells,
                        std::ostream& out) {
  out << "summary (mean/std time include runs that did not converge)\n";
  for (const CellSummary& s : Summarize(cells)) {
    out << "  scale " << Num(s.scale) << " cl " << Num(s.cl) << " gamma "
        << s.gamma << ": " << s.converged << "/" << s.runs << " converged";
    if (s.failed > 0) out << ", " << s.failed << " failed";
    out << ", mean gap " << Num(s.mean_gap) << ", median gap "
        << Num(s.median_gap) << ", mean flow noise "
        << Num(s.mean_flow_noise) << " MW, time " << std::fixed
        << std::setprecision(2) << s.mean_wall_seconds << " +- "
        << s.std_wall_seconds << " s\n";
    out.unsetf(std::ios::floatfield);
    out << std::setprecision(6);
  }
}

}  // namespace dpmaint
