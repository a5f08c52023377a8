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

#include "dpmaint/dpmaint.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dpmaint/bench.h"
#include "dpmaint/dp_mechanism.h"
#include "dpmaint/error.h"

struct dpm_experiment {
  dpmaint::ExperimentConfig config;
};

struct dpm_results {
  std::optional<dpmaint::CentralizedResult> centralized;
  std::vector<dpmaint::CellResult> cells;
  dpmaint::ExperimentConfig config;
};

namespace {

thread_local std::string g_last_error;

dpm_status Fail(dpm_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Runs `body`, translating exceptions into status codes.
dpm_status Guard(const std::function<void()>& body) {
  try {
    body();
    g_last_error.clear();
    return DPM_OK;
  } catch (const dpmaint::Error& e) {
    return Fail(static_cast<dpm_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return Fail(DPM_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return Fail(DPM_INTERNAL_ERROR, e.what());
  }
}

char* CopyString(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void RequireNonNull(const void* p, const char* what) {
  if (p == nullptr) {
    throw dpmaint::InvalidArgument(std::string(what) + " is null");
  }
}

void WriteFile(const char* path, const std::function<void(std::ostream&)>& f) {
  RequireNonNull(path, "path");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw dpmaint::IoError(std::string("cannot write ") + path);
  f(out);
  if (!out) throw dpmaint::IoError(std::string("write failed: ") + path);
}

dpmaint::MiqpLimits CentralizedLimits(const dpmaint::ExperimentConfig& c) {
  return c.centralized_limits;
}

double CentralizedReference(const dpmaint::Instance& inst,
                            const dpmaint::ExperimentConfig& c,
                            std::optional<dpmaint::CentralizedResult>& out) {
  // A relaxed-only run is compared with the centralized relaxation.
  const dpmaint::Phase phase =
      c.two_phase ? dpmaint::Phase::kBinary : dpmaint::Phase::kRelaxed;
  out = dpmaint::CentralizedSolve(inst.power_case, phase, CentralizedLimits(c),
                                  c.model, c.backend);
  if (!std::isfinite(out->objective)) {
    throw dpmaint::SolverError(
        std::string("centralized solve found no schedule: ") +
        dpmaint::ToString(out->status));
  }
  return out->objective;
}

dpm_status RunImpl(const dpm_experiment* e, int with_centralized, bool sweep,
                   dpm_results** out) {
  return Guard([&] {
    RequireNonNull(e, "experiment");
    RequireNonNull(out, "out");
    *out = nullptr;
    dpmaint::ExperimentConfig config = e->config;
    if (!sweep) {
      config.sweep_scales.clear();
      config.sweep_cls.clear();
      config.sweep_gammas.clear();
    }
    config.Validate();
    const dpmaint::Instance inst = dpmaint::LoadInstance(config);
    auto r = std::make_unique<dpm_results>();
    r->config = config;
    double reference = 0.0;
    if (with_centralized) reference = CentralizedReference(inst, config, r->centralized);
    if (sweep) {
      r->cells = dpmaint::Sweep(inst, config, reference);
    } else {
      for (uint64_t seed : config.seeds) {
        r->cells.push_back(dpmaint::RunCell(
            inst, config,
            {config.noise_scale, config.cl, config.gamma, seed}, reference));
      }
    }
    *out = r.release();
  });
}

}  // namespace

extern "C" {

const char* dpm_version(void) { return "1.0.0"; }

const char* dpm_status_name(dpm_status status) {
  switch (status) {
    case DPM_OK:
      return "ok";
    case DPM_INVALID_ARGUMENT:
      return "invalid-argument";
    case DPM_PARSE_ERROR:
      return "parse-error";
    case DPM_VALIDATION_ERROR:
      return "validation-error";
    case DPM_IO_ERROR:
      return "io-error";
    case DPM_PROTOCOL_ERROR:
      return "protocol-error";
    case DPM_SOLVER_ERROR:
      return "solver-error";
    case DPM_CONFIGURATION_ERROR:
      return "configuration-error";
    case DPM_INTERNAL_ERROR:
      return "internal-error";
  }
  return "unknown";
}

const char* dpm_last_error(void) { return g_last_error.c_str(); }

void dpm_string_free(char* s) { delete[] s; }

dpm_status dpm_experiment_load(const char* path, dpm_experiment** out) {
  return Guard([&] {
    RequireNonNull(path, "path");
    RequireNonNull(out, "out");
    *out = nullptr;
    auto e = std::make_unique<dpm_experiment>();
    e->config = dpmaint::ExperimentConfig::Load(path);
    *out = e.release();
  });
}

dpm_status dpm_experiment_from_json(const char* json, const char* base_dir,
                                    dpm_experiment** out) {
  return Guard([&] {
    RequireNonNull(json, "json");
    RequireNonNull(out, "out");
    *out = nullptr;
    auto e = std::make_unique<dpm_experiment>();
    e->config = dpmaint::ExperimentConfig::FromJson(
        json, base_dir ? std::filesystem::path(base_dir)
                       : std::filesystem::path());
    *out = e.release();
  });
}

dpm_status dpm_experiment_create(const char* case_path,
                                 const char* partition_path,
                                 dpm_experiment** out) {
  return Guard([&] {
    RequireNonNull(case_path, "case_path");
    RequireNonNull(out, "out");
    *out = nullptr;
    auto e = std::make_unique<dpm_experiment>();
    e->config.case_path = case_path;
    if (partition_path) e->config.partition_path = partition_path;
    *out = e.release();
  });
}

void dpm_experiment_free(dpm_experiment* e) { delete e; }

dpm_status dpm_experiment_set(dpm_experiment* e, const char* key,
                              double value) {
  return Guard([&] {
    RequireNonNull(e, "experiment");
    RequireNonNull(key, "key");
    dpmaint::ExperimentConfig& c = e->config;
    const std::string k = key;
    auto as_int = [&] {
      if (value != std::floor(value) || std::abs(value) > 2e9) {
        throw dpmaint::InvalidArgument(k + " must be an integer");
      }
      return static_cast<int>(value);
    };
    if (k == "noise_scale") {
      c.noise_scale = value;
    } else if (k == "epsilon") {
      c.epsilon = value;
    } else if (k == "noise_multiplier") {
      c.noise_multiplier = value;
    } else if (k == "debias") {
      c.debias = value != 0.0;
    } else if (k == "cl") {
      c.cl = value;
    } else if (k == "gamma") {
      c.gamma = as_int();
    } else if (k == "lookback") {
      c.lookback = as_int();
    } else if (k == "threshold_multiplier") {
      c.threshold_multiplier = value;
    } else if (k == "min_threshold") {
      c.min_threshold = value;
    } else if (k == "max_alarms_per_block") {
      c.max_alarms_per_block = as_int();
    } else if (k == "eta") {
      c.eta = value;
    } else if (k == "rho_theta") {
      c.rho_theta = value;
    } else if (k == "rho_f") {
      c.rho_f = value;
    } else if (k == "slack_penalty") {
      c.model.slack_penalty = value;
    } else if (k == "abs_dual_term") {
      c.model.abs_dual_term = value != 0.0;
    } else if (k == "time_budget_s") {
      c.time_budget_seconds = value;
    } else if (k == "max_iterations") {
      c.max_iterations = as_int();
    } else if (k == "two_phase") {
      c.two_phase = value != 0.0;
    } else if (k == "threads") {
      c.threads = as_int();
    } else if (k == "record_wall_time") {
      c.record_wall_time = value != 0.0;
    } else if (k == "miqp.node_limit") {
      c.regional_limits.node_limit = as_int();
    } else if (k == "miqp.rel_gap") {
      c.regional_limits.relative_gap = value;
    } else if (k == "centralized.node_limit") {
      c.centralized_limits.node_limit = as_int();
    } else if (k == "centralized.rel_gap") {
      c.centralized_limits.relative_gap = value;
    } else if (k == "centralized.time_limit_s") {
      c.centralized_limits.time_limit_seconds = value;
    } else {
      throw dpmaint::InvalidArgument("unknown numeric setting '" + k + "'");
    }
  });
}

dpm_status dpm_experiment_set_string(dpm_experiment* e, const char* key,
                                     const char* value) {
  return Guard([&] {
    RequireNonNull(e, "experiment");
    RequireNonNull(key, "key");
    RequireNonNull(value, "value");
    const std::string k = key, v = value;
    dpmaint::ExperimentConfig& c = e->config;
    if (k == "eta_mode") {
      if (v == "table") {
        c.eta_mode = dpmaint::EtaMode::kTable;
      } else if (v == "formula") {
        c.eta_mode = dpmaint::EtaMode::kFormula;
      } else if (v == "explicit") {
        c.eta_mode = dpmaint::EtaMode::kExplicit;
      } else {
        throw dpmaint::InvalidArgument("eta_mode: " + v);
      }
    } else if (k == "statistic") {
      if (v == "mean") {
        c.statistic = dpmaint::StatisticMode::kMean;
      } else if (v == "sum") {
        c.statistic = dpmaint::StatisticMode::kSum;
      } else {
        throw dpmaint::InvalidArgument("statistic: " + v);
      }
    } else if (k == "backend") {
      c.backend = v;
    } else if (k == "case") {
      c.case_path = v;
    } else if (k == "partition") {
      c.partition_path = v;
    } else {
      throw dpmaint::InvalidArgument("unknown string setting '" + k + "'");
    }
  });
}

dpm_status dpm_experiment_set_seeds(dpm_experiment* e, const uint64_t* seeds,
                                    size_t count) {
  return Guard([&] {
    RequireNonNull(e, "experiment");
    if (count == 0) throw dpmaint::InvalidArgument("no seeds");
    RequireNonNull(seeds, "seeds");
    e->config.seeds.assign(seeds, seeds + count);
  });
}

dpm_status dpm_experiment_set_sweep(dpm_experiment* e, const double* scales,
                                    size_t num_scales, const double* cls,
                                    size_t num_cls, const int* gammas,
                                    size_t num_gammas) {
  return Guard([&] {
    RequireNonNull(e, "experiment");
    if ((num_scales && !scales) || (num_cls && !cls) ||
        (num_gammas && !gammas)) {
      throw dpmaint::InvalidArgument("sweep axis pointer is null");
    }
    dpmaint::ExperimentConfig& c = e->config;
    if (scales) c.sweep_scales.assign(scales, scales + num_scales);
    if (cls) c.sweep_cls.assign(cls, cls + num_cls);
    if (gammas) c.sweep_gammas.assign(gammas, gammas + num_gammas);
  });
}

dpm_status dpm_experiment_validate(const dpm_experiment* e) {
  return Guard([&] {
    RequireNonNull(e, "experiment");
    e->config.Validate();
  });
}

dpm_status dpm_experiment_to_json(const dpm_experiment* e, char** out) {
  return Guard([&] {
    RequireNonNull(e, "experiment");
    RequireNonNull(out, "out");
    *out = CopyString(e->config.ToJson());
  });
}

dpm_status dpm_run(const dpm_experiment* e, int with_centralized,
                   dpm_results** out) {
  return RunImpl(e, with_centralized, false, out);
}

dpm_status dpm_sweep(const dpm_experiment* e, int with_centralized,
                     dpm_results** out) {
  return RunImpl(e, with_centralized, true, out);
}

dpm_status dpm_centralized(const dpm_experiment* e, int relaxed,
                           dpm_results** out) {
  return Guard([&] {
    RequireNonNull(e, "experiment");
    RequireNonNull(out, "out");
    *out = nullptr;
    const dpmaint::PowerCase c = dpmaint::LoadCase(e->config.case_path);
    auto r = std::make_unique<dpm_results>();
    r->config = e->config;
    r->centralized = dpmaint::CentralizedSolve(
        c, relaxed ? dpmaint::Phase::kRelaxed : dpmaint::Phase::kBinary,
        CentralizedLimits(e->config), e->config.model, e->config.backend);
    *out = r.release();
  });
}

void dpm_results_free(dpm_results* r) { delete r; }

size_t dpm_results_count(const dpm_results* r) {
  return r ? r->cells.size() : 0;
}

dpm_status dpm_results_cell(const dpm_results* r, size_t index,
                            dpm_cell_info* out) {
  return Guard([&] {
    RequireNonNull(r, "results");
    RequireNonNull(out, "out");
    if (index >= r->cells.size()) {
      throw dpmaint::InvalidArgument("cell index out of range");
    }
    const dpmaint::CellResult& c = r->cells[index];
    *out = dpm_cell_info{c.key.scale,
                         c.key.cl,
                         c.key.gamma,
                         c.key.seed,
                         c.ok ? 1 : 0,
                         c.converged ? 1 : 0,
                         c.relaxed_iterations,
                         c.binary_iterations,
                         c.objective,
                         c.gap,
                         c.flow_noise_norm,
                         c.slack_mw,
                         c.wall_seconds};
  });
}

const char* dpm_results_cell_error(const dpm_results* r, size_t index) {
  if (!r || index >= r->cells.size()) return nullptr;
  return r->cells[index].error.c_str();
}

const char* dpm_results_cell_status(const dpm_results* r, size_t index) {
  if (!r || index >= r->cells.size()) return nullptr;
  return r->cells[index].status.c_str();
}

dpm_status dpm_results_centralized(const dpm_results* r,
                                   dpm_centralized_info* out) {
  return Guard([&] {
    RequireNonNull(r, "results");
    RequireNonNull(out, "out");
    *out = dpm_centralized_info{};
    if (!r->centralized) return;
    const dpmaint::CentralizedResult& c = *r->centralized;
    out->available = 1;
    out->optimal = c.status == dpmaint::SolveStatus::kOptimal ? 1 : 0;
    out->objective = c.objective;
    out->bound = c.bound;
    out->relaxed_objective = c.relaxed_objective;
    out->nodes = c.nodes;
    out->slack_mw = c.slack_mw;
    out->wall_seconds = c.wall_seconds;
  });
}

dpm_status dpm_results_write_trace(const dpm_results* r, const char* path,
                                   int wall_time) {
  return Guard([&] {
    RequireNonNull(r, "results");
    WriteFile(path, [&](std::ostream& out) {
      dpmaint::WriteTraceCsv(r->cells, wall_time != 0, out);
    });
  });
}

dpm_status dpm_results_write_summary(const dpm_results* r, const char* path,
                                     int wall_time) {
  return Guard([&] {
    RequireNonNull(r, "results");
    WriteFile(path, [&](std::ostream& out) {
      dpmaint::WriteSummaryCsv(r->cells, wall_time != 0, out);
    });
  });
}

dpm_status dpm_results_write_plot(const dpm_results* r, const char* path) {
  return Guard([&] {
    RequireNonNull(r, "results");
    WriteFile(path, [&](std::ostream& out) {
      dpmaint::WritePlotTable(r->cells, out);
    });
  });
}

dpm_status dpm_results_report(const dpm_results* r, char** out) {
  return Guard([&] {
    RequireNonNull(r, "results");
    RequireNonNull(out, "out");
    std::ostringstream ss;
    dpmaint::WriteReport(r->config, r->centralized, r->cells, ss);
    *out = CopyString(ss.str());
  });
}

dpm_status dpm_report_from_summary(const char* summary_path, char** out) {
  return Guard([&] {
    RequireNonNull(summary_path, "summary_path");
    RequireNonNull(out, "out");
    std::ifstream in(summary_path);
    if (!in) {
      throw dpmaint::IoError(std::string("cannot open ") + summary_path);
    }
    std::ostringstream ss;
    dpmaint::WriteSummaryReport(dpmaint::ReadSummaryCsv(in), ss);
    *out = CopyString(ss.str());
  });
}

void dpm_verify_options_default(dpm_verify_options* o) {
  if (!o) return;
  o->scale = 0.015;
  o->epsilon = 1.0;
  o->gamma = 10.0;
  o->samples = 1000000;
  o->seed = 1;
  o->significance = 0.01;
}

dpm_status dpm_verify_dp(const dpm_verify_options* o, int* pass,
                         char** report) {
  return Guard([&] {
    RequireNonNull(o, "options");
    RequireNonNull(pass, "pass");
    RequireNonNull(report, "report");
    const dpmaint::PrivacyConfig config =
        dpmaint::PrivacyConfig::FromScale(o->scale, o->epsilon, 1.0, o->seed);
    config.Validate();
    const dpmaint::KsReport ks = dpmaint::VerifyFlowNoise(
        config, o->gamma, static_cast<size_t>(o->samples), o->significance);
    const dpmaint::DpRatioReport ratio = dpmaint::VerifyDpRatio(
        config.flow_scale(), config.sensitivity, config.epsilon,
        config.sensitivity, static_cast<size_t>(o->samples), o->seed);
    std::ostringstream ss;
    ss << "laplace_ks\n"
       << "samples " << ks.samples << "\nstatistic " << ks.statistic
       << "\np_value " << ks.p_value << "\nsignificance " << o->significance
       << "\nresult " << (ks.pass ? "pass" : "fail") << "\n\n"
       << "density_ratio\n"
       << ratio.ToText();
    *pass = ks.pass && ratio.pass ? 1 : 0;
    *report = CopyString(ss.str());
  });
}

}  // extern "C"
