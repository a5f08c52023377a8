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

// Command-line driver. Talks to the library through the C API only.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dpmaint/dpmaint.h"

namespace {

// Thrown after a failed C call; carries the status for the exit code.
struct CallFailed {
  dpm_status status;
};

void Check(dpm_status s, const char* what) {
  if (s == DPM_OK) return;
  std::cerr << "dpmaint: " << what << ": " << dpm_status_name(s) << ": "
            << dpm_last_error() << "\n";
  throw CallFailed{s};
}

template <typename T, void (*Free)(T*)>
struct Owned {
  T* p = nullptr;
  ~Owned() { Free(p); }
};
using Experiment = Owned<dpm_experiment, dpm_experiment_free>;
using Results = Owned<dpm_results, dpm_results_free>;

struct Text {
  char* p = nullptr;
  ~Text() { dpm_string_free(p); }
};

// Flags shared by `run` and `sweep`; unset ones keep the config value.
struct Overrides {
  std::string config, case_path, partition, eta_mode, statistic, backend;
  std::optional<double> scale, epsilon, cl, rho_theta, rho_f,
      noise_multiplier, min_threshold, threshold_multiplier, eta,
      time_budget, slack_penalty, node_limit, rel_gap;
  std::optional<int> gamma, lookback, max_iterations, threads;
  std::vector<uint64_t> seeds;
  bool relaxed_only = false;
  bool wall_time = false;
  bool centralized = false;
  std::string out = ".";
};

void AddOverrideFlags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config, "experiment config (JSON)");
  cmd->add_option("--case", o.case_path, "case file (overrides config)");
  cmd->add_option("--partition", o.partition, "partition file");
  cmd->add_option("--scale", o.scale, "noise scale omega/epsilon");
  cmd->add_option("--epsilon", o.epsilon, "privacy parameter");
  cmd->add_option("--noise-multiplier", o.noise_multiplier,
                  "m_alpha; 0 disables noise");
  cmd->add_option("--cl", o.cl, "convergence level");
  cmd->add_option("--gamma", o.gamma, "chart/consensus tuning index");
  cmd->add_option("--lookback", o.lookback, "iterations per chart point");
  cmd->add_option("--threshold-multiplier", o.threshold_multiplier,
                  "alarm limit multiplier L");
  cmd->add_option("--min-threshold", o.min_threshold,
                  "floor of the alarm limit (rad)");
  cmd->add_option("--statistic", o.statistic, "mean or sum")
      ->check(CLI::IsMember({"mean", "sum"}));
  cmd->add_option("--eta-mode", o.eta_mode, "table, formula or explicit")
      ->check(CLI::IsMember({"table", "formula", "explicit"}));
  cmd->add_option("--eta", o.eta, "explicit mixing factor");
  cmd->add_option("--rho-theta", o.rho_theta, "angle penalty");
  cmd->add_option("--rho-f", o.rho_f, "flow penalty");
  cmd->add_option("--slack-penalty", o.slack_penalty, "cost per MWh shed");
  cmd->add_option("--seeds", o.seeds, "noise seeds");
  cmd->add_option("--max-iterations", o.max_iterations,
                  "iteration cap per phase (0: none)");
  cmd->add_option("--time-budget", o.time_budget, "wall-clock budget (s)");
  cmd->add_option("--threads", o.threads, "concurrent region solves");
  cmd->add_option("--backend", o.backend, "solver backend");
  cmd->add_option("--node-limit", o.node_limit,
                  "branch-and-bound nodes per regional solve");
  cmd->add_option("--rel-gap", o.rel_gap, "regional relative MIQP gap");
  cmd->add_flag("--relaxed-only", o.relaxed_only,
                "stop after the relaxed phase");
  cmd->add_flag("--wall-time", o.wall_time,
                "add wall-clock columns to the CSVs");
  cmd->add_flag("--centralized", o.centralized,
                "solve the centralized reference and report gaps");
  cmd->add_option("-o,--out", o.out, "output directory")
      ->capture_default_str();
}

void Set(dpm_experiment* e, const char* key, const std::optional<double>& v) {
  if (v) Check(dpm_experiment_set(e, key, *v), key);
}
void Set(dpm_experiment* e, const char* key, const std::optional<int>& v) {
  if (v) Check(dpm_experiment_set(e, key, *v), key);
}
void SetString(dpm_experiment* e, const char* key, const std::string& v) {
  if (!v.empty()) Check(dpm_experiment_set_string(e, key, v.c_str()), key);
}

void LoadExperiment(const Overrides& o, Experiment& e) {
  if (!o.config.empty()) {
    Check(dpm_experiment_load(o.config.c_str(), &e.p), "loading config");
  } else if (!o.case_path.empty()) {
    Check(dpm_experiment_create(o.case_path.c_str(),
                                o.partition.empty() ? nullptr
                                                    : o.partition.c_str(),
                                &e.p),
          "creating experiment");
  } else {
    std::cerr << "dpmaint: --config or --case is required\n";
    throw CallFailed{DPM_INVALID_ARGUMENT};
  }
  SetString(e.p, "case", o.case_path);
  SetString(e.p, "partition", o.partition);
  Set(e.p, "noise_scale", o.scale);
  Set(e.p, "epsilon", o.epsilon);
  Set(e.p, "noise_multiplier", o.noise_multiplier);
  Set(e.p, "cl", o.cl);
  Set(e.p, "gamma", o.gamma);
  Set(e.p, "lookback", o.lookback);
  Set(e.p, "threshold_multiplier", o.threshold_multiplier);
  Set(e.p, "min_threshold", o.min_threshold);
  SetString(e.p, "statistic", o.statistic);
  SetString(e.p, "eta_mode", o.eta_mode);
  Set(e.p, "eta", o.eta);
  Set(e.p, "rho_theta", o.rho_theta);
  Set(e.p, "rho_f", o.rho_f);
  Set(e.p, "slack_penalty", o.slack_penalty);
  Set(e.p, "max_iterations", o.max_iterations);
  Set(e.p, "time_budget_s", o.time_budget);
  Set(e.p, "threads", o.threads);
  SetString(e.p, "backend", o.backend);
  Set(e.p, "miqp.node_limit", o.node_limit);
  Set(e.p, "miqp.rel_gap", o.rel_gap);
  if (o.relaxed_only) Check(dpm_experiment_set(e.p, "two_phase", 0), "two_phase");
  if (!o.seeds.empty()) {
    Check(dpm_experiment_set_seeds(e.p, o.seeds.data(), o.seeds.size()),
          "seeds");
  }
}

std::string OutPath(const std::string& dir, const char* name) {
  return (std::filesystem::path(dir) / name).string();
}

void MakeDir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    std::cerr << "dpmaint: cannot create " << dir << ": " << ec.message()
              << "\n";
    throw CallFailed{DPM_IO_ERROR};
  }
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    std::cerr << "dpmaint: cannot write " << path << "\n";
    throw CallFailed{DPM_IO_ERROR};
  }
}

void EmitResults(const dpm_results* r, const Overrides& o) {
  MakeDir(o.out);
  Check(dpm_results_write_trace(r, OutPath(o.out, "trace.csv").c_str(),
                                o.wall_time),
        "writing trace.csv");
  Check(dpm_results_write_summary(r, OutPath(o.out, "summary.csv").c_str(),
                                  o.wall_time),
        "writing summary.csv");
  Check(dpm_results_write_plot(r, OutPath(o.out, "plot.dat").c_str()),
        "writing plot.dat");
  Text report;
  Check(dpm_results_report(r, &report.p), "building report");
  WriteText(OutPath(o.out, "report.txt"), report.p);
  std::cout << report.p;
}

int RunOrSweep(const Overrides& o, bool sweep) {
  Experiment e;
  LoadExperiment(o, e);
  Results r;
  Check((sweep ? dpm_sweep : dpm_run)(e.p, o.centralized, &r.p),
        sweep ? "sweep" : "run");
  EmitResults(r.p, o);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private decentralized maintenance and unit "
               "commitment"};
  app.require_subcommand(1);
  app.set_version_flag("--version", dpm_version());

  Overrides run_opts;
  CLI::App* run = app.add_subcommand("run", "decentralized run, one per seed");
  AddOverrideFlags(run, run_opts);

  Overrides sweep_opts;
  std::vector<double> scales, cls;
  std::vector<int> gammas;
  CLI::App* sweep =
      app.add_subcommand("sweep", "grid over noise scale, CL, gamma and seed");
  AddOverrideFlags(sweep, sweep_opts);
  sweep->add_option("--scales", scales, "noise scales");
  sweep->add_option("--cls", cls, "convergence levels");
  sweep->add_option("--gammas", gammas, "tuning indices");

  std::string cent_config, cent_case, cent_out = ".";
  bool cent_relaxed = false;
  std::optional<double> cent_nodes, cent_gap, cent_time;
  CLI::App* cent =
      app.add_subcommand("centralized", "whole-network reference solve");
  cent->add_option("-c,--config", cent_config, "experiment config (JSON)");
  cent->add_option("--case", cent_case, "case file");
  cent->add_flag("--relaxed", cent_relaxed, "continuous relaxation only");
  cent->add_option("--node-limit", cent_nodes, "branch-and-bound nodes");
  cent->add_option("--rel-gap", cent_gap, "relative gap");
  cent->add_option("--time-limit", cent_time, "seconds");
  cent->add_option("-o,--out", cent_out, "output directory")
      ->capture_default_str();

  dpm_verify_options vopt;
  dpm_verify_options_default(&vopt);
  std::string verify_out;
  CLI::App* verify =
      app.add_subcommand("verify-dp", "empirical checks of the flow mechanism");
  verify->add_option("--scale", vopt.scale, "omega/epsilon")
      ->capture_default_str();
  verify->add_option("--epsilon", vopt.epsilon)->capture_default_str();
  verify->add_option("--gamma", vopt.gamma, "line conversion factor")
      ->capture_default_str();
  verify->add_option("--samples", vopt.samples)->capture_default_str();
  verify->add_option("--seed", vopt.seed)->capture_default_str();
  verify->add_option("--significance", vopt.significance)
      ->capture_default_str();
  verify->add_option("-o,--out", verify_out,
                     "directory for report.txt (optional)");

  std::string summary_path, report_out;
  CLI::App* report =
      app.add_subcommand("report", "statistics from an existing summary.csv");
  report->add_option("summary", summary_path, "summary.csv")->required();
  report->add_option("-o,--out", report_out,
                     "directory for report.txt (optional)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return RunOrSweep(run_opts, false);
    if (*sweep) {
      Experiment probe;
      LoadExperiment(sweep_opts, probe);
      // Axes not given on the command line keep their configured values.
      Check(dpm_experiment_set_sweep(
                probe.p, scales.empty() ? nullptr : scales.data(),
                scales.size(), cls.empty() ? nullptr : cls.data(), cls.size(),
                gammas.empty() ? nullptr : gammas.data(), gammas.size()),
            "sweep axes");
      Results r;
      Check(dpm_sweep(probe.p, sweep_opts.centralized, &r.p), "sweep");
      EmitResults(r.p, sweep_opts);
      return 0;
    }
    if (*cent) {
      Overrides o;
      o.config = cent_config;
      o.case_path = cent_case;
      Experiment e;
      LoadExperiment(o, e);
      Set(e.p, "centralized.node_limit", cent_nodes);
      Set(e.p, "centralized.rel_gap", cent_gap);
      Set(e.p, "centralized.time_limit_s", cent_time);
      Results r;
      Check(dpm_centralized(e.p, cent_relaxed, &r.p), "centralized");
      Text text;
      Check(dpm_results_report(r.p, &text.p), "building report");
      MakeDir(cent_out);
      WriteText(OutPath(cent_out, "report.txt"), text.p);
      std::cout << text.p;
      return 0;
    }
    if (*verify) {
      int pass = 0;
      Text text;
      Check(dpm_verify_dp(&vopt, &pass, &text.p), "verify-dp");
      if (!verify_out.empty()) {
        MakeDir(verify_out);
        WriteText(OutPath(verify_out, "report.txt"), text.p);
      }
      std::cout << text.p << "overall " << (pass ? "pass" : "fail") << "\n";
      return 0;
    }
    if (*report) {
      Text text;
      Check(dpm_report_from_summary(summary_path.c_str(), &text.p), "report");
      if (!report_out.empty()) {
        MakeDir(report_out);
        WriteText(OutPath(report_out, "report.txt"), text.p);
      }
      std::cout << text.p;
      return 0;
    }
  } catch (const CallFailed& f) {
    return static_cast<int>(f.status);
  }
  return 0;
}
