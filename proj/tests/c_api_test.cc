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

// Exercises the shared library through its C interface only.

#include <unistd.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dpmaint/dpmaint.h"
#include "gtest/gtest.h"

namespace {

namespace fs = std::filesystem;

constexpr const char* kCase = R"({
  "name": "one_bus", "base_mva": 100.0, "reference_bus": "A",
  "horizon": {"hours": 4, "window_hours": 2},
  "buses": ["A"], "lines": [],
  "generators": [
    {"id": "G1", "bus": "A", "dispatch_cost": 10.0, "commitment_cost": 50.0,
     "p_min": 20.0, "p_max": 100.0, "ramp": 1000.0, "min_up": 1,
     "min_down": 1, "initial_on": false, "initial_output": 0.0}],
  "demand": {"A": [40.0, 50.0, 70.0, 30.0]},
  "maintenance": []
})";

std::string Slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CApiTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dpmaint_c_api_test_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
    case_ = (dir_ / "one_bus.json").string();
    std::ofstream(case_) << kCase;
  }
  void TearDown() override { fs::remove_all(dir_); }

  dpm_experiment* Experiment() {
    dpm_experiment* e = nullptr;
    EXPECT_EQ(dpm_experiment_create(case_.c_str(), nullptr, &e), DPM_OK)
        << dpm_last_error();
    EXPECT_EQ(dpm_experiment_set(e, "gamma", 2), DPM_OK);
    EXPECT_EQ(dpm_experiment_set(e, "lookback", 2), DPM_OK);
    return e;
  }

  fs::path dir_;
  std::string case_;
};

TEST(CApiBasicsTest, VersionAndStatusNames) {
  EXPECT_GT(std::strlen(dpm_version()), 0u);
  EXPECT_STREQ(dpm_status_name(DPM_OK), "ok");
  EXPECT_STRNE(dpm_status_name(DPM_PROTOCOL_ERROR),
               dpm_status_name(DPM_SOLVER_ERROR));
}

TEST(CApiBasicsTest, NullArgumentsAreRejected) {
  dpm_experiment* e = nullptr;
  EXPECT_EQ(dpm_experiment_create(nullptr, nullptr, &e), DPM_INVALID_ARGUMENT);
  EXPECT_GT(std::strlen(dpm_last_error()), 0u);
  EXPECT_EQ(dpm_experiment_set(nullptr, "cl", 1.0), DPM_INVALID_ARGUMENT);
  EXPECT_EQ(dpm_run(nullptr, 0, nullptr), DPM_INVALID_ARGUMENT);
  EXPECT_EQ(dpm_results_count(nullptr), 0u);
  dpm_experiment_free(nullptr);
  dpm_results_free(nullptr);
  dpm_string_free(nullptr);
}

TEST_F(CApiTest, ConfigurationErrorsMapToStatusCodes) {
  dpm_experiment* e = nullptr;
  EXPECT_EQ(dpm_experiment_from_json("{\"case\": 1", nullptr, &e),
            DPM_PARSE_ERROR);
  EXPECT_EQ(dpm_experiment_from_json("{\"unknown\": 1}", nullptr, &e),
            DPM_PARSE_ERROR);
  EXPECT_EQ(dpm_experiment_load((dir_ / "none.json").c_str(), &e),
            DPM_IO_ERROR);

  e = Experiment();
  EXPECT_EQ(dpm_experiment_set(e, "no_such_key", 1.0), DPM_INVALID_ARGUMENT);
  EXPECT_NE(std::string(dpm_last_error()).find("no_such_key"),
            std::string::npos);
  EXPECT_EQ(dpm_experiment_set(e, "gamma", 2.5), DPM_INVALID_ARGUMENT);
  EXPECT_EQ(dpm_experiment_set_string(e, "eta_mode", "magic"),
            DPM_INVALID_ARGUMENT);
  EXPECT_EQ(dpm_experiment_validate(e), DPM_OK);
  EXPECT_EQ(dpm_experiment_set(e, "rho_theta", -1.0), DPM_OK);
  EXPECT_EQ(dpm_experiment_validate(e), DPM_CONFIGURATION_ERROR);
  dpm_experiment_free(e);
}

TEST_F(CApiTest, JsonRoundTrip) {
  dpm_experiment* e = Experiment();
  ASSERT_EQ(dpm_experiment_set(e, "noise_scale", 0.075), DPM_OK);
  char* text = nullptr;
  ASSERT_EQ(dpm_experiment_to_json(e, &text), DPM_OK);
  dpm_experiment* f = nullptr;
  ASSERT_EQ(dpm_experiment_from_json(text, nullptr, &f), DPM_OK)
      << dpm_last_error();
  char* again = nullptr;
  ASSERT_EQ(dpm_experiment_to_json(f, &again), DPM_OK);
  EXPECT_STREQ(text, again);
  EXPECT_NE(std::string(text).find("0.075"), std::string::npos);
  dpm_string_free(text);
  dpm_string_free(again);
  dpm_experiment_free(e);
  dpm_experiment_free(f);
}

TEST_F(CApiTest, RunWritesOutputs) {
  dpm_experiment* e = Experiment();
  const uint64_t seeds[] = {4, 5};
  ASSERT_EQ(dpm_experiment_set_seeds(e, seeds, 2), DPM_OK);
  dpm_results* r = nullptr;
  ASSERT_EQ(dpm_run(e, 1, &r), DPM_OK) << dpm_last_error();
  ASSERT_EQ(dpm_results_count(r), 2u);
  dpm_cell_info info;
  ASSERT_EQ(dpm_results_cell(r, 1, &info), DPM_OK);
  EXPECT_EQ(info.seed, 5u);
  EXPECT_EQ(info.ok, 1);
  EXPECT_EQ(info.converged, 1);
  EXPECT_NEAR(info.gap, 0.0, 1e-6);
  EXPECT_STREQ(dpm_results_cell_status(r, 1), "converged");
  EXPECT_STREQ(dpm_results_cell_error(r, 1), "");
  EXPECT_EQ(dpm_results_cell(r, 7, &info), DPM_INVALID_ARGUMENT);

  dpm_centralized_info central;
  ASSERT_EQ(dpm_results_centralized(r, &central), DPM_OK);
  EXPECT_EQ(central.available, 1);
  EXPECT_EQ(central.optimal, 1);
  EXPECT_NEAR(central.objective, info.objective, 1e-6 * info.objective);

  const fs::path trace = dir_ / "trace.csv", summary = dir_ / "summary.csv",
                 plot = dir_ / "plot.dat";
  ASSERT_EQ(dpm_results_write_trace(r, trace.c_str(), 0), DPM_OK);
  ASSERT_EQ(dpm_results_write_summary(r, summary.c_str(), 0), DPM_OK);
  ASSERT_EQ(dpm_results_write_plot(r, plot.c_str()), DPM_OK);
  EXPECT_EQ(Slurp(summary).rfind("scale,cl,gamma,seed,", 0), 0u);
  EXPECT_FALSE(Slurp(trace).empty());
  EXPECT_EQ(dpm_results_write_trace(r, "/nonexistent/dir/t.csv", 0),
            DPM_IO_ERROR);

  char* report = nullptr;
  ASSERT_EQ(dpm_results_report(r, &report), DPM_OK);
  EXPECT_GT(std::strlen(report), 0u);
  dpm_string_free(report);
  char* from_summary = nullptr;
  ASSERT_EQ(dpm_report_from_summary(summary.c_str(), &from_summary), DPM_OK);
  EXPECT_GT(std::strlen(from_summary), 0u);
  dpm_string_free(from_summary);

  dpm_results_free(r);
  dpm_experiment_free(e);
}

TEST_F(CApiTest, SweepKeepsFailedCells) {
  dpm_experiment* e = Experiment();
  const double scales[] = {0.015, 6.0};
  ASSERT_EQ(dpm_experiment_set_sweep(e, scales, 2, nullptr, 0, nullptr, 0),
            DPM_OK);
  dpm_results* r = nullptr;
  ASSERT_EQ(dpm_sweep(e, 0, &r), DPM_OK) << dpm_last_error();
  ASSERT_EQ(dpm_results_count(r), 2u);
  dpm_cell_info good, bad;
  ASSERT_EQ(dpm_results_cell(r, 0, &good), DPM_OK);
  ASSERT_EQ(dpm_results_cell(r, 1, &bad), DPM_OK);
  EXPECT_EQ(good.ok, 1);
  EXPECT_TRUE(std::isnan(good.gap));
  EXPECT_EQ(bad.ok, 0);
  EXPECT_GT(std::strlen(dpm_results_cell_error(r, 1)), 0u);
  dpm_centralized_info central;
  ASSERT_EQ(dpm_results_centralized(r, &central), DPM_OK);
  EXPECT_EQ(central.available, 0);
  dpm_results_free(r);
  dpm_experiment_free(e);
}

TEST_F(CApiTest, NullSweepAxisKeepsConfiguredValues) {
  dpm_experiment* e = Experiment();
  const double scales[] = {0.03, 0.15};
  const double cls[] = {0.05};
  ASSERT_EQ(dpm_experiment_set_sweep(e, scales, 2, nullptr, 0, nullptr, 0),
            DPM_OK);
  ASSERT_EQ(dpm_experiment_set_sweep(e, nullptr, 0, cls, 1, nullptr, 0),
            DPM_OK);
  dpm_results* r = nullptr;
  ASSERT_EQ(dpm_sweep(e, 0, &r), DPM_OK) << dpm_last_error();
  ASSERT_EQ(dpm_results_count(r), 2u);
  dpm_cell_info info;
  ASSERT_EQ(dpm_results_cell(r, 1, &info), DPM_OK);
  EXPECT_EQ(info.scale, 0.15);
  EXPECT_EQ(info.cl, 0.05);
  dpm_results_free(r);

  const double none[] = {0.0};
  ASSERT_EQ(dpm_experiment_set_sweep(e, none, 0, nullptr, 0, nullptr, 0),
            DPM_OK);
  ASSERT_EQ(dpm_sweep(e, 0, &r), DPM_OK);
  EXPECT_EQ(dpm_results_count(r), 1u);
  dpm_results_free(r);
  EXPECT_EQ(dpm_experiment_set_sweep(e, nullptr, 2, nullptr, 0, nullptr, 0),
            DPM_INVALID_ARGUMENT);
  dpm_experiment_free(e);
}

TEST_F(CApiTest, CentralizedOnly) {
  dpm_experiment* e = Experiment();
  dpm_results* relaxed = nullptr;
  dpm_results* binary = nullptr;
  ASSERT_EQ(dpm_centralized(e, 1, &relaxed), DPM_OK);
  ASSERT_EQ(dpm_centralized(e, 0, &binary), DPM_OK);
  EXPECT_EQ(dpm_results_count(binary), 0u);
  dpm_centralized_info a, b;
  ASSERT_EQ(dpm_results_centralized(relaxed, &a), DPM_OK);
  ASSERT_EQ(dpm_results_centralized(binary, &b), DPM_OK);
  EXPECT_LE(a.objective, b.objective + 1e-6);
  dpm_results_free(relaxed);
  dpm_results_free(binary);
  dpm_experiment_free(e);
}

TEST(CApiVerifyTest, DefaultsPass) {
  dpm_verify_options o;
  dpm_verify_options_default(&o);
  EXPECT_EQ(o.scale, 0.015);
  EXPECT_EQ(o.samples, 1000000u);
  o.samples = 200000;
  int pass = 0;
  char* report = nullptr;
  ASSERT_EQ(dpm_verify_dp(&o, &pass, &report), DPM_OK) << dpm_last_error();
  EXPECT_EQ(pass, 1) << report;
  EXPECT_NE(std::string(report).find("max_ratio"), std::string::npos);
  dpm_string_free(report);
  o.samples = 10;
  EXPECT_EQ(dpm_verify_dp(&o, &pass, &report), DPM_INVALID_ARGUMENT);
}

}  // namespace
