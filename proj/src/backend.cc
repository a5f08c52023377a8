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

#include <map>
#include <mutex>

#include "dpmaint/error.h"
#include "dpmaint/miqp.h"

namespace dpmaint {
namespace {

class BundledBackend : public SolverBackend {
 public:
  std::string name() const override { return "bundled"; }
  MiqpSolution Solve(const MiqpProblem& problem, const MiqpLimits& limits,
                     const WarmStart* warm_start) override {
    if (problem.num_integer() == 0) return SolveQp(problem, limits.qp);
    return SolveMiqp(problem, limits, warm_start);
  }
};

struct Registry {
  std::mutex mu;
  std::map<std::string, BackendFactory> factories;
};

Registry& GetRegistry() {
  static Registry* registry = [] {
    auto* r = new Registry;
    r->factories["bundled"] = [] { return MakeBundledBackend(); };
    return r;
  }();
  return *registry;
}

}  // namespace

std::shared_ptr<SolverBackend> MakeBundledBackend() {
  return std::make_shared<BundledBackend>();
}

void RegisterBackend(const std::string& name, BackendFactory factory) {
  if (name.empty() || !factory) {
    throw InvalidArgument("backend registration needs a name and a factory");
  }
  Registry& reg = GetRegistry();
  std::lock_guard<std::mutex> lock(reg.mu);
  reg.factories[name] = std::move(factory);
}

void UnregisterBackend(const std::string& name) {
  if (name == "bundled") return;
  Registry& reg = GetRegistry();
  std::lock_guard<std::mutex> lock(reg.mu);
  reg.factories.erase(name);
}

std::shared_ptr<SolverBackend> GetBackend(const std::string& name) {
  Registry& reg = GetRegistry();
  BackendFactory factory;
  {
    std::lock_guard<std::mutex> lock(reg.mu);
    auto it = reg.factories.find(name);
    if (it == reg.factories.end()) {
      throw ConfigurationError("solver backend '" + name +
                               "' is not available");
    }
    factory = it->second;
  }
  auto backend = factory();
  if (!backend) {
    throw ConfigurationError("solver backend '" + name +
                             "' failed to initialize");
  }
  return backend;
}

std::vector<std::string> BackendNames() {
  Registry& reg = GetRegistry();
  std::lock_guard<std::mutex> lock(reg.mu);
  std::vector<std::string> out;
  for (const auto& [name, f] : reg.factories) out.push_back(name);
  return out;
}

}  // namespace dpmaint
