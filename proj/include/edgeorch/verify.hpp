#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "edgeorch/placement.hpp"
#include "edgeorch/scenario.hpp"
#include "edgeorch/workload.hpp"

namespace edgeorch {

struct CaseResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct SuiteResult {
  std::string suite;
  std::vector<CaseResult> cases;
  double seconds = 0.0;

  bool pass() const;
};

const std::vector<std::string>& suite_names();
// Throws Error for an unknown suite.
SuiteResult run_suite(const std::string& name, std::uint64_t seed = 1);

struct PlacementInstance {
  Topology topo;
  DataCatalog data;
  Eigen::VectorXd cache_size;
  DemandMatrix demand;
};

// Up to 3 clouds, up to 8 objects with integer sizes 1..3, small caches.
PlacementInstance random_placement_instance(std::mt19937_64& rng);

struct TinyInstance {
  Scenario scenario;
  Workload workload;
  int N = 2;
  int Z = 3;
};

// 2 clouds, 2 VM types, at most 4 requests per look-ahead frame.
TinyInstance tiny_lookahead_instance(std::uint64_t seed);

// Desk scenario with the capacity cut so prices and overshoot come into play.
Scenario stressed_scenario();
WorkloadConfig stressed_workload(std::uint64_t seed);

}  // namespace edgeorch
