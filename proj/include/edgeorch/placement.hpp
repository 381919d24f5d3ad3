#pragma once

#include <cstdint>
#include <vector>

#include "edgeorch/model.hpp"

namespace edgeorch {

// d(i, o): size-weighted demand for public object o by VMs hosted at cloud i
// during one coarse slot.
struct DemandMatrix {
  std::int64_t slot = 0;
  Eigen::MatrixXd demand;  // clouds x public objects

  static DemandMatrix zero(std::int64_t slot, int clouds, int public_objects) {
    return {slot, Eigen::MatrixXd::Zero(clouds, public_objects)};
  }
};

struct AcceptedRequest {
  Request request;
  AllocationConfig config;
};

// Demand is counted whether or not the object was cached when the request
// was placed, so the next placement sees the true popularity.
DemandMatrix aggregate_demand(std::int64_t slot, const std::vector<AcceptedRequest>& accepted,
                              int clouds, const DataCatalog& data);

// sum_i sum_o d(i, o) * w(i, j*) under `profile`, origin fallback included.
double placement_cost(const PlacementProfile& profile, const DemandMatrix& demand,
                      const Topology& topo);

struct GreedyRound {
  CloudId cloud = -1;
  double marginal = 0.0;
  std::vector<ObjectId> objects;
};

struct PlacementSolution {
  PlacementProfile profile;
  double objective = 0.0;  // placement_cost of profile
  std::vector<GreedyRound> rounds;
};

// Fixes one cloud per round, each time the cloud whose best content set
// saves the most given the clouds already fixed. The best content set is an
// exact 0/1 knapsack over integer sizes. Objects with zero saving are left out.
PlacementSolution greedy_place(const DemandMatrix& demand, const Eigen::VectorXd& cache_size,
                               const Topology& topo, const DataCatalog& data);

struct BruteForceLimits {
  double max_profiles = 2e6;
};

// Minimum-cost profile over every combination of feasible per-cloud sets.
PlacementSolution brute_force_place(const DemandMatrix& demand, const Eigen::VectorXd& cache_size,
                                    const Topology& topo, const DataCatalog& data,
                                    BruteForceLimits limits = {});

// Every cloud caches its own highest demand-per-size objects until full,
// ignoring what the other clouds hold.
PlacementSolution independent_place(const DemandMatrix& demand, const Eigen::VectorXd& cache_size,
                                    const Topology& topo, const DataCatalog& data);

// placement_cost(empty) - placement_cost(profile).
double placement_savings(const PlacementProfile& profile, const DemandMatrix& demand,
                         const Topology& topo);

// Every feasible profile (one feasible set per cloud), clouds varying with
// the last cloud fastest.
std::vector<PlacementProfile> enumerate_profiles(const Eigen::VectorXd& cache_size,
                                                 const DataCatalog& data,
                                                 BruteForceLimits limits = {});

struct KnapsackResult {
  double value = 0.0;
  std::vector<int> items;  // ascending
};

// Exact 0/1 knapsack. Weights must be positive integers.
KnapsackResult knapsack(const std::vector<double>& values, const std::vector<int>& weights,
                        int capacity);

}  // namespace edgeorch
