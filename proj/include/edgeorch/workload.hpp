#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "edgeorch/model.hpp"
#include "edgeorch/placement.hpp"

namespace edgeorch {

struct WorkloadConfig {
  std::uint64_t seed = 1;
  double lambda_lo = 0.0;  // arrivals per fine slot
  double lambda_hi = 10.0;
  int regime_length = 25;  // fine slots between redraws of the rate
  std::vector<double> vm_mix;  // per VM type; empty means equal
  int vms_lo = 1, vms_hi = 2;  // VMs per request
  int lifetime_lo = 1, lifetime_hi = 5;
  double zipf_exponent = 0.6;
  int objects_lo = 1, objects_hi = 3;  // public objects per VM group
  double private_ratio = 1.0;          // private volume / public volume per VM group
  double error_mean = 0.0;             // mean popularity estimation error rate
  // When frame_length > 0, at most frame_max arrivals are kept per block of
  // frame_length fine slots (later ones are dropped).
  int frame_length = 0;
  int frame_max = 0;

  void validate(int num_types, int public_objects) const;
};

// Arrival rate in [0, 10] redrawn every 25 fine slots.
WorkloadConfig desk_workload(std::uint64_t seed);
// Arrival rate in [0, 50] redrawn every 25 fine slots.
WorkloadConfig full_workload(std::uint64_t seed);

WorkloadConfig workload_from_json(const nlohmann::json& j);
nlohmann::json workload_to_json(const WorkloadConfig& w);
WorkloadConfig load_workload(const std::filesystem::path& path);

// Draws ranks 0..n-1 with probability proportional to 1 / (rank + 1)^s.
class ZipfSampler {
 public:
  ZipfSampler(int n, double exponent);
  int operator()(std::mt19937_64& rng) { return dist_(rng); }
  double probability(int rank) const { return dist_.probabilities()[static_cast<std::size_t>(rank)]; }

 private:
  std::discrete_distribution<int> dist_;
};

struct Workload {
  std::vector<Request> requests;  // ordered by arrival, then id
  DataCatalog data;               // the scenario's public objects plus one private object per VM group
  std::int64_t fine_slots = 0;
  std::uint64_t hash = 0;
};

// Requests for fine slots [0, fine_slots).
Workload generate_workload(const WorkloadConfig& cfg, const DataCatalog& public_data,
                           int num_types, int num_clouds, std::int64_t fine_slots);

// FNV-1a over every field of every request and the catalog sizes.
std::uint64_t stream_hash(const std::vector<Request>& requests, const DataCatalog& data);

struct Perturbation {
  DemandMatrix demand;
  double epsilon = 0.0;
  std::vector<ObjectId> top;     // objects carrying the top half of the traffic
  std::vector<ObjectId> zeroed;  // the subset whose demand was dropped
};

// epsilon ~ Poisson(10 * error_mean) / 10 clipped to [0, 1]; each object in
// the smallest set carrying half the total demand is zeroed with probability epsilon.
Perturbation perturb_demand(const DemandMatrix& demand, double error_mean, std::mt19937_64& rng);
// Same with a fixed epsilon.
Perturbation perturb_demand_at(const DemandMatrix& demand, double epsilon, std::mt19937_64& rng);

}  // namespace edgeorch
