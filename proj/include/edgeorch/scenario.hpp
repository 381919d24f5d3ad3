#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "edgeorch/model.hpp"

namespace edgeorch {

// Knobs of the control loop that belong to a scenario rather than a workload.
struct ControlParams {
  double V = 1.0;                // penalty weight on revenue
  double budget = 0.0;           // per-coarse-slot transport budget
  std::optional<double> c_max;   // bound on C(T); defaults to 3 * budget
  int slots_per_coarse = 50;     // fine slots per coarse slot
  std::optional<double> dual_scale;  // adjusted revenue -> shadow-price units
  bool strict_scoring = false;   // score with the printed adjusted revenue (no queue weight)

  double effective_c_max() const { return c_max.value_or(3.0 * budget); }
};

struct Scenario {
  std::string name;
  Topology topology;
  VmCatalog vms;
  Eigen::MatrixXd capacity;  // clouds x R
  DataCatalog data;          // public objects only
  Eigen::VectorXd cache_size;
  ControlParams control;

  int num_clouds() const { return topology.num_clouds(); }
  void validate() const;
  PlacementProfile empty_placement() const {
    return PlacementProfile(num_clouds(), data.public_count(), cache_size);
  }
  // Sets every cache so that the caches together hold `ratio` of the public volume.
  void set_cache_ratio(double ratio);
};

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);
Scenario load_scenario(const std::filesystem::path& path);

struct ScenarioShape {
  int clouds = 5;
  int public_objects = 100;
  double capacity = 500.0;
  double cache_ratio = 0.4;
  double peer_lo = 20.0, peer_hi = 50.0;
  double origin_lo = 100.0, origin_hi = 200.0;
  ControlParams control;
};

// Desk scale: 5 clouds, capacity 500, 50 fine slots per coarse slot.
ScenarioShape desk_shape();
// The full-size setup: capacity 5000, 500 fine slots per coarse slot.
ScenarioShape full_shape();

// Draws latencies once from the configured ranges; the result is meant to be
// frozen to disk. Recipes and prices are the two-type, three-resource setup.
Scenario make_scenario(const ScenarioShape& shape, std::uint64_t seed);

}  // namespace edgeorch
