#pragma once

#include <vector>

#include "edgeorch/model.hpp"
#include "edgeorch/scenario.hpp"

namespace fixtures {

using namespace edgeorch;

// Clouds on a line: w(i, j) = step * |i - j|, origin at `origin` from every cloud.
inline Topology line(int n, double step = 20.0, double origin = 100.0) {
  Topology t;
  t.latency.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t.latency(i, j) = step * std::abs(i - j);
  t.origin_latency = Eigen::VectorXd::Constant(n, origin);
  return t;
}

// Two VM types, three resources, prices 10 and 20.
inline VmCatalog two_types() {
  VmCatalog v;
  v.recipe.resize(2, 3);
  v.recipe << 10, 20, 30,
              30, 20, 10;
  v.price.resize(2);
  v.price << 10, 20;
  v.type_names = {"type1", "type2"};
  v.resource_names = {"cpu", "mem", "disk"};
  return v;
}

inline Request request(RequestId id, FineSlot arrival, int duration, int K,
                       std::vector<std::pair<int, std::vector<ObjectId>>> groups,
                       CloudId ingress = 0) {
  Request r;
  r.id = id;
  r.arrival = arrival;
  r.duration = duration;
  r.ingress = ingress;
  r.demand.assign(static_cast<std::size_t>(K), VmDemand{});
  for (std::size_t k = 0; k < groups.size() && k < r.demand.size(); ++k)
    r.demand[k] = {groups[k].first, groups[k].second};
  return r;
}

// Config hosting every requested type at the given clouds.
inline AllocationConfig hosted(const Request& req, int clouds, std::vector<CloudId> host) {
  AllocationConfig c;
  c.request = req.id;
  c.host.assign(req.demand.size(), -1);
  c.vm_counts = Eigen::MatrixXd::Zero(clouds, static_cast<Eigen::Index>(req.demand.size()));
  for (std::size_t k = 0; k < req.demand.size(); ++k) {
    if (req.demand[k].count == 0) continue;
    c.host[k] = host[k];
    c.vm_counts(host[k], static_cast<Eigen::Index>(k)) = req.demand[k].count;
  }
  return c;
}

inline Scenario small_scenario(int clouds, double capacity, double budget, double V = 1e5) {
  Scenario s;
  s.name = "small";
  s.topology = line(clouds);
  s.vms = two_types();
  s.capacity = Eigen::MatrixXd::Constant(clouds, 3, capacity);
  s.data = DataCatalog(std::vector<double>(3, 1.0));
  s.cache_size = Eigen::VectorXd::Constant(clouds, 1.0);
  s.control.V = V;
  s.control.budget = budget;
  s.control.slots_per_coarse = 4;
  return s;
}

}  // namespace fixtures
