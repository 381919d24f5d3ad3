#include "edgeorch/placement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace edgeorch {
namespace {

std::vector<int> integer_sizes(const DataCatalog& data) {
  std::vector<int> out(static_cast<std::size_t>(data.public_count()));
  for (int o = 0; o < data.public_count(); ++o) {
    const double s = data.object_size(o);
    if (s != std::floor(s) || s < 1.0)
      throw Error("placement needs integral object sizes (object " + std::to_string(o) + ")");
    out[static_cast<std::size_t>(o)] = static_cast<int>(s);
  }
  return out;
}

int integer_capacity(double c) { return static_cast<int>(std::floor(c + 1e-9)); }

void check_shapes(const DemandMatrix& demand, const Eigen::VectorXd& cache_size,
                  const Topology& topo, const DataCatalog& data) {
  if (demand.demand.rows() != topo.num_clouds() || cache_size.size() != topo.num_clouds())
    throw Error("demand and cache sizes must cover every cloud");
  if (demand.demand.cols() != data.public_count())
    throw Error("demand must have one column per public object");
  if ((cache_size.array() < 0.0).any()) throw Error("cache sizes must be non-negative");
}

PlacementSolution finish(PlacementProfile profile, const DemandMatrix& demand, const Topology& topo,
                         std::vector<GreedyRound> rounds = {}) {
  PlacementSolution out;
  out.objective = placement_cost(profile, demand, topo);
  out.profile = std::move(profile);
  out.rounds = std::move(rounds);
  return out;
}

// Every subset of public objects that fits in `capacity`, in lexicographic
// order of inclusion decisions (object 0 first).
void feasible_subsets(const std::vector<int>& sizes, int capacity, std::size_t next,
                      std::vector<ObjectId>& current, std::vector<std::vector<ObjectId>>& out,
                      double limit) {
  if (static_cast<double>(out.size()) > limit) return;
  if (next == sizes.size()) {
    out.push_back(current);
    return;
  }
  feasible_subsets(sizes, capacity, next + 1, current, out, limit);
  if (sizes[next] <= capacity) {
    current.push_back(static_cast<ObjectId>(next));
    feasible_subsets(sizes, capacity - sizes[next], next + 1, current, out, limit);
    current.pop_back();
  }
}

}  // namespace

DemandMatrix aggregate_demand(std::int64_t slot, const std::vector<AcceptedRequest>& accepted,
                              int clouds, const DataCatalog& data) {
  DemandMatrix d = DemandMatrix::zero(slot, clouds, data.public_count());
  for (const auto& a : accepted) {
    for (std::size_t k = 0; k < a.config.host.size(); ++k) {
      const CloudId i = a.config.host[k];
      if (i < 0) continue;
      const double n = a.config.vm_counts(i, static_cast<Eigen::Index>(k));
      for (ObjectId o : a.request.demand[k].objects)
        if (data.is_public(o)) d.demand(i, o) += n * data.object_size(o);
    }
  }
  return d;
}

double placement_cost(const PlacementProfile& profile, const DemandMatrix& demand,
                      const Topology& topo) {
  const ReplicaMap replicas(profile, topo);
  return (demand.demand.array() * replicas.matrix().array()).sum();
}

double placement_savings(const PlacementProfile& profile, const DemandMatrix& demand,
                         const Topology& topo) {
  return placement_cost(PlacementProfile::empty_like(profile), demand, topo) -
         placement_cost(profile, demand, topo);
}

KnapsackResult knapsack(const std::vector<double>& values, const std::vector<int>& weights,
                        int capacity) {
  const std::size_t n = values.size();
  if (weights.size() != n) throw Error("knapsack needs one weight per value");
  capacity = std::max(capacity, 0);
  const auto width = static_cast<std::size_t>(capacity) + 1;
  // best[k][c]: best value using the first k items within capacity c
  std::vector<double> best((n + 1) * width, 0.0);
  auto at = [&](std::size_t k, std::size_t c) -> double& { return best[k * width + c]; };
  for (std::size_t k = 1; k <= n; ++k) {
    const int w = weights[k - 1];
    if (w < 1) throw Error("knapsack weights must be positive integers");
    for (std::size_t c = 0; c < width; ++c) {
      at(k, c) = at(k - 1, c);
      if (static_cast<std::size_t>(w) <= c) {
        const double take = at(k - 1, c - static_cast<std::size_t>(w)) + values[k - 1];
        if (take > at(k, c)) at(k, c) = take;
      }
    }
  }
  KnapsackResult out;
  out.value = at(n, width - 1);
  std::size_t c = width - 1;
  for (std::size_t k = n; k >= 1; --k) {
    if (at(k, c) != at(k - 1, c)) {
      out.items.push_back(static_cast<int>(k - 1));
      c -= static_cast<std::size_t>(weights[k - 1]);
    }
  }
  std::reverse(out.items.begin(), out.items.end());
  return out;
}

PlacementSolution greedy_place(const DemandMatrix& demand, const Eigen::VectorXd& cache_size,
                               const Topology& topo, const DataCatalog& data) {
  check_shapes(demand, cache_size, topo, data);
  const std::vector<int> sizes = integer_sizes(data);
  const int n = topo.num_clouds();
  const int m = data.public_count();

  PlacementProfile profile(n, m, cache_size);
  // current w(i, j*) given the clouds fixed so far
  Eigen::MatrixXd current = topo.origin_latency.replicate(1, m);
  std::vector<bool> fixed(static_cast<std::size_t>(n), false);
  std::vector<GreedyRound> rounds;

  for (int round = 0; round < n; ++round) {
    GreedyRound best;
    for (int i = 0; i < n; ++i) {
      if (fixed[static_cast<std::size_t>(i)]) continue;
      std::vector<double> values;
      std::vector<int> weights;
      std::vector<ObjectId> candidates;
      for (int o = 0; o < m; ++o) {
        double v = 0.0;
        for (int src = 0; src < n; ++src)
          v += demand.demand(src, o) * std::max(0.0, current(src, o) - topo.latency(src, i));
        if (v <= 0.0) continue;
        values.push_back(v);
        weights.push_back(sizes[static_cast<std::size_t>(o)]);
        candidates.push_back(o);
      }
      const KnapsackResult ks = knapsack(values, weights, integer_capacity(cache_size(i)));
      if (best.cloud < 0 || ks.value > best.marginal) {
        best.cloud = i;
        best.marginal = ks.value;
        best.objects.clear();
        for (int idx : ks.items) best.objects.push_back(candidates[static_cast<std::size_t>(idx)]);
      }
    }
    fixed[static_cast<std::size_t>(best.cloud)] = true;
    for (ObjectId o : best.objects) {
      profile.cached(best.cloud, o) = true;
      for (int src = 0; src < n; ++src)
        current(src, o) = std::min(current(src, o), topo.latency(src, best.cloud));
    }
    rounds.push_back(std::move(best));
  }
  return finish(std::move(profile), demand, topo, std::move(rounds));
}

PlacementSolution brute_force_place(const DemandMatrix& demand, const Eigen::VectorXd& cache_size,
                                    const Topology& topo, const DataCatalog& data,
                                    BruteForceLimits limits) {
  check_shapes(demand, cache_size, topo, data);
  const std::vector<int> sizes = integer_sizes(data);
  const int n = topo.num_clouds();
  const int m = data.public_count();

  std::vector<std::vector<std::vector<ObjectId>>> per_cloud(static_cast<std::size_t>(n));
  double product = 1.0;
  for (int i = 0; i < n; ++i) {
    std::vector<ObjectId> scratch;
    auto& subsets = per_cloud[static_cast<std::size_t>(i)];
    feasible_subsets(sizes, integer_capacity(cache_size(i)), 0, scratch, subsets,
                     limits.max_profiles);
    product *= static_cast<double>(subsets.size());
    if (product > limits.max_profiles) throw Error("brute-force placement exceeds enumeration cap");
  }

  // holder(o) lists the clouds caching o under the current digits
  std::vector<std::size_t> digits(static_cast<std::size_t>(n), 0);
  BoolArray cached = BoolArray::Constant(n, m, false);
  auto cost_of = [&]() {
    double total = 0.0;
    for (int o = 0; o < m; ++o)
      for (int i = 0; i < n; ++i) {
        const double d = demand.demand(i, o);
        if (d == 0.0) continue;
        double w = topo.origin_latency(i);
        for (int j = 0; j < n; ++j)
          if (cached(j, o)) w = std::min(w, topo.latency(i, j));
        total += d * w;
      }
    return total;
  };
  std::vector<std::size_t> best_digits = digits;
  double best_cost = std::numeric_limits<double>::infinity();
  while (true) {
    cached.setConstant(false);
    for (int i = 0; i < n; ++i)
      for (ObjectId o : per_cloud[static_cast<std::size_t>(i)][digits[static_cast<std::size_t>(i)]])
        cached(i, o) = true;
    const double cost = cost_of();
    if (cost < best_cost) {
      best_cost = cost;
      best_digits = digits;
    }
    int pos = n - 1;
    while (pos >= 0 &&
           ++digits[static_cast<std::size_t>(pos)] == per_cloud[static_cast<std::size_t>(pos)].size()) {
      digits[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  PlacementProfile best(n, m, cache_size);
  for (int i = 0; i < n; ++i)
    for (ObjectId o : per_cloud[static_cast<std::size_t>(i)][best_digits[static_cast<std::size_t>(i)]])
      best.cached(i, o) = true;
  return finish(std::move(best), demand, topo);
}

std::vector<PlacementProfile> enumerate_profiles(const Eigen::VectorXd& cache_size,
                                                 const DataCatalog& data, BruteForceLimits limits) {
  const std::vector<int> sizes = integer_sizes(data);
  const int n = static_cast<int>(cache_size.size());
  std::vector<std::vector<std::vector<ObjectId>>> per_cloud(static_cast<std::size_t>(n));
  double product = 1.0;
  for (int i = 0; i < n; ++i) {
    std::vector<ObjectId> scratch;
    feasible_subsets(sizes, integer_capacity(cache_size(i)), 0, scratch,
                     per_cloud[static_cast<std::size_t>(i)], limits.max_profiles);
    product *= static_cast<double>(per_cloud[static_cast<std::size_t>(i)].size());
    if (product > limits.max_profiles) throw Error("profile enumeration exceeds cap");
  }
  std::vector<PlacementProfile> out;
  std::vector<std::size_t> digits(static_cast<std::size_t>(n), 0);
  while (true) {
    PlacementProfile p(n, data.public_count(), cache_size);
    for (int i = 0; i < n; ++i)
      for (ObjectId o : per_cloud[static_cast<std::size_t>(i)][digits[static_cast<std::size_t>(i)]])
        p.cached(i, o) = true;
    out.push_back(std::move(p));
    int pos = n - 1;
    while (pos >= 0 &&
           ++digits[static_cast<std::size_t>(pos)] == per_cloud[static_cast<std::size_t>(pos)].size()) {
      digits[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return out;
}

PlacementSolution independent_place(const DemandMatrix& demand, const Eigen::VectorXd& cache_size,
                                    const Topology& topo, const DataCatalog& data) {
  check_shapes(demand, cache_size, topo, data);
  const int n = topo.num_clouds();
  const int m = data.public_count();
  PlacementProfile profile(n, m, cache_size);
  std::vector<ObjectId> order(static_cast<std::size_t>(m));
  for (int i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), 0);
    auto density = [&](ObjectId o) { return demand.demand(i, o) / data.object_size(o); };
    std::stable_sort(order.begin(), order.end(),
                     [&](ObjectId a, ObjectId b) { return density(a) > density(b); });
    double room = cache_size(i);
    for (ObjectId o : order) {
      if (demand.demand(i, o) <= 0.0) break;
      if (data.object_size(o) <= room + 1e-9) {
        profile.cached(i, o) = true;
        room -= data.object_size(o);
      }
    }
  }
  return finish(std::move(profile), demand, topo);
}

}  // namespace edgeorch
