#include <random>

#include <doctest.h>

#include "edgeorch/placement.hpp"
#include "edgeorch/verify.hpp"
#include "fixtures.hpp"

using namespace edgeorch;
using fixtures::hosted;
using fixtures::request;

namespace {

Topology single(double origin) {
  Topology t;
  t.latency = Eigen::MatrixXd::Zero(1, 1);
  t.origin_latency = Eigen::VectorXd::Constant(1, origin);
  return t;
}

DemandMatrix demand_of(std::initializer_list<std::initializer_list<double>> rows) {
  const int n = static_cast<int>(rows.size());
  const int m = static_cast<int>(rows.begin()->size());
  DemandMatrix d = DemandMatrix::zero(0, n, m);
  int i = 0;
  for (const auto& row : rows) {
    int o = 0;
    for (double v : row) d.demand(i, o++) = v;
    ++i;
  }
  return d;
}

// Cost recomputed from scratch: every (i, o) pays d times the closest of
// local, any caching peer, or origin.
double oracle_cost(const BoolArray& cached, const DemandMatrix& d, const Topology& topo) {
  double total = 0.0;
  for (int i = 0; i < d.demand.rows(); ++i)
    for (int o = 0; o < d.demand.cols(); ++o) {
      double w = topo.origin_latency(i);
      for (int j = 0; j < cached.rows(); ++j)
        if (cached(j, o)) w = std::min(w, topo.latency(i, j));
      total += d.demand(i, o) * w;
    }
  return total;
}

}  // namespace

TEST_SUITE("placement") {

TEST_CASE("demand aggregation") {
  DataCatalog data({1.0, 2.0});
  const ObjectId priv = data.add_private(4.0);
  CHECK(aggregate_demand(0, {}, 2, data).demand.isZero());

  const auto a = request(1, 0, 1, 1, {{2, {0, priv}}});
  const auto b = request(2, 0, 1, 1, {{1, {0, 1}}});
  const auto d = aggregate_demand(3, {{a, hosted(a, 2, {0})}, {b, hosted(b, 2, {1})}}, 2, data);
  CHECK(d.slot == 3);
  CHECK(d.demand.cols() == 2);
  CHECK(d.demand(0, 0) == 2);
  CHECK(d.demand(0, 1) == 0);
  CHECK(d.demand(1, 0) == 1);
  CHECK(d.demand(1, 1) == 2);
}

TEST_CASE("placement cost") {
  const Topology topo = fixtures::line(2);
  DataCatalog data({1.0});
  PlacementProfile p(2, 1, Eigen::Vector2d(1, 1));
  CHECK(placement_cost(p, demand_of({{5}, {0}}), topo) == doctest::Approx(500));
  p.cached(1, 0) = true;
  CHECK(placement_cost(p, demand_of({{3}, {0}}), topo) == doctest::Approx(60));
  p.cached(0, 0) = true;
  CHECK(placement_cost(p, demand_of({{3}, {4}}), topo) == 0.0);
}

TEST_CASE("greedy caches the most demanded objects on one cloud") {
  const Topology topo = single(100);
  const DataCatalog data({1.0, 1.0, 1.0});
  const auto sol = greedy_place(demand_of({{10, 5, 1}}), Eigen::VectorXd::Constant(1, 2), topo, data);
  CHECK(sol.profile.objects_at(0) == std::vector<ObjectId>{0, 1});
  CHECK(sol.objective == doctest::Approx(100));
  REQUIRE(sol.rounds.size() == 1);
  CHECK(sol.rounds[0].cloud == 0);
  CHECK(sol.rounds[0].marginal == doctest::Approx(1500));

  const auto brute =
      brute_force_place(demand_of({{10, 5, 1}}), Eigen::VectorXd::Constant(1, 2), topo, data);
  CHECK(brute.profile == sol.profile);
  CHECK(brute.objective == doctest::Approx(100));
}

TEST_CASE("zero demand leaves caches empty") {
  const Topology topo = fixtures::line(2);
  const DataCatalog data({1.0, 1.0});
  const auto sol = greedy_place(demand_of({{0, 0}, {0, 0}}), Eigen::Vector2d(2, 2), topo, data);
  CHECK_FALSE(sol.profile.cached.any());
  CHECK(sol.objective == 0.0);
}

TEST_CASE("degenerate brute-force inputs") {
  const Topology topo = fixtures::line(2);
  const DataCatalog none;
  const auto empty = brute_force_place(DemandMatrix::zero(0, 2, 0), Eigen::Vector2d(3, 3), topo, none);
  CHECK(empty.profile.num_objects() == 0);
  CHECK(empty.objective == 0.0);

  const DataCatalog data({1.0, 1.0});
  const auto d = demand_of({{2, 1}, {0, 3}});
  const auto forced = brute_force_place(d, Eigen::Vector2d(0, 0), topo, data);
  CHECK_FALSE(forced.profile.cached.any());
  CHECK(forced.objective == doctest::Approx(600));
}

TEST_CASE("two clouds sharing a hot object") {
  Topology topo = fixtures::line(2, 10.0, 200.0);
  const DataCatalog data({1.0, 1.0});
  const auto d = demand_of({{50, 1}, {0, 2}});
  const Eigen::Vector2d cap(1, 1);
  const auto g = greedy_place(d, cap, topo, data);
  const auto b = brute_force_place(d, cap, topo, data);
  CHECK(g.profile.contains(0, 0));
  CHECK(placement_savings(g.profile, d, topo) >= 0.5 * placement_savings(b.profile, d, topo));
  CHECK(g.objective == doctest::Approx(b.objective));
}

TEST_CASE("placement needs integral sizes") {
  const Topology topo = single(100);
  const DataCatalog data({1.5});
  CHECK_THROWS_AS(greedy_place(demand_of({{1}}), Eigen::VectorXd::Constant(1, 2), topo, data), Error);
  CHECK_THROWS_AS(brute_force_place(demand_of({{1}}), Eigen::VectorXd::Constant(1, 2), topo, data),
                  Error);
}

TEST_CASE("knapsack matches exhaustive search") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> n_items(0, 9), weight(1, 4), cap(0, 12);
  std::uniform_real_distribution<double> value(0.0, 10.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = n_items(rng);
    std::vector<double> v(static_cast<std::size_t>(n));
    std::vector<int> w(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      v[static_cast<std::size_t>(k)] = value(rng);
      w[static_cast<std::size_t>(k)] = weight(rng);
    }
    const int c = cap(rng);
    double best = 0.0;
    for (int mask = 0; mask < (1 << n); ++mask) {
      double val = 0.0;
      int wt = 0;
      for (int k = 0; k < n; ++k)
        if (mask & (1 << k)) {
          val += v[static_cast<std::size_t>(k)];
          wt += w[static_cast<std::size_t>(k)];
        }
      if (wt <= c) best = std::max(best, val);
    }
    const auto r = knapsack(v, w, c);
    CHECK(r.value == doctest::Approx(best));
    double val = 0.0;
    int wt = 0;
    for (int k : r.items) {
      val += v[static_cast<std::size_t>(k)];
      wt += w[static_cast<std::size_t>(k)];
    }
    CHECK(wt <= c);
    CHECK(val == doctest::Approx(r.value));
    CHECK(std::is_sorted(r.items.begin(), r.items.end()));
  }
  CHECK_THROWS_AS(knapsack({1.0}, {0}, 3), Error);
}

TEST_CASE("cost function properties on random instances") {
  std::mt19937_64 rng(21);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 100; ++trial) {
    const PlacementInstance in = random_placement_instance(rng);
    const int n = in.topo.num_clouds();
    const int m = in.data.public_count();
    // nested sets S within T plus one extra element (cloud, object)
    BoolArray S = BoolArray::Constant(n, m, false), T = S;
    for (int i = 0; i < n; ++i)
      for (int o = 0; o < m; ++o) {
        T(i, o) = coin(rng);
        S(i, o) = T(i, o) && coin(rng);
      }
    std::uniform_int_distribution<int> pi(0, n - 1), po(0, m - 1);
    const int xi = pi(rng), xo = po(rng);
    if (T(xi, xo)) continue;

    auto cost = [&](BoolArray set) {
      PlacementProfile p(n, m, Eigen::VectorXd::Constant(n, 1e9));
      p.cached = std::move(set);
      const double c = placement_cost(p, in.demand, in.topo);
      CHECK(c == doctest::Approx(oracle_cost(p.cached, in.demand, in.topo)));
      return c;
    };
    BoolArray Sx = S, Tx = T;
    Sx(xi, xo) = Tx(xi, xo) = true;
    const double gain_s = cost(S) - cost(Sx);
    const double gain_t = cost(T) - cost(Tx);
    CHECK(gain_s >= -1e-9);                // adding a replica never costs more
    CHECK(gain_s >= gain_t - 1e-9);        // diminishing savings
  }
}

TEST_CASE("greedy against brute force on random instances") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    const PlacementInstance in = random_placement_instance(rng);
    const auto g = greedy_place(in.demand, in.cache_size, in.topo, in.data);
    const auto b = brute_force_place(in.demand, in.cache_size, in.topo, in.data);
    CHECK(g.profile.feasible(in.data));
    CHECK(b.profile.feasible(in.data));
    CHECK(b.objective <= g.objective + 1e-9);
    CHECK(placement_savings(g.profile, in.demand, in.topo) >=
          0.5 * placement_savings(b.profile, in.demand, in.topo) - 1e-9);
    CHECK(g.objective == doctest::Approx(placement_cost(g.profile, in.demand, in.topo)));

    // brute force agrees with an independent scan over enumerate_profiles
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : enumerate_profiles(in.cache_size, in.data))
      best = std::min(best, oracle_cost(p.cached, in.demand, in.topo));
    CHECK(b.objective == doctest::Approx(best));

    const auto ind = independent_place(in.demand, in.cache_size, in.topo, in.data);
    CHECK(ind.profile.feasible(in.data));
  }
}

TEST_CASE("independent placement ignores other clouds") {
  const Topology topo = fixtures::line(2, 10.0, 100.0);
  const DataCatalog data({1.0, 1.0});
  const auto d = demand_of({{9, 1}, {8, 2}});
  const auto ind = independent_place(d, Eigen::Vector2d(1, 1), topo, data);
  CHECK(ind.profile.objects_at(0) == std::vector<ObjectId>{0});
  CHECK(ind.profile.objects_at(1) == std::vector<ObjectId>{0});
  const auto g = greedy_place(d, Eigen::Vector2d(1, 1), topo, data);
  CHECK(g.objective < ind.objective);
}

}  // TEST_SUITE
