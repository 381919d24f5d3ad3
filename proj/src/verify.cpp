#include "edgeorch/verify.hpp"

#include <chrono>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "edgeorch/simulator.hpp"

namespace edgeorch {

bool SuiteResult::pass() const {
  for (const auto& c : cases)
    if (!c.pass) return false;
  return !cases.empty();
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"lemma5", "lemma6", "lemma7",
                                                 "prop2",  "theorem1", "lemma1"};
  return names;
}

PlacementInstance random_placement_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_clouds(1, 3), n_objects(1, 8), size(1, 3), cache(0, 3);
  std::uniform_int_distribution<int> peer(1, 50), extra(0, 100);
  std::uniform_real_distribution<double> amount(0.0, 10.0);
  std::bernoulli_distribution idle(0.3);

  PlacementInstance in;
  const int n = n_clouds(rng);
  const int m = n_objects(rng);
  in.topo.latency = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) in.topo.latency(i, j) = in.topo.latency(j, i) = peer(rng);
  in.topo.origin_latency.resize(n);
  for (int i = 0; i < n; ++i)
    in.topo.origin_latency(i) = in.topo.latency.row(i).maxCoeff() + extra(rng);
  for (int o = 0; o < m; ++o) in.data.add_public(size(rng));
  in.cache_size.resize(n);
  for (int i = 0; i < n; ++i) in.cache_size(i) = cache(rng);
  in.demand = DemandMatrix::zero(0, n, m);
  for (int i = 0; i < n; ++i)
    for (int o = 0; o < m; ++o) in.demand.demand(i, o) = idle(rng) ? 0.0 : amount(rng);
  return in;
}

TinyInstance tiny_lookahead_instance(std::uint64_t seed) {
  TinyInstance t;
  Scenario& s = t.scenario;
  s.name = "tiny";
  s.topology.latency.resize(2, 2);
  s.topology.latency << 0, 20,
                        20, 0;
  s.topology.origin_latency.resize(2);
  s.topology.origin_latency << 100, 150;
  s.vms.type_names = {"type1", "type2"};
  s.vms.resource_names = {"r0", "r1", "r2"};
  s.vms.recipe.resize(2, 3);
  s.vms.recipe << 10, 20, 30,
                  30, 20, 10;
  s.vms.price.resize(2);
  s.vms.price << 10, 20;
  s.capacity = Eigen::MatrixXd::Constant(2, 3, 60.0);
  s.data = DataCatalog(std::vector<double>(3, 1.0));
  s.cache_size = Eigen::VectorXd::Constant(2, 1.0);
  s.control.V = 1e5;
  s.control.budget = 150.0;
  s.control.slots_per_coarse = 4;
  s.validate();

  WorkloadConfig w;
  w.seed = seed;
  w.lambda_lo = w.lambda_hi = 0.4;
  w.lifetime_hi = 3;
  w.objects_hi = 2;
  w.frame_length = t.N * s.control.slots_per_coarse;
  w.frame_max = 4;
  t.workload = generate_workload(w, s.data, 2, 2,
                                 static_cast<std::int64_t>(t.Z) * t.N * s.control.slots_per_coarse);
  return t;
}

Scenario stressed_scenario() {
  ScenarioShape shape = desk_shape();
  shape.capacity = 150.0;
  // the backlog never builds, so adjusted revenue keeps its full scale
  shape.control.budget = 1e12;
  return make_scenario(shape, 7);
}

WorkloadConfig stressed_workload(std::uint64_t seed) {
  WorkloadConfig w = desk_workload(seed);
  w.lambda_lo = 5.0;
  w.lambda_hi = 15.0;
  return w;
}

namespace {

constexpr std::int64_t kHorizon = 150;

struct Desk {
  Scenario scenario;
  Workload workload;
};

Desk desk(std::uint64_t seed) {
  Desk d{make_scenario(desk_shape(), 7), {}};
  d.workload = generate_workload(desk_workload(seed), d.scenario.data, d.scenario.vms.num_types(),
                                 d.scenario.num_clouds(),
                                 kHorizon * d.scenario.control.slots_per_coarse);
  return d;
}

void lemma6(SuiteResult& out, std::uint64_t seed) {
  const auto started = std::chrono::steady_clock::now();
  const Desk d = desk(seed);
  const RunReport r = run_policy(Policy::proposed, d.scenario, d.workload, kHorizon);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  out.cases.push_back({"ratio identity", r.invariants.ratio_violations == 0 &&
                                             r.allocator.max_ratio_error <= 1e-9,
                       fmt::format("max relative deviation {:.3e} over {} accepts",
                                   r.allocator.max_ratio_error, r.allocator.accepted)});
  out.cases.push_back({"at least 500 accepts", r.allocator.accepted >= 500,
                       fmt::format("{} accepted", r.allocator.accepted)});
  out.cases.push_back({"runtime under 30 s", secs < 30.0, fmt::format("{:.2f} s", secs)});
}

void lemma5(SuiteResult& out, std::uint64_t seed) {
  const Desk d = desk(seed);
  std::mt19937_64 rng(seed ^ 0x5eedULL);
  std::uniform_int_distribution<FineSlot> pick(0, kHorizon * d.scenario.control.slots_per_coarse - 1);
  std::set<FineSlot> windows;
  while (windows.size() < 100) windows.insert(pick(rng));

  std::size_t violations = 0, checked = 0, requests = 0;
  RunOptions opt;
  opt.record_window = true;
  opt.probe = [&](FineSlot t, const Allocator& a) {
    if (!windows.count(t)) return;
    ++checked;
    requests += a.window_requests();
    violations += a.dual_violations();
  };
  run_policy(Policy::proposed, d.scenario, d.workload, kHorizon, opt);
  out.cases.push_back({"dual feasibility", checked == windows.size() && violations == 0,
                       fmt::format("{} windows, {} requests replayed, {} violations", checked,
                                   requests, violations)});
}

void lemma7(SuiteResult& out, std::uint64_t seed) {
  const Scenario sc = stressed_scenario();
  std::size_t failures = 0, warnings = 0;
  double worst = -1.0, overshoot_seen = 0.0;
  for (std::uint64_t k = 0; k < 50; ++k) {
    const Workload wl = generate_workload(stressed_workload(seed * 1000 + k), sc.data,
                                          sc.vms.num_types(), sc.num_clouds(),
                                          20 * sc.control.slots_per_coarse);
    RunOptions opt;
    opt.capacity_guard = false;
    const RunReport r = run_policy(Policy::proposed, sc, wl, 20, opt);
    const double bound = r.allocator.max_request_usage;
    if (r.max_overshoot > bound + 1e-9) ++failures;
    worst = std::max(worst, r.max_overshoot - bound);
    overshoot_seen = std::max(overshoot_seen, r.max_overshoot);
    warnings += r.allocator.scaling_warnings;
  }
  out.cases.push_back({"price scaling holds", warnings == 0,
                       fmt::format("{} scaling warnings", warnings)});
  out.cases.push_back({"overshoot within one request", failures == 0,
                       fmt::format("50 runs, {} violations, largest overshoot {:.3f}, "
                                   "worst overshoot minus bound {:.3f}",
                                   failures, overshoot_seen, worst)});
}

void prop2(SuiteResult& out, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::size_t failures = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 200; ++k) {
    const PlacementInstance in = random_placement_instance(rng);
    const auto g = greedy_place(in.demand, in.cache_size, in.topo, in.data);
    const auto b = brute_force_place(in.demand, in.cache_size, in.topo, in.data);
    const double sg = placement_savings(g.profile, in.demand, in.topo);
    const double sb = placement_savings(b.profile, in.demand, in.topo);
    if (!g.profile.feasible(in.data) || sg < 0.5 * sb - 1e-9) ++failures;
    if (sb > 0.0) worst = std::min(worst, sg / sb);
  }
  out.cases.push_back({"greedy keeps half the optimal savings", failures == 0,
                       fmt::format("200 instances, {} failures, worst ratio {:.4f}", failures,
                                   worst)});
}

void theorem1(SuiteResult& out, std::uint64_t seed) {
  std::size_t failures = 0;
  double least = std::numeric_limits<double>::infinity();
  for (std::uint64_t k = 0; k < 20; ++k) {
    const TinyInstance t = tiny_lookahead_instance(seed * 100 + k);
    const RunReport r =
        run_policy(Policy::proposed, t.scenario, t.workload, static_cast<std::int64_t>(t.Z) * t.N);
    std::vector<double> oracle;
    for (int z = 0; z < t.Z; ++z) oracle.push_back(lookahead_oracle(t.scenario, t.workload, t.N, z));
    const auto res = lookahead_bound_check(r.slots, oracle, r.B, t.N, t.scenario.control.V);
    if (!res.pass) ++failures;
    least = std::min(least, res.margin);
  }
  out.cases.push_back({"bound against the look-ahead optimum", failures == 0,
                       fmt::format("20 instances, {} failures, smallest margin {:.3f}", failures,
                                   least)});
}

void lemma1(SuiteResult& out, std::uint64_t seed) {
  for (std::uint64_t k = 0; k < 3; ++k) {
    const Desk d = desk(seed + k);
    const RunReport r = run_policy(Policy::proposed, d.scenario, d.workload, kHorizon);
    const double budget = d.scenario.control.budget;
    const double q_rate = r.final_Q() / static_cast<double>(kHorizon);
    out.cases.push_back(
        {fmt::format("seed {} telescoped bound and queue replay", seed + k),
         r.invariants.budget_bound_violations == 0 && r.invariants.queue_replay_mismatches == 0,
         fmt::format("avg C {:.1f}, budget {:.1f}, Q/T {:.2f}", r.avg_C(), budget, q_rate)});
    out.cases.push_back({fmt::format("seed {} stability", seed + k),
                         r.avg_C() <= 1.05 * budget && q_rate <= 0.05 * budget,
                         fmt::format("avg C / budget {:.4f}, Q/T / budget {:.4f}",
                                     r.avg_C() / budget, q_rate / budget)});
  }
}

}  // namespace

SuiteResult run_suite(const std::string& name, std::uint64_t seed) {
  const auto started = std::chrono::steady_clock::now();
  SuiteResult out;
  out.suite = name;
  if (name == "lemma5") lemma5(out, seed);
  else if (name == "lemma6") lemma6(out, seed);
  else if (name == "lemma7") lemma7(out, seed);
  else if (name == "prop2") prop2(out, seed);
  else if (name == "theorem1") theorem1(out, seed);
  else if (name == "lemma1") lemma1(out, seed);
  else throw Error("unknown suite '" + name + "'");
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

}  // namespace edgeorch
