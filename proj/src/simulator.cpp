#include "edgeorch/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

namespace edgeorch {

const char* to_string(Policy p) {
  switch (p) {
    case Policy::proposed: return "proposed";
    case Policy::myopic_coop: return "myopic_coop";
    case Policy::myopic_nocoop: return "myopic_nocoop";
  }
  return "unknown";
}

Policy policy_from_string(const std::string& s) {
  if (s == "proposed") return Policy::proposed;
  if (s == "myopic_coop") return Policy::myopic_coop;
  if (s == "myopic_nocoop") return Policy::myopic_nocoop;
  throw Error("unknown policy '" + s + "'");
}

double default_dual_scale(const Scenario& s) {
  if (s.control.V <= 0.0) return 1.0;
  double p_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k < s.vms.num_types(); ++k) p_min = std::min(p_min, s.vms.rate(k));
  return 2.0 * s.vms.num_resources() * s.vms.recipe.maxCoeff() / (s.control.V * p_min);
}

std::size_t InvariantCounters::total() const {
  return capacity_violations + conservation_failures + ratio_violations + infeasible_placements +
         objective_mismatches + queue_replay_mismatches + budget_bound_violations;
}

namespace {

constexpr double kRatio = std::numbers::e / (std::numbers::e - 1.0);

bool close(double a, double b, double rel = 1e-9) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

// Cheapest configuration that fits, accepted only if the slot budget still
// covers its transport cost.
Decision myopic_decide(const Request& req, const ReplicaMap& replicas, const OrchestratorState& st,
                       ResourceState& resources, const Scenario& sc, const DataCatalog& data) {
  Decision d;
  d.request = req.id;
  d.arrival = req.arrival;
  const Eigen::MatrixXd table = transport_table(req, replicas, sc.topology, data);
  std::optional<AllocationConfig> best;
  double best_cost = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd best_usage;
  for (auto& c : enumerate_configs(req, sc.topology)) {
    Eigen::MatrixXd usage = c.usage(sc.vms);
    if (!resources.fits(usage, req.arrival, req.end())) continue;
    const double cost = request_transport_cost(req, c, table);
    if (cost < best_cost) {
      best_cost = cost;
      best = std::move(c);
      best_usage = std::move(usage);
    }
  }
  if (!best) {
    d.reason = RejectReason::no_feasible_config;
    return d;
  }
  d.objective = -best_cost;
  if (st.slot_C + best_cost > st.budget) {
    d.reason = RejectReason::over_budget;
    return d;
  }
  resources.lease(req.id, best_usage, req.arrival, req.end());
  d.accepted = true;
  d.config = std::move(best);
  return d;
}

PlacementRecord record_of(std::int64_t slot, const PlacementSolution& sol, double epsilon) {
  PlacementRecord r;
  r.slot = slot;
  for (int i = 0; i < sol.profile.num_clouds(); ++i) r.objects.push_back(sol.profile.objects_at(i));
  r.objective = sol.objective;
  r.rounds = sol.rounds;
  r.epsilon = epsilon;
  return r;
}

}  // namespace

RunReport run_policy(Policy policy, const Scenario& scenario, const Workload& workload,
                     std::int64_t horizon, const RunOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  scenario.validate();
  if (workload.data.public_count() != scenario.data.public_count())
    throw Error("workload and scenario disagree on the public catalog");
  const int S = scenario.control.slots_per_coarse;
  if (horizon < 0) throw Error("horizon must be non-negative");
  const DataCatalog& data = workload.data;

  RunReport report;
  report.policy = policy;
  report.stream_hash = workload.hash;

  OrchestratorState state;
  state.V = scenario.control.V;
  state.budget = scenario.control.budget;
  state.c_max = scenario.control.effective_c_max();
  state.strict_scoring = scenario.control.strict_scoring;
  report.B = state.B();

  AllocatorOptions ao;
  ao.V = scenario.control.V;
  ao.dual_scale = scenario.control.dual_scale.value_or(default_dual_scale(scenario));
  ao.admit.num_types = scenario.vms.num_types();
  ao.admit.split = options.split;
  ao.admit.capacity_guard = options.capacity_guard;
  ao.record_window = options.record_window;
  Allocator allocator(scenario.topology, scenario.vms, data, scenario.capacity, ao);
  ResourceState myopic_resources(scenario.capacity);
  ResourceState& resources =
      policy == Policy::proposed ? allocator.resources() : myopic_resources;

  std::mt19937_64 perturb_rng(options.perturb_seed);
  double last_epsilon = 0.0;

  SlotHooks hooks;
  hooks.begin_fine_slot = [&](FineSlot t) {
    if (policy == Policy::proposed)
      allocator.advance(t);
    else
      myopic_resources.advance(t);
  };
  hooks.end_fine_slot = [&](FineSlot t) {
    if (!resources.conserved()) ++report.invariants.conservation_failures;
    if (options.capacity_guard && resources.free_at(t).minCoeff() < -1e-9)
      ++report.invariants.capacity_violations;
    if (policy == Policy::proposed && options.probe) options.probe(t, allocator);
  };
  hooks.decide = [&](const Request& req, const ReplicaMap& replicas,
                     const OrchestratorState& st) -> Decision {
    if (policy != Policy::proposed)
      return myopic_decide(req, replicas, st, myopic_resources, scenario, data);
    Decision d = allocator.process(req, replicas, st.cost_weight());
    if (d.accepted && d.delta_primal > 0.0 &&
        std::abs(d.delta_dual / d.delta_primal - kRatio) / kRatio > 1e-9)
      ++report.invariants.ratio_violations;
    return d;
  };
  hooks.place = [&](const DemandMatrix& demand) {
    const Perturbation p = perturb_demand(demand, options.error_mean, perturb_rng);
    last_epsilon = p.epsilon;
    PlacementSolution sol =
        policy == Policy::myopic_nocoop
            ? independent_place(p.demand, scenario.cache_size, scenario.topology, data)
            : greedy_place(p.demand, scenario.cache_size, scenario.topology, data);
    // the profile is judged on what was actually demanded
    sol.objective = placement_cost(sol.profile, demand, scenario.topology);
    return sol;
  };

  PlacementProfile profile = scenario.empty_placement();
  const auto& reqs = workload.requests;
  std::size_t cursor = 0;
  for (std::int64_t T = 0; T < horizon; ++T) {
    const FineSlot end = (T + 1) * S;
    const std::size_t begin = cursor;
    while (cursor < reqs.size() && reqs[cursor].arrival < end) ++cursor;
    const std::span<const Request> slot_reqs(reqs.data() + begin, cursor - begin);

    SlotOutcome out = run_coarse_slot(state, slot_reqs, S, profile, scenario.topology,
                                      scenario.vms, data, hooks);
    if (!out.placement.profile.feasible(data)) ++report.invariants.infeasible_placements;
    if (!close(out.placement.objective,
               placement_cost(out.placement.profile, out.demand, scenario.topology)))
      ++report.invariants.objective_mismatches;

    report.slots.push_back(out.report);
    if (options.record_decisions)
      for (auto& d : out.decisions) report.decisions.push_back(std::move(d));
    if (options.record_placements)
      report.placements.push_back(record_of(T, out.placement, last_epsilon));
    profile = std::move(out.placement.profile);
  }

  double Q = 0.0;
  double sum_C = 0.0;
  for (const auto& s : report.slots) {
    Q = update_virtual_queue(Q, s.C, state.budget);
    sum_C += s.C;
    if (!close(Q, s.Q)) ++report.invariants.queue_replay_mismatches;
  }
  if (horizon > 0) {
    const double Th = static_cast<double>(horizon);
    if (sum_C / Th - state.budget > Q / Th + 1e-9 * std::max(1.0, state.budget))
      ++report.invariants.budget_bound_violations;
  }

  if (policy == Policy::proposed) {
    report.allocator = allocator.counters();
    report.max_overshoot = allocator.duals().max_overshoot();
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

double lookahead_oracle(const Scenario& scenario, const Workload& workload, int N, int z,
                        OracleLimits limits) {
  if (N < 1 || z < 0) throw Error("look-ahead needs N >= 1 and z >= 0");
  const int S = scenario.control.slots_per_coarse;
  const FineSlot first = static_cast<FineSlot>(z) * N * S;
  const FineSlot last = first + static_cast<FineSlot>(N) * S;
  const DataCatalog& data = workload.data;

  std::vector<const Request*> reqs;
  for (const auto& r : workload.requests)
    if (r.arrival >= first && r.arrival < last) reqs.push_back(&r);
  if (static_cast<int>(reqs.size()) > limits.max_requests)
    throw Error("look-ahead frame has too many requests");
  if (reqs.empty()) return 0.0;

  const std::vector<PlacementProfile> profiles =
      enumerate_profiles(scenario.cache_size, data, {limits.max_profiles});
  std::vector<ReplicaMap> maps;
  maps.reserve(profiles.size());
  for (const auto& p : profiles) maps.emplace_back(p, scenario.topology);

  struct Option {
    Eigen::MatrixXd usage;
    double revenue;
    std::vector<double> cost;  // per profile
  };
  std::vector<std::vector<Option>> options(reqs.size());
  std::vector<int> slot_of(reqs.size());
  FineSlot horizon_end = last;
  double leaves = 1.0;
  for (std::size_t l = 0; l < reqs.size(); ++l) {
    const Request& req = *reqs[l];
    slot_of[l] = static_cast<int>((req.arrival - first) / S);
    horizon_end = std::max(horizon_end, req.end());
    for (const auto& c : enumerate_configs(req, scenario.topology)) {
      Option o{c.usage(scenario.vms), request_revenue(req, c, scenario.vms), {}};
      for (const auto& m : maps)
        o.cost.push_back(request_transport_cost(req, c, m, scenario.topology, data));
      options[l].push_back(std::move(o));
    }
    leaves *= static_cast<double>(options[l].size() + 1);
  }
  if (leaves > limits.max_leaves) throw Error("look-ahead search exceeds cap");

  std::vector<Eigen::MatrixXd> load(static_cast<std::size_t>(horizon_end - first),
                                    Eigen::MatrixXd::Zero(scenario.capacity.rows(),
                                                          scenario.capacity.cols()));
  std::vector<int> choice(reqs.size(), -1);
  const double cost_cap = N * scenario.control.budget;
  double best = 0.0;

  auto leaf_value = [&](double revenue) {
    if (revenue <= best) return;
    double cost = 0.0;
    for (int s = 0; s < N; ++s) {
      double slot_best = std::numeric_limits<double>::infinity();
      for (std::size_t p = 0; p < profiles.size(); ++p) {
        double c = 0.0;
        for (std::size_t l = 0; l < reqs.size(); ++l)
          if (slot_of[l] == s && choice[l] >= 0)
            c += options[l][static_cast<std::size_t>(choice[l])].cost[p];
        slot_best = std::min(slot_best, c);
      }
      cost += slot_best;
    }
    if (cost <= cost_cap * (1.0 + 1e-12)) best = revenue;
  };

  std::function<void(std::size_t, double)> search = [&](std::size_t l, double revenue) {
    if (l == reqs.size()) {
      leaf_value(revenue);
      return;
    }
    search(l + 1, revenue);
    const Request& req = *reqs[l];
    for (std::size_t c = 0; c < options[l].size(); ++c) {
      const Option& o = options[l][c];
      bool fits = true;
      for (FineSlot t = req.arrival; t < req.end() && fits; ++t) {
        const auto& used = load[static_cast<std::size_t>(t - first)];
        fits = ((used + o.usage - scenario.capacity).array() <= 1e-9).all();
      }
      if (!fits) continue;
      for (FineSlot t = req.arrival; t < req.end(); ++t)
        load[static_cast<std::size_t>(t - first)] += o.usage;
      choice[l] = static_cast<int>(c);
      search(l + 1, revenue + o.revenue);
      choice[l] = -1;
      for (FineSlot t = req.arrival; t < req.end(); ++t)
        load[static_cast<std::size_t>(t - first)] -= o.usage;
    }
  };
  search(0, 0.0);
  return best / N;
}

LookaheadBound lookahead_bound_check(const std::vector<SlotReport>& slots,
                              const std::vector<double>& oracle, double B, int N, double V) {
  LookaheadBound r;
  const std::size_t Z = oracle.size();
  const std::size_t frames = Z * static_cast<std::size_t>(N);
  if (slots.size() < frames) throw Error("run is shorter than the look-ahead frames");
  if (Z == 0) {
    r.pass = true;
    return r;
  }
  double sum_R = 0.0;
  for (std::size_t T = 0; T < frames; ++T) sum_R += slots[T].R;
  double sum_hat = 0.0;
  for (double v : oracle) sum_hat += v;
  r.lhs = sum_R / static_cast<double>(frames);
  const double gap = V > 0.0 ? B * N / V : std::numeric_limits<double>::infinity();
  r.rhs = (1.0 - 1.0 / std::numbers::e) * (sum_hat / static_cast<double>(Z) - gap);
  r.margin = r.lhs - r.rhs;
  r.pass = r.lhs >= r.rhs;
  return r;
}

}  // namespace edgeorch
