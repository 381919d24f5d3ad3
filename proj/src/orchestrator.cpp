#include "edgeorch/orchestrator.hpp"

#include <algorithm>

namespace edgeorch {

double update_virtual_queue(double Q, double C, double budget) {
  return std::max(Q + C - budget, 0.0);
}

double drift_bound(double c_max, double budget) {
  return std::max(c_max * c_max, budget * budget) / 2.0;
}

double drift_plus_penalty_value(const OrchestratorState& state, double R, double C) {
  return state.V * R - state.Q * (C - state.budget);
}

SlotOutcome run_coarse_slot(OrchestratorState& state, std::span<const Request> requests,
                            int slots_per_coarse, const PlacementProfile& profile,
                            const Topology& topo, const VmCatalog& vms, const DataCatalog& data,
                            const SlotHooks& hooks) {
  if (slots_per_coarse < 1) throw Error("a coarse slot needs at least one fine slot");
  const FineSlot first = state.T * slots_per_coarse;
  const FineSlot last = first + slots_per_coarse;

  SlotOutcome out;
  state.slot_R = 0.0;
  state.slot_C = 0.0;
  const ReplicaMap replicas(profile, topo);

  std::size_t next = 0;
  for (FineSlot t = first; t < last; ++t) {
    if (hooks.begin_fine_slot) hooks.begin_fine_slot(t);
    for (; next < requests.size() && requests[next].arrival == t; ++next) {
      const Request& req = requests[next];
      Decision d = hooks.decide(req, replicas, state);
      if (d.accepted) {
        const AllocationConfig& config = *d.config;
        state.slot_R += request_revenue(req, config, vms);
        state.slot_C += request_transport_cost(req, config, replicas, topo, data);
        out.accepted.push_back({req, config});
      }
      out.decisions.push_back(std::move(d));
    }
    if (hooks.end_fine_slot) hooks.end_fine_slot(t);
  }
  if (next != requests.size())
    throw Error("request stream is not ordered or falls outside the coarse slot");

  SlotReport& r = out.report;
  r.T = state.T;
  r.R = state.slot_R;
  r.C = state.slot_C;
  r.dpp_value = drift_plus_penalty_value(state, r.R, r.C);
  r.arrivals = requests.size();
  r.accepted = out.accepted.size();

  state.Q = update_virtual_queue(state.Q, r.C, state.budget);
  state.total_R += r.R;
  state.total_C += r.C;
  state.total_arrivals += r.arrivals;
  state.total_accepted += r.accepted;
  ++state.T;

  r.Q = state.Q;
  r.avg_R = state.total_R / static_cast<double>(state.T);
  r.avg_C = state.total_C / static_cast<double>(state.T);
  r.acceptance_rate = state.total_arrivals == 0 ? 0.0
                                                : static_cast<double>(state.total_accepted) /
                                                      static_cast<double>(state.total_arrivals);

  out.demand = aggregate_demand(r.T, out.accepted, topo.num_clouds(), data);
  out.placement = hooks.place(out.demand);
  return out;
}

}  // namespace edgeorch
