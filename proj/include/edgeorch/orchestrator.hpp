#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "edgeorch/allocator.hpp"
#include "edgeorch/model.hpp"
#include "edgeorch/placement.hpp"

namespace edgeorch {

// Q' = max(Q + C - budget, 0)
double update_virtual_queue(double Q, double C, double budget);

// B = max(c_max^2, budget^2) / 2
double drift_bound(double c_max, double budget);

struct OrchestratorState {
  double Q = 0.0;
  double V = 1.0;
  double budget = 0.0;
  double c_max = 0.0;
  bool strict_scoring = false;
  std::int64_t T = 0;  // slots completed so far

  double slot_R = 0.0;
  double slot_C = 0.0;

  // running totals across completed slots
  double total_R = 0.0;
  double total_C = 0.0;
  std::size_t total_arrivals = 0;
  std::size_t total_accepted = 0;

  double B() const { return drift_bound(c_max, budget); }
  // Weight on per-fine-slot transport cost when scoring a request.
  double cost_weight() const { return strict_scoring ? 1.0 : std::max(Q, 1.0); }
};

// V * R - Q * (C - budget), the variable part of the per-slot lower bound.
double drift_plus_penalty_value(const OrchestratorState& state, double R, double C);

struct SlotReport {
  std::int64_t T = 0;
  double R = 0.0;
  double C = 0.0;
  double Q = 0.0;  // backlog after this slot's update
  double avg_R = 0.0;
  double avg_C = 0.0;
  double acceptance_rate = 0.0;  // cumulative
  double dpp_value = 0.0;        // evaluated with the backlog the slot started with
  std::size_t arrivals = 0;
  std::size_t accepted = 0;
};

// What a policy plugs into the coarse-slot loop.
struct SlotHooks {
  // Called before the requests of fine slot t are handled.
  std::function<void(FineSlot)> begin_fine_slot;
  // Called after the requests of fine slot t are handled.
  std::function<void(FineSlot)> end_fine_slot;
  std::function<Decision(const Request&, const ReplicaMap&, const OrchestratorState&)> decide;
  std::function<PlacementSolution(const DemandMatrix&)> place;
};

struct SlotOutcome {
  SlotReport report;
  std::vector<Decision> decisions;
  std::vector<AcceptedRequest> accepted;
  DemandMatrix demand;
  PlacementSolution placement;  // the profile used by the next slot
};

// One coarse slot: handles the requests of every fine slot in
// [T * slots_per_coarse, (T + 1) * slots_per_coarse), accounts R and C,
// updates Q, then re-places public data from the slot's demand.
// `requests` must hold exactly the slot's arrivals in time order.
SlotOutcome run_coarse_slot(OrchestratorState& state, std::span<const Request> requests,
                            int slots_per_coarse, const PlacementProfile& profile,
                            const Topology& topo, const VmCatalog& vms, const DataCatalog& data,
                            const SlotHooks& hooks);

}  // namespace edgeorch
