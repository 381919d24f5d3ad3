#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "edgeorch/allocator.hpp"
#include "edgeorch/orchestrator.hpp"
#include "edgeorch/placement.hpp"
#include "edgeorch/scenario.hpp"
#include "edgeorch/workload.hpp"

namespace edgeorch {

enum class Policy { proposed, myopic_coop, myopic_nocoop };
const char* to_string(Policy p);
Policy policy_from_string(const std::string& s);

// Scale that lifts adjusted revenue into shadow-price units so that one VM
// of the cheapest type covers twice the largest per-resource usage.
double default_dual_scale(const Scenario& s);

struct RunOptions {
  bool capacity_guard = true;
  IncrementSplit split = IncrementSplit::touched_resources;
  bool record_decisions = false;
  bool record_placements = false;
  bool record_window = false;  // keep what Allocator::dual_violations needs
  double error_mean = 0.0;     // popularity estimation error fed to placement
  std::uint64_t perturb_seed = 0;
  // Called after each fine slot of the proposed policy, before prices reset.
  std::function<void(FineSlot, const Allocator&)> probe;
};

struct InvariantCounters {
  std::size_t capacity_violations = 0;  // free units below zero with the guard on
  std::size_t conservation_failures = 0;
  std::size_t ratio_violations = 0;     // per-decision primal/dual ratio off by > 1e-9
  std::size_t infeasible_placements = 0;
  std::size_t objective_mismatches = 0;  // placement objective differs from re-evaluation
  std::size_t queue_replay_mismatches = 0;
  std::size_t budget_bound_violations = 0;

  std::size_t total() const;
};

struct PlacementRecord {
  std::int64_t slot = 0;
  std::vector<std::vector<ObjectId>> objects;  // per cloud
  double objective = 0.0;
  std::vector<GreedyRound> rounds;
  double epsilon = 0.0;
};

struct RunReport {
  Policy policy = Policy::proposed;
  std::uint64_t seed = 0;
  std::uint64_t stream_hash = 0;
  std::vector<SlotReport> slots;
  std::vector<Decision> decisions;
  std::vector<PlacementRecord> placements;
  InvariantCounters invariants;
  AllocatorCounters allocator;  // proposed only
  double max_overshoot = 0.0;   // proposed only
  double wall_seconds = 0.0;
  double B = 0.0;

  double avg_R() const { return slots.empty() ? 0.0 : slots.back().avg_R; }
  double avg_C() const { return slots.empty() ? 0.0 : slots.back().avg_C; }
  double final_Q() const { return slots.empty() ? 0.0 : slots.back().Q; }
  double acceptance_rate() const { return slots.empty() ? 0.0 : slots.back().acceptance_rate; }
};

RunReport run_policy(Policy policy, const Scenario& scenario, const Workload& workload,
                     std::int64_t horizon, const RunOptions& options = {});

struct OracleLimits {
  int max_requests = 6;
  double max_leaves = 5e6;
  double max_profiles = 4096;
};

// Best frame revenue divided by N, choosing for every request of frame z
// rejection or a configuration, and a placement per coarse slot, subject to
// capacity from a fresh start and frame-average cost <= budget.
double lookahead_oracle(const Scenario& scenario, const Workload& workload, int N, int z,
                        OracleLimits limits = {});

struct LookaheadBound {
  bool pass = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // lhs - rhs
};

// (1/(ZN)) sum_{T < ZN} R(T) >= (1 - 1/e) ((1/Z) sum_z oracle(z) - B N / V)
LookaheadBound lookahead_bound_check(const std::vector<SlotReport>& slots,
                              const std::vector<double>& oracle, double B, int N, double V);

}  // namespace edgeorch
