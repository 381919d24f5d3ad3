#pragma once

#include <deque>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "edgeorch/model.hpp"

namespace edgeorch {

// Per-cloud adjusted revenue of a configuration:
//   R~(A, i) = sum_k N(A, i, k) * (V * p_k - cost_weight * transport_k(i) / L)
// cost_weight is 1 for the printed form and the queue backlog in the
// queue-coupled form.
struct AdjustedRevenue {
  double total = 0.0;
  Eigen::VectorXd per_cloud;
};

AdjustedRevenue adjusted_revenue(const Request& req, const AllocationConfig& config,
                                 const ReplicaMap& replicas, const Topology& topo,
                                 const DataCatalog& data, const VmCatalog& vms, double V,
                                 double cost_weight = 1.0);
AdjustedRevenue adjusted_revenue(const Request& req, const AllocationConfig& config,
                                 const PlacementProfile& profile, const Topology& topo,
                                 const DataCatalog& data, const VmCatalog& vms, double V,
                                 double cost_weight = 1.0);

// Shadow prices beta(i, r, t) for the fine slots of the current window, the
// capacity baseline c(i, r, t) each price is normalised by, and alpha per
// request. A baseline of zero or less marks the slot as closed: its price is
// +inf and any configuration using it is priced out.
class DualState {
 public:
  DualState() = default;
  DualState(int clouds, int resources);

  FineSlot window_start() const { return start_; }
  FineSlot window_end() const { return start_ + static_cast<FineSlot>(beta_.size()); }

  // Starts a fresh window at `now`: every price back to zero, baselines
  // re-read from the free units in `resources`.
  void reset(FineSlot now, const ResourceState& resources);
  // Makes sure slots [start, to) are priced, baselining new slots from `resources`.
  void cover(FineSlot to, const ResourceState& resources);

  double beta(CloudId i, ResourceId r, FineSlot t) const;
  double baseline(CloudId i, ResourceId r, FineSlot t) const;
  Eigen::MatrixXd& beta_at(FineSlot t);
  const Eigen::MatrixXd& beta_at(FineSlot t) const;
  const Eigen::MatrixXd& baseline_at(FineSlot t) const;
  Eigen::MatrixXd& charged_at(FineSlot t);

  // sum over used (i, r) and t in [from, to) of usage(i, r) * beta(i, r, t).
  double charge(const Eigen::MatrixXd& usage, FineSlot from, FineSlot to) const;
  double max_price(const Eigen::MatrixXd& usage, FineSlot from, FineSlot to) const;

  std::unordered_map<RequestId, double> alpha;

  // Largest amount by which units charged in one window exceeded a baseline.
  double max_overshoot() const { return max_overshoot_; }
  void note_overshoot(double v) { max_overshoot_ = std::max(max_overshoot_, v); }

 private:
  std::size_t index(FineSlot t) const;

  int clouds_ = 0;
  int resources_ = 0;
  FineSlot start_ = 0;
  std::deque<Eigen::MatrixXd> beta_;
  std::deque<Eigen::MatrixXd> baseline_;
  std::deque<Eigen::MatrixXd> charged_;
  double max_overshoot_ = 0.0;
};

struct ScoredConfig {
  AllocationConfig config;
  double adjusted_revenue = 0.0;  // R~_A in revenue units
  Eigen::VectorXd per_cloud;      // R~_{A,i}
  double dual_scale = 1.0;        // converts R~ to shadow-price units
  double dual_charge = 0.0;
  double objective = 0.0;         // L * dual_scale * R~_A - dual_charge
  Eigen::MatrixXd usage;          // clouds x R per fine slot
};

ScoredConfig score_config(const Request& req, const AllocationConfig& config,
                          const AdjustedRevenue& revenue, const DualState& dual,
                          const VmCatalog& vms, double dual_scale = 1.0);

// Picks the configuration with the largest objective; ties keep the earliest.
// `revenues` runs parallel to `configs`.
ScoredConfig select_config(const Request& req, const std::vector<AllocationConfig>& configs,
                           const std::vector<AdjustedRevenue>& revenues, const DualState& dual,
                           const VmCatalog& vms, double dual_scale = 1.0);
// Convenience form that computes the adjusted revenues itself.
ScoredConfig select_config(const Request& req, const std::vector<AllocationConfig>& configs,
                           const DualState& dual, const PlacementProfile& profile,
                           const Topology& topo, const DataCatalog& data, const VmCatalog& vms,
                           double V, double cost_weight = 1.0, double dual_scale = 1.0);

enum class RejectReason { none, negative_objective, price_ceiling, no_feasible_config, over_budget };
const char* to_string(RejectReason r);

// How the additive price increment is split across the resources of a cloud.
// `vm_types` divides by K as printed; `touched_resources` divides by the
// number of resources the configuration uses at that cloud, which makes the
// per-decision primal/dual increment ratio exact for any resource count.
enum class IncrementSplit { vm_types, touched_resources };

struct AdmitOptions {
  int num_types = 1;  // K
  IncrementSplit split = IncrementSplit::touched_resources;
  bool capacity_guard = true;
};

struct Decision {
  RequestId request = 0;
  FineSlot arrival = 0;
  bool accepted = false;
  RejectReason reason = RejectReason::none;
  std::optional<AllocationConfig> config;
  double delta_primal = 0.0;
  double delta_dual = 0.0;
  double objective = 0.0;
  Eigen::VectorXd per_cloud;
  double alpha = 0.0;
  bool scaling_warning = false;
};

// Accepts or rejects one request and, on accept, leases its resources and
// raises the prices it touches.
Decision admit(const Request& req, const ScoredConfig& scored, DualState& dual,
               ResourceState& resources, const VmCatalog& vms, const AdmitOptions& options);

// Expires leases ending at or before `now` and opens a new price window.
void advance_fine_slot(DualState& dual, ResourceState& resources, FineSlot now);

struct ScalingWarning {
  CloudId cloud;
  ResourceId resource;
  double scaled_revenue;
  double required;
};

// Reports used (cloud, resource) pairs where the scaled per-cloud adjusted
// revenue falls below divisor * sum_k N g, the hypothesis the bounded
// capacity violation relies on.
std::vector<ScalingWarning> check_price_scaling(const ScoredConfig& scored, const VmCatalog& vms,
                                                const AdmitOptions& options);

struct AllocatorOptions {
  double V = 1.0;
  double dual_scale = 1.0;
  AdmitOptions admit;
  bool record_window = false;  // keep what the dual-feasibility replay needs
};

struct AllocatorCounters {
  std::size_t seen = 0;
  std::size_t accepted = 0;
  std::size_t rejected_objective = 0;
  std::size_t rejected_ceiling = 0;
  std::size_t rejected_capacity = 0;
  std::size_t scaling_warnings = 0;
  double max_ratio_error = 0.0;  // |dD / dP - e/(e-1)| / (e/(e-1)) over accepts
  double max_request_usage = 0.0;  // max over accepted l, i, r of sum_k N g
};

// The online allocator: owns the resource table and the duals, and runs
// enumerate -> select -> admit for each arriving request.
class Allocator {
 public:
  Allocator(const Topology& topo, const VmCatalog& vms, const DataCatalog& data,
            Eigen::MatrixXd capacity, AllocatorOptions options);

  // Scores with R~ computed at the given cost weight under `replicas`.
  Decision process(const Request& req, const ReplicaMap& replicas, double cost_weight);

  void advance(FineSlot now);

  // Replays every recorded configuration of every request seen in the
  // current window against the current prices; returns the violation count.
  std::size_t dual_violations(double rel_tol = 1e-9) const;
  std::size_t window_requests() const { return window_.size(); }

  const ResourceState& resources() const { return resources_; }
  ResourceState& resources() { return resources_; }
  const DualState& duals() const { return dual_; }
  const AllocatorCounters& counters() const { return counters_; }
  const AllocatorOptions& options() const { return options_; }
  void set_data(const DataCatalog* data) { data_ = data; }

 private:
  struct Seen {
    RequestId id;
    FineSlot from, to;
    std::vector<std::pair<double, Eigen::MatrixXd>> configs;  // (L * scale * R~, usage)
  };

  const Topology* topo_;
  const VmCatalog* vms_;
  const DataCatalog* data_;
  AllocatorOptions options_;
  ResourceState resources_;
  DualState dual_;
  AllocatorCounters counters_;
  std::vector<Seen> window_;
};

}  // namespace edgeorch
