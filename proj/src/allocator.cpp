#include "edgeorch/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace edgeorch {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kE = std::exp(1.0);

AdjustedRevenue adjusted_from_table(const Request& req, const AllocationConfig& config,
                                    const Eigen::MatrixXd& table, const VmCatalog& vms, double V,
                                    double cost_weight) {
  AdjustedRevenue out;
  out.per_cloud = Eigen::VectorXd::Zero(config.vm_counts.rows());
  for (std::size_t k = 0; k < config.host.size(); ++k) {
    const CloudId i = config.host[k];
    if (i < 0) continue;
    const auto kk = static_cast<Eigen::Index>(k);
    const double per_vm = V * vms.rate(static_cast<VmTypeId>(k)) -
                          cost_weight * table(kk, i) / static_cast<double>(req.duration);
    out.per_cloud(i) += config.vm_counts(i, kk) * per_vm;
  }
  out.total = out.per_cloud.sum();
  return out;
}

int divisor_for(const Eigen::MatrixXd& usage, CloudId i, const AdmitOptions& options) {
  if (options.split == IncrementSplit::vm_types) return options.num_types;
  return static_cast<int>((usage.row(i).array() > 0.0).count());
}

}  // namespace

AdjustedRevenue adjusted_revenue(const Request& req, const AllocationConfig& config,
                                 const ReplicaMap& replicas, const Topology& topo,
                                 const DataCatalog& data, const VmCatalog& vms, double V,
                                 double cost_weight) {
  return adjusted_from_table(req, config, transport_table(req, replicas, topo, data), vms, V,
                             cost_weight);
}

AdjustedRevenue adjusted_revenue(const Request& req, const AllocationConfig& config,
                                 const PlacementProfile& profile, const Topology& topo,
                                 const DataCatalog& data, const VmCatalog& vms, double V,
                                 double cost_weight) {
  return adjusted_revenue(req, config, ReplicaMap(profile, topo), topo, data, vms, V, cost_weight);
}

// ---------------------------------------------------------------------------

DualState::DualState(int clouds, int resources) : clouds_(clouds), resources_(resources) {}

std::size_t DualState::index(FineSlot t) const {
  if (t < start_ || t >= window_end()) throw Error("fine slot outside the priced window");
  return static_cast<std::size_t>(t - start_);
}

void DualState::reset(FineSlot now, const ResourceState& resources) {
  start_ = now;
  beta_.clear();
  baseline_.clear();
  charged_.clear();
  cover(now + 1, resources);
}

void DualState::cover(FineSlot to, const ResourceState& resources) {
  while (window_end() < to) {
    const FineSlot t = window_end();
    Eigen::MatrixXd c = resources.free_at(t);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(clouds_, resources_);
    b = (c.array() > 0.0).select(b, kInf);
    beta_.push_back(std::move(b));
    baseline_.push_back(std::move(c));
    charged_.push_back(Eigen::MatrixXd::Zero(clouds_, resources_));
  }
}

double DualState::beta(CloudId i, ResourceId r, FineSlot t) const { return beta_at(t)(i, r); }
double DualState::baseline(CloudId i, ResourceId r, FineSlot t) const {
  return baseline_at(t)(i, r);
}
Eigen::MatrixXd& DualState::beta_at(FineSlot t) { return beta_[index(t)]; }
const Eigen::MatrixXd& DualState::beta_at(FineSlot t) const { return beta_[index(t)]; }
const Eigen::MatrixXd& DualState::baseline_at(FineSlot t) const { return baseline_[index(t)]; }
Eigen::MatrixXd& DualState::charged_at(FineSlot t) { return charged_[index(t)]; }

double DualState::charge(const Eigen::MatrixXd& usage, FineSlot from, FineSlot to) const {
  double total = 0.0;
  for (FineSlot t = from; t < to; ++t) {
    const auto& b = beta_at(t);
    for (Eigen::Index i = 0; i < usage.rows(); ++i)
      for (Eigen::Index r = 0; r < usage.cols(); ++r)
        if (usage(i, r) > 0.0) total += usage(i, r) * b(i, r);
  }
  return total;
}

double DualState::max_price(const Eigen::MatrixXd& usage, FineSlot from, FineSlot to) const {
  double best = 0.0;
  for (FineSlot t = from; t < to; ++t) {
    const auto& b = beta_at(t);
    for (Eigen::Index i = 0; i < usage.rows(); ++i)
      for (Eigen::Index r = 0; r < usage.cols(); ++r)
        if (usage(i, r) > 0.0) best = std::max(best, b(i, r));
  }
  return best;
}

// ---------------------------------------------------------------------------

ScoredConfig score_config(const Request& req, const AllocationConfig& config,
                          const AdjustedRevenue& revenue, const DualState& dual,
                          const VmCatalog& vms, double dual_scale) {
  ScoredConfig s;
  s.config = config;
  s.adjusted_revenue = revenue.total;
  s.per_cloud = revenue.per_cloud;
  s.dual_scale = dual_scale;
  s.usage = config.usage(vms);
  s.dual_charge = dual.charge(s.usage, req.arrival, req.end());
  s.objective = req.duration * dual_scale * revenue.total - s.dual_charge;
  return s;
}

ScoredConfig select_config(const Request& req, const std::vector<AllocationConfig>& configs,
                           const std::vector<AdjustedRevenue>& revenues, const DualState& dual,
                           const VmCatalog& vms, double dual_scale) {
  if (configs.empty()) throw Error("no configurations to choose from");
  if (configs.size() != revenues.size()) throw Error("one adjusted revenue per configuration");
  std::optional<ScoredConfig> best;
  for (std::size_t a = 0; a < configs.size(); ++a) {
    ScoredConfig s = score_config(req, configs[a], revenues[a], dual, vms, dual_scale);
    if (!best || s.objective > best->objective) best = std::move(s);
  }
  return *best;
}

ScoredConfig select_config(const Request& req, const std::vector<AllocationConfig>& configs,
                           const DualState& dual, const PlacementProfile& profile,
                           const Topology& topo, const DataCatalog& data, const VmCatalog& vms,
                           double V, double cost_weight, double dual_scale) {
  const Eigen::MatrixXd table = transport_table(req, ReplicaMap(profile, topo), topo, data);
  std::vector<AdjustedRevenue> revenues;
  revenues.reserve(configs.size());
  for (const auto& c : configs)
    revenues.push_back(adjusted_from_table(req, c, table, vms, V, cost_weight));
  return select_config(req, configs, revenues, dual, vms, dual_scale);
}

const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::none: return "none";
    case RejectReason::negative_objective: return "negative_objective";
    case RejectReason::price_ceiling: return "price_ceiling";
    case RejectReason::no_feasible_config: return "no_feasible_config";
    case RejectReason::over_budget: return "over_budget";
  }
  return "unknown";
}

Decision admit(const Request& req, const ScoredConfig& scored, DualState& dual,
               ResourceState& resources, const VmCatalog& /*vms*/, const AdmitOptions& options) {
  Decision d;
  d.request = req.id;
  d.arrival = req.arrival;
  d.objective = scored.objective;
  d.per_cloud = scored.per_cloud;

  const FineSlot from = req.arrival;
  const FineSlot to = req.end();
  dual.cover(to, resources);

  auto reject = [&](RejectReason why) {
    d.reason = why;
    // alpha stays dual-feasible for every configuration of this request
    d.alpha = std::max(scored.objective, 0.0);
    if (std::isnan(d.alpha)) d.alpha = 0.0;
    dual.alpha[req.id] = d.alpha;
    return d;
  };

  if (!(scored.objective >= 0.0)) return reject(RejectReason::negative_objective);
  if (dual.max_price(scored.usage, from, to) > 1.0) return reject(RejectReason::price_ceiling);
  if (options.capacity_guard && !resources.fits(scored.usage, from, to))
    return reject(RejectReason::no_feasible_config);

  // Additive increment mass per cloud. When a cloud's component is negative
  // the positive components are rescaled to the same total so prices never drop.
  const Eigen::VectorXd scaled = scored.dual_scale * scored.per_cloud;
  const double total = scaled.sum();
  const Eigen::VectorXd positive = scaled.cwiseMax(0.0);
  const double positive_sum = positive.sum();
  const Eigen::VectorXd mass =
      positive_sum > 0.0 ? Eigen::VectorXd(positive * (std::max(total, 0.0) / positive_sum))
                         : Eigen::VectorXd::Zero(scaled.size());

  double delta_beta = 0.0;
  const auto& u = scored.usage;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    if (u.row(i).maxCoeff() <= 0.0) continue;
    const int divisor = divisor_for(u, static_cast<CloudId>(i), options);
    for (Eigen::Index r = 0; r < u.cols(); ++r) {
      if (u(i, r) <= 0.0) continue;
      for (FineSlot t = from; t < to; ++t) {
        const double c = dual.baseline_at(t)(i, r);
        double& b = dual.beta_at(t)(i, r);
        const double old = b;
        b = old * (1.0 + u(i, r) / c) + mass(i) / ((kE - 1.0) * divisor * c);
        delta_beta += c * (b - old);
        double& charged = dual.charged_at(t)(i, r);
        charged += u(i, r);
        dual.note_overshoot(charged - c);
      }
    }
  }
  resources.lease(req.id, u, from, to);

  d.accepted = true;
  d.config = scored.config;
  d.alpha = scored.objective;
  dual.alpha[req.id] = d.alpha;
  d.delta_primal = req.duration * scored.dual_scale * scored.adjusted_revenue;
  d.delta_dual = scored.objective + delta_beta;
  return d;
}

void advance_fine_slot(DualState& dual, ResourceState& resources, FineSlot now) {
  resources.advance(now);
  dual.reset(now, resources);
}

std::vector<ScalingWarning> check_price_scaling(const ScoredConfig& scored, const VmCatalog& vms,
                                                const AdmitOptions& options) {
  (void)vms;
  std::vector<ScalingWarning> out;
  const auto& u = scored.usage;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    if (u.row(i).maxCoeff() <= 0.0) continue;
    const int divisor = divisor_for(u, static_cast<CloudId>(i), options);
    const double have = scored.dual_scale * scored.per_cloud(i);
    for (Eigen::Index r = 0; r < u.cols(); ++r) {
      if (u(i, r) <= 0.0) continue;
      const double need = divisor * u(i, r);
      if (have < need)
        out.push_back({static_cast<CloudId>(i), static_cast<ResourceId>(r), have, need});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

Allocator::Allocator(const Topology& topo, const VmCatalog& vms, const DataCatalog& data,
                     Eigen::MatrixXd capacity, AllocatorOptions options)
    : topo_(&topo),
      vms_(&vms),
      data_(&data),
      options_(options),
      resources_(std::move(capacity)),
      dual_(topo.num_clouds(), vms.num_resources()) {
  dual_.reset(0, resources_);
}

Decision Allocator::process(const Request& req, const ReplicaMap& replicas, double cost_weight) {
  ++counters_.seen;
  const auto all = enumerate_configs(req, *topo_);
  std::vector<AllocationConfig> configs;
  configs.reserve(all.size());
  for (const auto& c : all)
    if (!options_.admit.capacity_guard || resources_.fits(c.usage(*vms_), req.arrival, req.end()))
      configs.push_back(c);
  dual_.cover(req.end(), resources_);

  Seen seen{req.id, req.arrival, req.end(), {}};
  if (configs.empty()) {
    ++counters_.rejected_capacity;
    dual_.alpha[req.id] = 0.0;
    if (options_.record_window) window_.push_back(std::move(seen));
    Decision d;
    d.request = req.id;
    d.arrival = req.arrival;
    d.reason = RejectReason::no_feasible_config;
    d.per_cloud = Eigen::VectorXd::Zero(topo_->num_clouds());
    return d;
  }

  const Eigen::MatrixXd table = transport_table(req, replicas, *topo_, *data_);
  std::vector<AdjustedRevenue> revenues;
  revenues.reserve(configs.size());
  for (const auto& c : configs)
    revenues.push_back(adjusted_from_table(req, c, table, *vms_, options_.V, cost_weight));

  const ScoredConfig scored =
      select_config(req, configs, revenues, dual_, *vms_, options_.dual_scale);
  Decision d = admit(req, scored, dual_, resources_, *vms_, options_.admit);

  if (options_.record_window) {
    for (std::size_t a = 0; a < configs.size(); ++a)
      seen.configs.emplace_back(req.duration * options_.dual_scale * revenues[a].total,
                                configs[a].usage(*vms_));
    window_.push_back(std::move(seen));
  }

  switch (d.reason) {
    case RejectReason::none: {
      ++counters_.accepted;
      const double ratio_target = kE / (kE - 1.0);
      if (d.delta_primal != 0.0) {
        const double err = std::abs(d.delta_dual / d.delta_primal - ratio_target) / ratio_target;
        counters_.max_ratio_error = std::max(counters_.max_ratio_error, err);
      } else if (d.delta_dual != 0.0) {
        counters_.max_ratio_error = kInf;
      }
      const auto warnings = check_price_scaling(scored, *vms_, options_.admit);
      d.scaling_warning = !warnings.empty();
      if (d.scaling_warning) ++counters_.scaling_warnings;
      counters_.max_request_usage = std::max(counters_.max_request_usage, scored.usage.maxCoeff());
      break;
    }
    case RejectReason::negative_objective: ++counters_.rejected_objective; break;
    case RejectReason::price_ceiling: ++counters_.rejected_ceiling; break;
    case RejectReason::no_feasible_config: ++counters_.rejected_capacity; break;
    case RejectReason::over_budget: break;
  }
  return d;
}

void Allocator::advance(FineSlot now) {
  advance_fine_slot(dual_, resources_, now);
  window_.clear();
  dual_.alpha.clear();
}

std::size_t Allocator::dual_violations(double rel_tol) const {
  std::size_t violations = 0;
  for (FineSlot t = dual_.window_start(); t < dual_.window_end(); ++t)
    violations += static_cast<std::size_t>((dual_.beta_at(t).array() < 0.0).count());
  for (const auto& s : window_) {
    const auto it = dual_.alpha.find(s.id);
    const double alpha = it == dual_.alpha.end() ? 0.0 : it->second;
    if (alpha < 0.0) ++violations;
    for (const auto& [value, usage] : s.configs) {
      const double rhs = value - dual_.charge(usage, s.from, s.to);
      if (alpha < rhs - rel_tol * std::max(1.0, std::abs(rhs))) ++violations;
    }
  }
  return violations;
}

}  // namespace edgeorch
