#include "edgeorch/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace edgeorch {

void Topology::validate() const {
  const int n = num_clouds();
  if (latency.cols() != n) throw Error("latency matrix must be square");
  if (origin_latency.size() != n) throw Error("origin latency needs one entry per cloud");
  for (int i = 0; i < n; ++i) {
    if (latency(i, i) != 0.0) throw Error("latency diagonal must be zero");
    for (int j = 0; j < n; ++j) {
      if (latency(i, j) < 0.0) throw Error("negative latency");
      if (latency(i, j) != latency(j, i)) throw Error("latency must be symmetric");
    }
    if (n > 0 && origin_latency(i) < latency.row(i).maxCoeff())
      throw Error("origin must be at least as far as any peer cloud");
  }
}

void VmCatalog::validate() const {
  if (num_types() == 0) throw Error("no VM types");
  if (price.size() != num_types()) throw Error("one price per VM type required");
  if (!(price_scale > 0.0)) throw Error("price scale must be positive");
  for (int k = 0; k < num_types(); ++k) {
    if (!(price(k) > 0.0)) throw Error("VM prices must be positive");
    if ((recipe.row(k).array() < 0.0).any()) throw Error("negative recipe entry");
    if (!(recipe.row(k).maxCoeff() > 0.0)) throw Error("recipe needs a positive resource");
  }
}

DataCatalog::DataCatalog(std::vector<double> public_sizes) {
  for (double s : public_sizes) add_public(s);
}

ObjectId DataCatalog::add_public(double size) {
  if (!(size > 0.0)) throw Error("object sizes must be positive");
  if (public_count_ != this->size()) throw Error("public objects must precede private ones");
  sizes_.push_back(size);
  return public_count_++;
}

ObjectId DataCatalog::add_private(double size) {
  if (!(size > 0.0)) throw Error("object sizes must be positive");
  sizes_.push_back(size);
  return this->size() - 1;
}

double DataCatalog::public_volume() const {
  double v = 0.0;
  for (int o = 0; o < public_count_; ++o) v += sizes_[static_cast<std::size_t>(o)];
  return v;
}

int Request::positive_types() const {
  return static_cast<int>(
      std::count_if(demand.begin(), demand.end(), [](const VmDemand& d) { return d.count > 0; }));
}

int Request::total_vms() const {
  int n = 0;
  for (const auto& d : demand) n += d.count;
  return n;
}

void validate_request(const Request& req, const VmCatalog& vms, const DataCatalog& data) {
  if (req.duration < 1) throw Error("request duration must be at least one fine slot");
  if (static_cast<int>(req.demand.size()) != vms.num_types())
    throw Error("request demand must list every VM type");
  for (const auto& d : req.demand) {
    if (d.count < 0) throw Error("negative VM count");
    for (ObjectId o : d.objects)
      if (!data.contains(o)) throw Error("unknown object id " + std::to_string(o));
  }
  if (req.positive_types() == 0) throw Error("empty demand");
}

std::string AllocationConfig::describe() const {
  std::ostringstream out;
  bool first = true;
  for (std::size_t k = 0; k < host.size(); ++k) {
    if (host[k] < 0) continue;
    if (!first) out << ';';
    out << k << ':' << host[k];
    first = false;
  }
  return out.str();
}

PlacementProfile::PlacementProfile(int clouds, int public_objects, Eigen::VectorXd sizes)
    : cached(BoolArray::Constant(clouds, public_objects, false)), cache_size(std::move(sizes)) {
  if (cache_size.size() != clouds) throw Error("one cache size per cloud required");
  if ((cache_size.array() < 0.0).any()) throw Error("cache sizes must be non-negative");
}

PlacementProfile PlacementProfile::empty_like(const PlacementProfile& other) {
  return PlacementProfile(other.num_clouds(), other.num_objects(), other.cache_size);
}

std::vector<ObjectId> PlacementProfile::objects_at(CloudId i) const {
  std::vector<ObjectId> out;
  for (int o = 0; o < num_objects(); ++o)
    if (cached(i, o)) out.push_back(o);
  return out;
}

double PlacementProfile::used(CloudId i, const DataCatalog& data) const {
  double total = 0.0;
  for (int o = 0; o < num_objects(); ++o)
    if (cached(i, o)) total += data.object_size(o);
  return total;
}

bool PlacementProfile::feasible(const DataCatalog& data) const {
  if (num_objects() > data.public_count()) return false;
  for (int i = 0; i < num_clouds(); ++i)
    if (used(i, data) > cache_size(i) + 1e-9) return false;
  return true;
}

bool PlacementProfile::operator==(const PlacementProfile& other) const {
  return cached.rows() == other.cached.rows() && cached.cols() == other.cached.cols() &&
         (cached == other.cached).all() && cache_size == other.cache_size;
}

Replica nearest_replica(CloudId cloud, ObjectId o, const PlacementProfile& profile,
                        const Topology& topo, const DataCatalog& data, CloudId ingress) {
  if (!data.contains(o)) throw Error("unknown object id " + std::to_string(o));
  if (!data.is_public(o))
    return {Replica::Kind::ingress, ingress, topo.latency(cloud, ingress)};
  if (profile.contains(cloud, o)) return {Replica::Kind::local, cloud, 0.0};
  Replica best{Replica::Kind::origin, -1, topo.origin_latency(cloud)};
  for (int j = 0; j < profile.num_clouds(); ++j) {
    if (j == cloud || !profile.contains(j, o)) continue;
    // strict comparison keeps the lowest id on ties
    if (best.kind == Replica::Kind::origin || topo.latency(cloud, j) < best.latency) {
      if (topo.latency(cloud, j) <= topo.origin_latency(cloud))
        best = {Replica::Kind::peer, j, topo.latency(cloud, j)};
    }
  }
  return best;
}

ReplicaMap::ReplicaMap(const PlacementProfile& profile, const Topology& topo)
    : latency_(profile.num_clouds(), profile.num_objects()) {
  const int n = profile.num_clouds();
  for (int i = 0; i < n; ++i) {
    for (int o = 0; o < profile.num_objects(); ++o) {
      double best = topo.origin_latency(i);
      for (int j = 0; j < n; ++j)
        if (profile.cached(j, o)) best = std::min(best, topo.latency(i, j));
      latency_(i, o) = best;
    }
  }
}

std::vector<AllocationConfig> enumerate_configs(const Request& req, const Topology& topo) {
  const int n = topo.num_clouds();
  if (n == 0) throw Error("no clouds");
  std::vector<int> types;
  for (std::size_t k = 0; k < req.demand.size(); ++k)
    if (req.demand[k].count > 0) types.push_back(static_cast<int>(k));
  if (types.empty()) throw Error("empty demand");

  const int K = static_cast<int>(req.demand.size());
  std::vector<AllocationConfig> out;
  std::vector<int> digits(types.size(), 0);
  while (true) {
    AllocationConfig cfg;
    cfg.request = req.id;
    cfg.host.assign(static_cast<std::size_t>(K), -1);
    cfg.vm_counts = Eigen::MatrixXd::Zero(n, K);
    for (std::size_t p = 0; p < types.size(); ++p) {
      const int k = types[p];
      cfg.host[static_cast<std::size_t>(k)] = digits[p];
      cfg.vm_counts(digits[p], k) = req.demand[static_cast<std::size_t>(k)].count;
    }
    out.push_back(std::move(cfg));

    // odometer with the last VM type varying fastest
    int pos = static_cast<int>(types.size()) - 1;
    while (pos >= 0 && ++digits[static_cast<std::size_t>(pos)] == n) {
      digits[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return out;
}

double vm_transport_cost(const Request& req, VmTypeId k, CloudId i, const ReplicaMap& replicas,
                         const Topology& topo, const DataCatalog& data) {
  double cost = 0.0;
  for (ObjectId o : req.demand[static_cast<std::size_t>(k)].objects) {
    const double w = data.is_public(o) ? replicas.latency(i, o) : topo.latency(i, req.ingress);
    cost += w * data.object_size(o);
  }
  return cost;
}

Eigen::MatrixXd transport_table(const Request& req, const ReplicaMap& replicas,
                                const Topology& topo, const DataCatalog& data) {
  const auto K = static_cast<Eigen::Index>(req.demand.size());
  Eigen::MatrixXd table = Eigen::MatrixXd::Zero(K, topo.num_clouds());
  for (Eigen::Index k = 0; k < K; ++k) {
    if (req.demand[static_cast<std::size_t>(k)].count <= 0) continue;
    for (int i = 0; i < topo.num_clouds(); ++i)
      table(k, i) = vm_transport_cost(req, static_cast<VmTypeId>(k), i, replicas, topo, data);
  }
  return table;
}

double request_transport_cost(const Request& req, const AllocationConfig& config,
                              const Eigen::MatrixXd& table) {
  double cost = 0.0;
  for (std::size_t k = 0; k < config.host.size(); ++k)
    if (config.host[k] >= 0)
      cost += req.demand[k].count * table(static_cast<Eigen::Index>(k), config.host[k]);
  return cost;
}

double request_transport_cost(const Request& req, const AllocationConfig& config,
                              const ReplicaMap& replicas, const Topology& topo,
                              const DataCatalog& data) {
  double cost = 0.0;
  for (std::size_t k = 0; k < config.host.size(); ++k) {
    const CloudId i = config.host[k];
    if (i < 0) continue;
    cost += req.demand[k].count *
            vm_transport_cost(req, static_cast<VmTypeId>(k), i, replicas, topo, data);
  }
  return cost;
}

double request_transport_cost(const Request& req, const AllocationConfig& config,
                              const PlacementProfile& profile, const Topology& topo,
                              const DataCatalog& data) {
  return request_transport_cost(req, config, ReplicaMap(profile, topo), topo, data);
}

double request_revenue(const Request& req, const AllocationConfig& config, const VmCatalog& vms) {
  double per_slot = 0.0;
  for (int k = 0; k < vms.num_types(); ++k) per_slot += vms.rate(k) * config.vm_counts.col(k).sum();
  return req.duration * per_slot;
}

ResourceState::ResourceState(Eigen::MatrixXd capacity)
    : capacity_(std::move(capacity)), zero_(Eigen::MatrixXd::Zero(capacity_.rows(), capacity_.cols())) {
  if ((capacity_.array() < 0.0).any()) throw Error("capacities must be non-negative");
}

const Eigen::MatrixXd& ResourceState::committed_at(FineSlot t) const {
  const auto idx = t - now_;
  if (idx < 0 || idx >= static_cast<FineSlot>(committed_.size())) return zero_;
  return committed_[static_cast<std::size_t>(idx)];
}

Eigen::MatrixXd& ResourceState::committed_mut(FineSlot t) {
  if (t < now_) throw Error("cannot lease a past fine slot");
  const auto idx = static_cast<std::size_t>(t - now_);
  while (committed_.size() <= idx) committed_.push_back(zero_);
  return committed_[idx];
}

Eigen::MatrixXd ResourceState::free_at(FineSlot t) const { return capacity_ - committed_at(t); }

double ResourceState::free(CloudId i, ResourceId r, FineSlot t) const {
  return capacity_(i, r) - committed_at(t)(i, r);
}

bool ResourceState::fits(const Eigen::MatrixXd& usage, FineSlot from, FineSlot to) const {
  for (FineSlot t = from; t < to; ++t)
    if (((capacity_ - committed_at(t) - usage).array() < -1e-9).any()) return false;
  return true;
}

void ResourceState::lease(RequestId request, const Eigen::MatrixXd& usage, FineSlot from,
                          FineSlot to) {
  for (FineSlot t = from; t < to; ++t) committed_mut(t) += usage;
  for (int i = 0; i < usage.rows(); ++i) {
    if (usage.row(i).maxCoeff() <= 0.0) continue;
    leases_.push_back({request, i, usage.row(i).transpose(), from, to});
  }
}

Eigen::MatrixXd ResourceState::advance(FineSlot now) {
  Eigen::MatrixXd released = Eigen::MatrixXd::Zero(capacity_.rows(), capacity_.cols());
  if (now < now_) throw Error("fine slots must advance monotonically");
  auto live = std::partition(leases_.begin(), leases_.end(),
                             [now](const Lease& l) { return l.expiry > now; });
  for (auto it = live; it != leases_.end(); ++it) released.row(it->cloud) += it->units.transpose();
  leases_.erase(live, leases_.end());
  while (now_ < now) {
    if (!committed_.empty()) committed_.pop_front();
    ++now_;
  }
  return released;
}

bool ResourceState::conserved(double tol) const {
  for (std::size_t idx = 0; idx < committed_.size(); ++idx) {
    const FineSlot t = now_ + static_cast<FineSlot>(idx);
    Eigen::MatrixXd from_leases = zero_;
    for (const auto& l : leases_)
      if (l.start <= t && t < l.expiry) from_leases.row(l.cloud) += l.units.transpose();
    if (((from_leases - committed_[idx]).array().abs() > tol).any()) return false;
  }
  return true;
}

}  // namespace edgeorch
