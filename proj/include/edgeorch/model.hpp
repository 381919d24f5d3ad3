#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace edgeorch {

using CloudId = int;
using VmTypeId = int;
using ResourceId = int;
using ObjectId = int;
using RequestId = std::uint64_t;
using FineSlot = std::int64_t;

using BoolArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Edge clouds and the latency between them. Clouds are numbered 0..n-1.
struct Topology {
  Eigen::MatrixXd latency;         // w(i, j), symmetric, zero diagonal
  Eigen::VectorXd origin_latency;  // latency from each cloud to the remote origin

  int num_clouds() const { return static_cast<int>(latency.rows()); }
  void validate() const;
};

// VM types, their resource recipes and revenue rates.
struct VmCatalog {
  Eigen::MatrixXd recipe;  // K x R, units of resource r per VM of type k
  Eigen::VectorXd price;   // K, revenue per VM per fine slot before scaling
  double price_scale = 1.0;
  std::vector<std::string> type_names;
  std::vector<std::string> resource_names;

  int num_types() const { return static_cast<int>(recipe.rows()); }
  int num_resources() const { return static_cast<int>(recipe.cols()); }
  double rate(VmTypeId k) const { return price_scale * price(k); }
  void validate() const;
};

enum class Visibility { shared, owned };

// Public objects always occupy ids [0, public_count()); private objects are
// appended behind them and can never be cached.
class DataCatalog {
 public:
  DataCatalog() = default;
  explicit DataCatalog(std::vector<double> public_sizes);

  ObjectId add_public(double size);
  ObjectId add_private(double size);

  int size() const { return static_cast<int>(sizes_.size()); }
  int public_count() const { return public_count_; }
  bool contains(ObjectId o) const { return o >= 0 && o < size(); }
  bool is_public(ObjectId o) const { return o < public_count_; }
  Visibility visibility(ObjectId o) const {
    return is_public(o) ? Visibility::shared : Visibility::owned;
  }
  double object_size(ObjectId o) const { return sizes_.at(static_cast<std::size_t>(o)); }
  const std::vector<double>& sizes() const { return sizes_; }
  // Total volume of public data.
  double public_volume() const;

 private:
  std::vector<double> sizes_;
  int public_count_ = 0;
};

// What a request needs of one VM type: how many VMs and which objects each
// of them processes.
struct VmDemand {
  int count = 0;
  std::vector<ObjectId> objects;
};

struct Request {
  RequestId id = 0;
  FineSlot arrival = 0;
  int duration = 1;
  CloudId ingress = 0;
  int service_id = 0;
  std::vector<VmDemand> demand;  // indexed by VM type

  int positive_types() const;
  int total_vms() const;
  FineSlot end() const { return arrival + duration; }
};

void validate_request(const Request& req, const VmCatalog& vms, const DataCatalog& data);

// One element of the configuration set: every VM of a given type is hosted
// by a single cloud.
struct AllocationConfig {
  RequestId request = 0;
  std::vector<CloudId> host;  // per VM type, -1 when the type is not requested
  Eigen::MatrixXd vm_counts;  // clouds x K, N(A, i, k)

  // clouds x R resource units this configuration consumes per fine slot.
  Eigen::MatrixXd usage(const VmCatalog& vms) const { return vm_counts * vms.recipe; }
  std::string describe() const;
};

// Cached public objects per cloud plus cache sizes.
struct PlacementProfile {
  BoolArray cached;            // clouds x public objects
  Eigen::VectorXd cache_size;  // per cloud, in size units

  PlacementProfile() = default;
  PlacementProfile(int clouds, int public_objects, Eigen::VectorXd sizes);

  static PlacementProfile empty_like(const PlacementProfile& other);

  int num_clouds() const { return static_cast<int>(cached.rows()); }
  int num_objects() const { return static_cast<int>(cached.cols()); }
  bool contains(CloudId i, ObjectId o) const {
    return o < cached.cols() && cached(i, o);
  }
  std::vector<ObjectId> objects_at(CloudId i) const;
  double used(CloudId i, const DataCatalog& data) const;
  bool feasible(const DataCatalog& data) const;
  bool operator==(const PlacementProfile& other) const;
};

struct Replica {
  enum class Kind { local, peer, origin, ingress } kind = Kind::origin;
  CloudId source = -1;  // -1 for the origin
  double latency = 0.0;
};

// Where a VM hosted at `cloud` fetches object `o` from. Private objects come
// from the ingress cloud of the owning request.
Replica nearest_replica(CloudId cloud, ObjectId o, const PlacementProfile& profile,
                        const Topology& topo, const DataCatalog& data, CloudId ingress);

// Precomputed w(i, j*) for every (cloud, public object) under one profile.
class ReplicaMap {
 public:
  ReplicaMap(const PlacementProfile& profile, const Topology& topo);

  double latency(CloudId i, ObjectId o) const { return latency_(i, o); }
  const Eigen::MatrixXd& matrix() const { return latency_; }

 private:
  Eigen::MatrixXd latency_;
};

std::vector<AllocationConfig> enumerate_configs(const Request& req, const Topology& topo);

// Transport cost of one VM of type k hosted at cloud i.
double vm_transport_cost(const Request& req, VmTypeId k, CloudId i, const ReplicaMap& replicas,
                         const Topology& topo, const DataCatalog& data);

// K x clouds table of vm_transport_cost; row k is zero for unrequested types.
Eigen::MatrixXd transport_table(const Request& req, const ReplicaMap& replicas,
                                const Topology& topo, const DataCatalog& data);

double request_transport_cost(const Request& req, const AllocationConfig& config,
                              const Eigen::MatrixXd& table);
double request_transport_cost(const Request& req, const AllocationConfig& config,
                              const ReplicaMap& replicas, const Topology& topo,
                              const DataCatalog& data);
double request_transport_cost(const Request& req, const AllocationConfig& config,
                              const PlacementProfile& profile, const Topology& topo,
                              const DataCatalog& data);

double request_revenue(const Request& req, const AllocationConfig& config, const VmCatalog& vms);

struct Lease {
  RequestId request = 0;
  CloudId cloud = 0;
  Eigen::VectorXd units;  // per resource
  FineSlot start = 0;
  FineSlot expiry = 0;    // first fine slot no longer covered
};

// Capacity bookkeeping per (cloud, resource, fine slot). Committed usage is
// kept for the current slot onwards; slots before `now` are dropped.
class ResourceState {
 public:
  ResourceState() = default;
  explicit ResourceState(Eigen::MatrixXd capacity);

  const Eigen::MatrixXd& capacity() const { return capacity_; }
  FineSlot now() const { return now_; }

  // Free units at slot t (may be negative only when leases bypassed the guard).
  Eigen::MatrixXd free_at(FineSlot t) const;
  double free(CloudId i, ResourceId r, FineSlot t) const;
  bool fits(const Eigen::MatrixXd& usage, FineSlot from, FineSlot to) const;

  void lease(RequestId request, const Eigen::MatrixXd& usage, FineSlot from, FineSlot to);
  // Drops leases with expiry <= now and forgets slots before now. Returns the
  // units released per (cloud, resource).
  Eigen::MatrixXd advance(FineSlot now);

  const std::vector<Lease>& leases() const { return leases_; }
  // Recomputes usage from the live leases and compares with the committed
  // table; false when the two disagree.
  bool conserved(double tol = 1e-9) const;

 private:
  const Eigen::MatrixXd& committed_at(FineSlot t) const;
  Eigen::MatrixXd& committed_mut(FineSlot t);

  Eigen::MatrixXd capacity_;
  FineSlot now_ = 0;
  std::deque<Eigen::MatrixXd> committed_;  // committed_[0] is slot now_
  std::vector<Lease> leases_;
  Eigen::MatrixXd zero_;
};

}  // namespace edgeorch
