#include "edgeorch/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <optional>

namespace edgeorch {

void WorkloadConfig::validate(int num_types, int public_objects) const {
  if (!(lambda_lo >= 0.0) || lambda_hi < lambda_lo) throw Error("arrival rate range is invalid");
  if (regime_length < 1) throw Error("regime length must be positive");
  if (!vm_mix.empty()) {
    if (static_cast<int>(vm_mix.size()) != num_types) throw Error("vm_mix needs one entry per VM type");
    double sum = 0.0;
    for (double p : vm_mix) {
      if (p < 0.0) throw Error("vm_mix entries must be non-negative");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error("vm_mix must sum to 1");
  }
  if (vms_lo < 1 || vms_hi < vms_lo) throw Error("VM count range is invalid");
  if (lifetime_lo < 1 || lifetime_hi < lifetime_lo) throw Error("lifetime range is invalid");
  if (zipf_exponent < 0.0) throw Error("Zipf exponent must be non-negative");
  if (objects_lo < 0 || objects_hi < objects_lo) throw Error("objects-per-VM range is invalid");
  if (objects_hi > public_objects) throw Error("more objects per VM than public objects");
  if (private_ratio < 0.0) throw Error("private ratio must be non-negative");
  if (error_mean < 0.0) throw Error("error mean must be non-negative");
  if (frame_length < 0 || frame_max < 0) throw Error("frame cap must be non-negative");
}

WorkloadConfig desk_workload(std::uint64_t seed) {
  WorkloadConfig w;
  w.seed = seed;
  return w;
}

WorkloadConfig full_workload(std::uint64_t seed) {
  WorkloadConfig w;
  w.seed = seed;
  w.lambda_hi = 50.0;
  return w;
}

namespace {

template <class T>
void read_range(const nlohmann::json& j, const char* key, T& lo, T& hi) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (v.is_array()) {
    if (v.size() != 2) throw Error(std::string(key) + " must be [lo, hi]");
    lo = v[0].get<T>();
    hi = v[1].get<T>();
  } else {
    lo = hi = v.get<T>();
  }
}

}  // namespace

WorkloadConfig workload_from_json(const nlohmann::json& j) {
  try {
    WorkloadConfig w;
    w.seed = j.value("seed", w.seed);
    read_range(j, "lambda", w.lambda_lo, w.lambda_hi);
    w.regime_length = j.value("regime_length", w.regime_length);
    if (j.contains("vm_mix")) w.vm_mix = j.at("vm_mix").get<std::vector<double>>();
    read_range(j, "vms_per_request", w.vms_lo, w.vms_hi);
    read_range(j, "lifetime", w.lifetime_lo, w.lifetime_hi);
    w.zipf_exponent = j.value("zipf_exponent", w.zipf_exponent);
    read_range(j, "objects_per_vm", w.objects_lo, w.objects_hi);
    w.private_ratio = j.value("private_ratio", w.private_ratio);
    w.error_mean = j.value("error_mean", w.error_mean);
    if (j.contains("frame_cap")) {
      w.frame_length = j.at("frame_cap").at("length").get<int>();
      w.frame_max = j.at("frame_cap").at("max").get<int>();
    }
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("workload: ") + e.what());
  }
}

nlohmann::json workload_to_json(const WorkloadConfig& w) {
  nlohmann::json j;
  j["seed"] = w.seed;
  j["lambda"] = {w.lambda_lo, w.lambda_hi};
  j["regime_length"] = w.regime_length;
  if (!w.vm_mix.empty()) j["vm_mix"] = w.vm_mix;
  j["vms_per_request"] = {w.vms_lo, w.vms_hi};
  j["lifetime"] = {w.lifetime_lo, w.lifetime_hi};
  j["zipf_exponent"] = w.zipf_exponent;
  j["objects_per_vm"] = {w.objects_lo, w.objects_hi};
  j["private_ratio"] = w.private_ratio;
  j["error_mean"] = w.error_mean;
  if (w.frame_length > 0) j["frame_cap"] = {{"length", w.frame_length}, {"max", w.frame_max}};
  return j;
}

WorkloadConfig load_workload(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open workload " + path.string());
  try {
    return workload_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

ZipfSampler::ZipfSampler(int n, double exponent) {
  if (n < 1) throw Error("Zipf sampler needs at least one rank");
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) w[static_cast<std::size_t>(r)] = std::pow(r + 1.0, -exponent);
  dist_ = std::discrete_distribution<int>(w.begin(), w.end());
}

Workload generate_workload(const WorkloadConfig& cfg, const DataCatalog& public_data,
                           int num_types, int num_clouds, std::int64_t fine_slots) {
  if (public_data.size() != public_data.public_count())
    throw Error("workload generation starts from a public-only catalog");
  cfg.validate(num_types, public_data.public_count());
  if (num_clouds < 1) throw Error("no clouds");

  std::mt19937_64 rng(cfg.seed);
  Workload out;
  out.data = public_data;
  out.fine_slots = fine_slots;

  std::vector<double> mix = cfg.vm_mix;
  if (mix.empty()) mix.assign(static_cast<std::size_t>(num_types), 1.0);
  std::discrete_distribution<int> pick_type(mix.begin(), mix.end());
  std::uniform_int_distribution<int> pick_vms(cfg.vms_lo, cfg.vms_hi);
  std::uniform_int_distribution<int> pick_life(cfg.lifetime_lo, cfg.lifetime_hi);
  std::uniform_int_distribution<int> pick_objects(cfg.objects_lo, cfg.objects_hi);
  std::uniform_int_distribution<int> pick_cloud(0, num_clouds - 1);
  std::uniform_int_distribution<int> pick_service(0, 1 << 16);
  std::uniform_real_distribution<double> pick_rate(cfg.lambda_lo, cfg.lambda_hi);
  std::optional<ZipfSampler> zipf;
  if (public_data.public_count() > 0) zipf.emplace(public_data.public_count(), cfg.zipf_exponent);

  double lambda = 0.0;
  RequestId next_id = 0;
  int in_frame = 0;
  for (FineSlot t = 0; t < fine_slots; ++t) {
    if (t % cfg.regime_length == 0) lambda = pick_rate(rng);
    if (cfg.frame_length > 0 && t % cfg.frame_length == 0) in_frame = 0;
    int arrivals = 0;
    if (lambda > 0.0) arrivals = std::poisson_distribution<int>(lambda)(rng);
    if (cfg.frame_length > 0) {
      arrivals = std::min(arrivals, cfg.frame_max - in_frame);
      in_frame += arrivals;
    }
    for (int a = 0; a < arrivals; ++a) {
      Request req;
      req.id = next_id++;
      req.arrival = t;
      req.duration = pick_life(rng);
      req.ingress = pick_cloud(rng);
      req.service_id = pick_service(rng);
      req.demand.assign(static_cast<std::size_t>(num_types), VmDemand{});
      const int vms = pick_vms(rng);
      for (int v = 0; v < vms; ++v) ++req.demand[static_cast<std::size_t>(pick_type(rng))].count;
      for (auto& group : req.demand) {
        if (group.count == 0) continue;
        const int want = zipf ? pick_objects(rng) : 0;
        double volume = 0.0;
        while (static_cast<int>(group.objects.size()) < want) {
          const ObjectId o = (*zipf)(rng);
          if (std::find(group.objects.begin(), group.objects.end(), o) != group.objects.end())
            continue;
          group.objects.push_back(o);
          volume += public_data.object_size(o);
        }
        std::sort(group.objects.begin(), group.objects.end());
        if (cfg.private_ratio > 0.0 && volume > 0.0)
          group.objects.push_back(out.data.add_private(cfg.private_ratio * volume));
      }
      out.requests.push_back(std::move(req));
    }
  }
  out.hash = stream_hash(out.requests, out.data);
  return out;
}

std::uint64_t stream_hash(const std::vector<Request>& requests, const DataCatalog& data) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  auto mix_double = [&mix](double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof bits);
    mix(bits);
  };
  for (const auto& r : requests) {
    mix(r.id);
    mix(static_cast<std::uint64_t>(r.arrival));
    mix(static_cast<std::uint64_t>(r.duration));
    mix(static_cast<std::uint64_t>(r.ingress));
    mix(static_cast<std::uint64_t>(r.service_id));
    for (const auto& g : r.demand) {
      mix(static_cast<std::uint64_t>(g.count));
      mix(g.objects.size());
      for (ObjectId o : g.objects) mix(static_cast<std::uint64_t>(o));
    }
  }
  mix(static_cast<std::uint64_t>(data.public_count()));
  for (double s : data.sizes()) mix_double(s);
  return h;
}

Perturbation perturb_demand_at(const DemandMatrix& demand, double epsilon, std::mt19937_64& rng) {
  Perturbation out;
  out.demand = demand;
  out.epsilon = std::clamp(epsilon, 0.0, 1.0);
  const Eigen::VectorXd traffic = demand.demand.colwise().sum().transpose();
  const double total = traffic.sum();
  if (total <= 0.0) return out;

  std::vector<ObjectId> order(static_cast<std::size_t>(traffic.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](ObjectId a, ObjectId b) { return traffic(a) > traffic(b); });
  double covered = 0.0;
  for (ObjectId o : order) {
    if (covered >= 0.5 * total) break;
    out.top.push_back(o);
    covered += traffic(o);
  }
  std::sort(out.top.begin(), out.top.end());

  std::bernoulli_distribution drop(out.epsilon);
  for (ObjectId o : out.top) {
    if (!drop(rng)) continue;
    out.demand.demand.col(o).setZero();
    out.zeroed.push_back(o);
  }
  return out;
}

Perturbation perturb_demand(const DemandMatrix& demand, double error_mean, std::mt19937_64& rng) {
  if (error_mean < 0.0) throw Error("error mean must be non-negative");
  if (error_mean == 0.0) return perturb_demand_at(demand, 0.0, rng);
  const int tenths = std::poisson_distribution<int>(10.0 * error_mean)(rng);
  return perturb_demand_at(demand, tenths / 10.0, rng);
}

}  // namespace edgeorch
