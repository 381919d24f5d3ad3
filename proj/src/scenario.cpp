#include "edgeorch/scenario.hpp"

#include <cmath>
#include <fstream>
#include <random>

namespace edgeorch {
namespace {

using nlohmann::json;

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw Error("ragged matrix in scenario");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

json to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

json to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace

void Scenario::validate() const {
  topology.validate();
  vms.validate();
  if (capacity.rows() != num_clouds() || capacity.cols() != vms.num_resources())
    throw Error("capacity must be clouds x resources");
  if ((capacity.array() < 0.0).any()) throw Error("negative capacity");
  if (cache_size.size() != num_clouds()) throw Error("one cache size per cloud required");
  if ((cache_size.array() < 0.0).any()) throw Error("negative cache size");
  if (control.V < 0.0) throw Error("V must be non-negative");
  if (control.budget < 0.0) throw Error("budget must be non-negative");
  if (control.slots_per_coarse < 1) throw Error("slots_per_coarse must be positive");
  if (control.dual_scale && !(*control.dual_scale > 0.0)) throw Error("dual_scale must be positive");
}

void Scenario::set_cache_ratio(double ratio) {
  if (ratio < 0.0) throw Error("cache ratio must be non-negative");
  cache_size = Eigen::VectorXd::Constant(num_clouds(), ratio * data.public_volume() / num_clouds());
}

Scenario scenario_from_json(const json& j) {
  Scenario s;
  s.name = j.value("name", "scenario");
  s.topology.latency = matrix_from_json(j.at("latency"));
  s.topology.origin_latency = vector_from_json(j.at("origin_latency"));
  const int n = s.topology.num_clouds();

  const auto& types = j.at("vm_types");
  s.vms.resource_names = j.at("resources").get<std::vector<std::string>>();
  const auto R = static_cast<Eigen::Index>(s.vms.resource_names.size());
  s.vms.recipe.resize(static_cast<Eigen::Index>(types.size()), R);
  s.vms.price.resize(static_cast<Eigen::Index>(types.size()));
  for (std::size_t k = 0; k < types.size(); ++k) {
    const auto& t = types[k];
    s.vms.type_names.push_back(t.value("name", "type" + std::to_string(k)));
    const auto recipe = t.at("recipe").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(recipe.size()) != R) throw Error("recipe length must match resources");
    for (Eigen::Index r = 0; r < R; ++r)
      s.vms.recipe(static_cast<Eigen::Index>(k), r) = recipe[static_cast<std::size_t>(r)];
    s.vms.price(static_cast<Eigen::Index>(k)) = t.at("price").get<double>();
  }
  s.vms.price_scale = j.value("price_scale", 1.0);

  const auto& cap = j.at("capacity");
  if (cap.is_number()) {
    s.capacity = Eigen::MatrixXd::Constant(n, R, cap.get<double>());
  } else {
    s.capacity = matrix_from_json(cap);
  }

  const auto& objects = j.at("objects");
  if (objects.is_object()) {
    const int count = objects.at("count").get<int>();
    const double size = objects.value("size", 1.0);
    s.data = DataCatalog(std::vector<double>(static_cast<std::size_t>(count), size));
  } else {
    s.data = DataCatalog(objects.get<std::vector<double>>());
  }

  if (j.contains("cache_size")) {
    const auto& cs = j.at("cache_size");
    s.cache_size = cs.is_number() ? Eigen::VectorXd::Constant(n, cs.get<double>()) : vector_from_json(cs);
  } else {
    s.set_cache_ratio(j.value("cache_ratio", 0.4));
  }

  const json control = j.value("control", json::object());
  s.control.V = control.value("V", 1.0);
  s.control.budget = control.value("budget", 0.0);
  if (control.contains("c_max")) s.control.c_max = control.at("c_max").get<double>();
  s.control.slots_per_coarse = control.value("slots_per_coarse", 50);
  if (control.contains("dual_scale")) s.control.dual_scale = control.at("dual_scale").get<double>();
  s.control.strict_scoring = control.value("strict_scoring", false);

  s.validate();
  return s;
}

json scenario_to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["latency"] = to_json(s.topology.latency);
  j["origin_latency"] = to_json(s.topology.origin_latency);
  j["resources"] = s.vms.resource_names;
  json types = json::array();
  for (int k = 0; k < s.vms.num_types(); ++k) {
    std::vector<double> recipe;
    for (int r = 0; r < s.vms.num_resources(); ++r) recipe.push_back(s.vms.recipe(k, r));
    types.push_back({{"name", s.vms.type_names.at(static_cast<std::size_t>(k))},
                     {"recipe", recipe},
                     {"price", s.vms.price(k)}});
  }
  j["vm_types"] = types;
  j["price_scale"] = s.vms.price_scale;
  j["capacity"] = to_json(s.capacity);
  std::vector<double> sizes(s.data.sizes().begin(), s.data.sizes().begin() + s.data.public_count());
  j["objects"] = sizes;
  j["cache_size"] = to_json(s.cache_size);
  json control;
  control["V"] = s.control.V;
  control["budget"] = s.control.budget;
  if (s.control.c_max) control["c_max"] = *s.control.c_max;
  control["slots_per_coarse"] = s.control.slots_per_coarse;
  if (s.control.dual_scale) control["dual_scale"] = *s.control.dual_scale;
  control["strict_scoring"] = s.control.strict_scoring;
  j["control"] = control;
  return j;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario " + path.string());
  try {
    return scenario_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw Error("scenario " + path.string() + ": " + e.what());
  }
}

ScenarioShape desk_shape() {
  ScenarioShape s;
  s.control.V = 1e5;
  s.control.budget = 40000.0;
  s.control.slots_per_coarse = 50;
  return s;
}

ScenarioShape full_shape() {
  ScenarioShape s;
  s.capacity = 5000.0;
  s.control.V = 1e5;
  s.control.budget = 35000.0;
  s.control.slots_per_coarse = 500;
  return s;
}

Scenario make_scenario(const ScenarioShape& shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> peer(shape.peer_lo, shape.peer_hi);
  std::uniform_real_distribution<double> origin(shape.origin_lo, shape.origin_hi);

  Scenario s;
  s.name = "generated";
  const int n = shape.clouds;
  s.topology.latency = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      // whole milliseconds keep the frozen file readable
      const double w = std::round(peer(rng));
      s.topology.latency(i, j) = s.topology.latency(j, i) = w;
    }
  s.topology.origin_latency.resize(n);
  for (int i = 0; i < n; ++i) s.topology.origin_latency(i) = std::round(origin(rng));

  s.vms.type_names = {"type1", "type2"};
  s.vms.resource_names = {"r0", "r1", "r2"};
  s.vms.recipe.resize(2, 3);
  s.vms.recipe << 10, 20, 30,
                  30, 20, 10;
  s.vms.price.resize(2);
  s.vms.price << 10, 20;

  s.capacity = Eigen::MatrixXd::Constant(n, 3, shape.capacity);
  s.data = DataCatalog(std::vector<double>(static_cast<std::size_t>(shape.public_objects), 1.0));
  s.set_cache_ratio(shape.cache_ratio);
  s.control = shape.control;
  s.validate();
  return s;
}

}  // namespace edgeorch
