// Acceptance checks: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>
#include <fmt/format.h>

#include "edgeorch/experiment.hpp"
#include "edgeorch/report.hpp"
#include "edgeorch/simulator.hpp"
#include "edgeorch/verify.hpp"

using namespace edgeorch;
namespace fs = std::filesystem;

namespace {

const fs::path kExperiments = fs::path(EDGEORCH_SOURCE_DIR) / "experiments";
const double kRatio = std::numbers::e / (std::numbers::e - 1.0);

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

int failures = 0;
void report(int id, const std::string& name, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::cout << fmt::format("{} {:>2} {}: {}\n", pass ? "PASS" : "FAIL", id, name, detail);
  std::cout.flush();
}

// One cell of a bundled spec, built the same way the CLI builds it.
struct Inputs {
  Scenario scenario;
  WorkloadConfig workload;
  std::int64_t horizon;
};

Inputs bundled(const std::string& name) {
  const ExperimentSpec spec = load_experiment(kExperiments / (name + ".json"));
  return {load_scenario(spec.scenario), load_workload(spec.workload), spec.horizon};
}

struct Run {
  Scenario scenario;
  Workload workload;
  RunReport report;
};

Run run_cell(const Inputs& in, Policy p, std::uint64_t seed, RunOptions opt = {}) {
  Run r{in.scenario, {}, {}};
  WorkloadConfig wc = in.workload;
  wc.seed = seed;
  r.workload = generate_workload(wc, r.scenario.data, r.scenario.vms.num_types(),
                                 r.scenario.num_clouds(), in.horizon * r.scenario.control.slots_per_coarse);
  opt.error_mean = wc.error_mean;
  opt.perturb_seed = seed;
  r.report = run_policy(p, r.scenario, r.workload, in.horizon, opt);
  return r;
}

double dual_scale_of(const Scenario& s) {
  return s.control.dual_scale.value_or(default_dual_scale(s));
}

// 1 -------------------------------------------------------------------------
void increment_ratio() {
  const auto t0 = Clock::now();
  const Inputs in = bundled("exp1_dynamics");
  RunOptions opt;
  opt.record_decisions = true;
  const Run r = run_cell(in, Policy::proposed, 1, opt);
  const double secs = since(t0);
  const double eta = dual_scale_of(r.scenario);
  std::map<RequestId, const Request*> by_id;
  for (const auto& q : r.workload.requests) by_id[q.id] = &q;

  std::size_t accepted = 0;
  double worst = 0.0;
  for (const auto& d : r.report.decisions) {
    if (!d.accepted) continue;
    ++accepted;
    // primal increase recomputed from the per-cloud scores
    const double dP = by_id.at(d.request)->duration * eta * d.per_cloud.sum();
    worst = std::max(worst, std::abs(d.delta_dual / dP - kRatio) / kRatio);
  }
  report(1, "primal/dual increment ratio", worst <= 1e-9 && accepted >= 500 && secs < 30.0,
         fmt::format("{} accepts, max relative deviation {:.2e}, {:.2f} s", accepted, worst, secs));
}

// 2 -------------------------------------------------------------------------
void dual_feasibility() {
  const Inputs in = bundled("exp1_dynamics");
  const Scenario& sc = in.scenario;
  const int S = sc.control.slots_per_coarse;
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<FineSlot> pick(0, in.horizon * S - 1);
  std::set<FineSlot> chosen;
  while (chosen.size() < 100) chosen.insert(pick(rng));

  std::map<FineSlot, DualState> snaps;
  RunOptions opt;
  opt.record_placements = true;
  opt.record_window = true;
  std::size_t internal = 0;
  opt.probe = [&](FineSlot t, const Allocator& a) {
    if (!chosen.count(t)) return;
    snaps.emplace(t, a.duals());
    internal += a.dual_violations();
  };
  const Run r = run_cell(in, Policy::proposed, 3, opt);
  const double eta = dual_scale_of(sc);

  std::size_t requests = 0, configs = 0, violations = 0;
  for (const auto& [t, dual] : snaps) {
    const std::int64_t T = t / S;
    const double Q = T == 0 ? 0.0 : r.report.slots[static_cast<std::size_t>(T - 1)].Q;
    const double weight = sc.control.strict_scoring ? 1.0 : std::max(Q, 1.0);
    PlacementProfile profile = sc.empty_placement();
    if (T > 0)
      for (std::size_t i = 0; i < r.report.placements[static_cast<std::size_t>(T - 1)].objects.size(); ++i)
        for (ObjectId o : r.report.placements[static_cast<std::size_t>(T - 1)].objects[i])
          profile.cached(static_cast<Eigen::Index>(i), o) = true;
    for (const auto& req : r.workload.requests) {
      if (req.arrival != t) continue;
      ++requests;
      const auto it = dual.alpha.find(req.id);
      const double alpha = it == dual.alpha.end() ? 0.0 : it->second;
      if (alpha < 0.0) ++violations;
      for (const auto& c : enumerate_configs(req, sc.topology)) {
        // configurations the hard-capacity guard filtered out never entered the choice
        const auto rev = adjusted_revenue(req, c, profile, sc.topology, r.workload.data, sc.vms,
                                          sc.control.V, weight);
        const Eigen::MatrixXd usage = c.usage(sc.vms);
        const double rhs = req.duration * eta * rev.total - dual.charge(usage, req.arrival, req.end());
        ++configs;
        if (alpha < rhs - 1e-9 * std::max(1.0, std::abs(rhs))) {
          // tolerated only if the config could not have fit at that time
          bool fits = true;
          for (FineSlot s = req.arrival; s < req.end() && fits; ++s)
            fits = ((dual.baseline_at(s) - usage).array() >= -1e-9).all();
          if (fits) ++violations;
        }
      }
    }
    for (FineSlot s = dual.window_start(); s < dual.window_end(); ++s)
      if ((dual.beta_at(s).array() < 0.0).any()) ++violations;
  }
  report(2, "dual feasibility on sampled windows", snaps.size() == 100 && violations == 0 && internal == 0,
         fmt::format("{} windows, {} requests, {} configurations replayed, {} violations "
                     "(allocator replay {})",
                     snaps.size(), requests, configs, violations, internal));
}

// 3 -------------------------------------------------------------------------
void overshoot() {
  const Scenario sc = stressed_scenario();
  const std::int64_t horizon = 20;
  std::size_t violations = 0, warnings = 0;
  double worst_gap = -std::numeric_limits<double>::infinity(), largest = 0.0;
  for (std::uint64_t k = 0; k < 50; ++k) {
    const Workload wl = generate_workload(stressed_workload(100 + k), sc.data, sc.vms.num_types(),
                                          sc.num_clouds(), horizon * sc.control.slots_per_coarse);
    RunOptions opt;
    opt.capacity_guard = false;
    opt.record_decisions = true;
    double overshoot = 0.0;
    opt.probe = [&](FineSlot t, const Allocator& a) {
      const auto& d = a.duals();
      for (FineSlot s = t; s < d.window_end(); ++s)
        overshoot = std::max(overshoot, -a.resources().free_at(s).minCoeff());
    };
    const RunReport r = run_policy(Policy::proposed, sc, wl, horizon, opt);
    double bound = 0.0;
    for (const auto& dec : r.decisions)
      if (dec.accepted) bound = std::max(bound, dec.config->usage(sc.vms).maxCoeff());
    warnings += r.allocator.scaling_warnings;
    if (overshoot > bound + 1e-9) ++violations;
    worst_gap = std::max(worst_gap, overshoot - bound);
    largest = std::max(largest, overshoot);
  }
  report(3, "bounded capacity overshoot without the guard", violations == 0 && warnings == 0,
         fmt::format("50 runs, {} violations, largest overshoot {:.1f}, worst overshoot minus "
                     "bound {:.1f}, {} price-scaling warnings",
                     violations, largest, worst_gap, warnings));
}

// 4 -------------------------------------------------------------------------
void greedy_ratio() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(77);
  std::size_t bad = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 200; ++k) {
    const PlacementInstance in = random_placement_instance(rng);
    const auto g = greedy_place(in.demand, in.cache_size, in.topo, in.data);
    // optimum by scanning every feasible profile
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : enumerate_profiles(in.cache_size, in.data))
      best = std::min(best, placement_cost(p, in.demand, in.topo));
    const double empty = placement_cost(PlacementProfile::empty_like(g.profile), in.demand, in.topo);
    const double sg = empty - g.objective, sb = empty - best;
    if (!g.profile.feasible(in.data) || sg < 0.5 * sb - 1e-9) ++bad;
    if (sb > 0.0) worst = std::min(worst, sg / sb);
  }
  const double secs = since(t0);
  report(4, "greedy placement keeps half the optimal savings", bad == 0 && secs < 60.0,
         fmt::format("200 instances, {} failures, worst ratio {:.3f}, {:.2f} s", bad, worst, secs));
}

// 5, 6 ----------------------------------------------------------------------
void stability_and_ordering() {
  const Inputs exp1 = bundled("exp1_dynamics");
  const Inputs exp2 = bundled("exp2_popularity");
  const double budget = exp1.scenario.control.budget;

  bool stable = true;
  double worst_c = 0.0, worst_q = 0.0;
  std::string detail;
  bool ordered = true;
  for (const auto* in : {&exp1, &exp2}) {
    int wins = 0;
    double sum_p = 0, sum_c = 0, sum_n = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const RunReport p = run_cell(*in, Policy::proposed, seed).report;
      const RunReport c = run_cell(*in, Policy::myopic_coop, seed).report;
      const RunReport n = run_cell(*in, Policy::myopic_nocoop, seed).report;
      if (p.avg_R() >= c.avg_R() && p.avg_R() >= n.avg_R()) ++wins;
      sum_p += p.avg_R();
      sum_c += c.avg_R();
      sum_n += n.avg_R();
      if (in == &exp1) {
        const double q_rate = p.final_Q() / static_cast<double>(in->horizon);
        worst_c = std::max(worst_c, p.avg_C() / budget);
        worst_q = std::max(worst_q, q_rate / budget);
        stable = stable && p.avg_C() <= 1.05 * budget && q_rate <= 0.05 * budget;
      }
    }
    ordered = ordered && wins >= 9;
    detail += fmt::format("{}{}: {}/10 seeds, mean avg R {:.0f} vs {:.0f} / {:.0f}",
                          detail.empty() ? "" : "; ", in == &exp1 ? "dynamics" : "popularity",
                          wins, sum_p / 10, sum_c / 10, sum_n / 10);
  }
  report(5, "budget compliance and queue stability", stable,
         fmt::format("10 seeds, worst avg C / budget {:.4f}, worst Q(T)/T / budget {:.4f}", worst_c,
                     worst_q));
  report(6, "proposed beats both myopic baselines", ordered, detail);
}

// 7 -------------------------------------------------------------------------
void sweeps() {
  bool pass = true;
  std::string detail;
  auto check = [&](const Inputs& base, const std::vector<double>& axis, bool cache, const char* label) {
    int monotone = 0;
    std::vector<double> means(axis.size(), 0.0);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      double prev = -1.0;
      bool ok = true;
      for (std::size_t a = 0; a < axis.size(); ++a) {
        Inputs in = base;
        if (cache) in.scenario.set_cache_ratio(axis[a]);
        else in.workload.private_ratio = axis[a];
        const double R = run_cell(in, Policy::proposed, seed).report.avg_R();
        means[a] += R / 5;
        ok = ok && R >= prev;
        prev = R;
      }
      if (ok) ++monotone;
    }
    pass = pass && monotone == 5;
    detail += fmt::format("{}{} {}/5 seeds monotone, means", detail.empty() ? "" : "; ", label, monotone);
    for (double m : means) detail += fmt::format(" {:.0f}", m);
  };
  check(bundled("exp3_cache"), {0.1, 0.5, 0.9}, true, "cache 0.1/0.5/0.9");
  check(bundled("exp4_private"), {3.5, 2.0, 0.5}, false, "private 3.5/2.0/0.5");
  report(7, "revenue grows with cacheability", pass, detail);
}

// 8 -------------------------------------------------------------------------
void v_tradeoff() {
  Inputs base = bundled("exp6_v_budget");
  int ok = 0;
  double c_lo = 0, c_hi = 0, a_lo = 0, a_hi = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Inputs lo = base, hi = base;
    lo.scenario.control.V = 6e4;
    hi.scenario.control.V = 1.8e5;
    const RunReport l = run_cell(lo, Policy::proposed, seed).report;
    const RunReport h = run_cell(hi, Policy::proposed, seed).report;
    if (h.avg_C() >= l.avg_C() && h.acceptance_rate() >= l.acceptance_rate()) ++ok;
    c_lo += l.avg_C() / 5;
    c_hi += h.avg_C() / 5;
    a_lo += l.acceptance_rate() / 5;
    a_hi += h.acceptance_rate() / 5;
  }
  report(8, "cost and acceptance rise with V", ok == 5,
         fmt::format("{}/5 seeds; mean avg C {:.0f} -> {:.0f}, acceptance {:.4f} -> {:.4f} "
                     "(V 6e4 -> 1.8e5, budget {:.0f})",
                     ok, c_lo, c_hi, a_lo, a_hi, base.scenario.control.budget));
}

// 9 -------------------------------------------------------------------------
void lookahead_bound() {
  const auto t0 = Clock::now();
  std::size_t bad = 0;
  double least = std::numeric_limits<double>::infinity();
  for (std::uint64_t k = 0; k < 20; ++k) {
    const TinyInstance t = tiny_lookahead_instance(500 + k);
    const std::int64_t horizon = static_cast<std::int64_t>(t.Z) * t.N;
    const RunReport r = run_policy(Policy::proposed, t.scenario, t.workload, horizon);
    double lhs = 0.0;
    for (const auto& s : r.slots) lhs += s.R;
    lhs /= static_cast<double>(horizon);
    double oracle = 0.0;
    for (int z = 0; z < t.Z; ++z) oracle += lookahead_oracle(t.scenario, t.workload, t.N, z);
    oracle /= t.Z;
    const double c_max = t.scenario.control.effective_c_max(), budget = t.scenario.control.budget;
    const double B = std::max(c_max * c_max, budget * budget) / 2.0;
    const double rhs = (1.0 - 1.0 / std::numbers::e) * (oracle - B * t.N / t.scenario.control.V);
    if (lhs < rhs) ++bad;
    least = std::min(least, lhs - rhs);
  }
  const double secs = since(t0);
  report(9, "revenue against the look-ahead optimum", bad == 0 && secs < 300.0,
         fmt::format("20 instances, {} failures, smallest margin {:.3f}, {:.2f} s", bad, least, secs));
}

// 10 ------------------------------------------------------------------------
std::map<std::string, std::string> csv_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), root).string()] = ss.str();
  }
  return out;
}

void determinism() {
  const fs::path tmp = fs::temp_directory_path() / "edgeorch_acceptance";
  fs::remove_all(tmp);
  bool same = true;
  std::size_t files = 0;
  for (const char* name : {"exp2_popularity", "exp5_lookahead"}) {
    const ExperimentSpec spec = load_experiment(kExperiments / (std::string(name) + ".json"));
    std::stringstream log;
    RunOverrides o;
    o.seed = 4;
    o.horizon = std::min<std::int64_t>(spec.horizon, 30);
    o.output = tmp / "a";
    run_experiment(spec, o, log);
    o.output = tmp / "b";
    o.jobs = 1;
    run_experiment(spec, o, log);
    const auto a = csv_tree(tmp / "a" / name), b = csv_tree(tmp / "b" / name);
    same = same && a == b && !a.empty();
    files += a.size();
  }
  fs::remove_all(tmp);
  report(10, "byte-identical reruns", same, fmt::format("{} CSV files compared", files));
}

// 11 ------------------------------------------------------------------------
double chi_square_p(const std::vector<double>& observed, const std::vector<double>& expected) {
  double stat = 0.0;
  for (std::size_t k = 0; k < observed.size(); ++k)
    stat += (observed[k] - expected[k]) * (observed[k] - expected[k]) / expected[k];
  boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

void workload_statistics() {
  const int n_objects = 20;
  const DataCatalog pub(std::vector<double>(n_objects, 1.0));
  std::string detail;
  bool pass = true;

  // Zipf exponent 0: one object per group, one VM per request
  {
    WorkloadConfig w;
    w.seed = 11;
    w.lambda_lo = w.lambda_hi = 10.0;
    w.vms_lo = w.vms_hi = 1;
    w.objects_lo = w.objects_hi = 1;
    w.zipf_exponent = 0.0;
    const Workload wl = generate_workload(w, pub, 2, 5, 10200);
    std::vector<double> counts(n_objects, 0.0);
    double draws = 0.0;
    for (const auto& r : wl.requests)
      for (const auto& g : r.demand)
        for (ObjectId o : g.objects)
          if (wl.data.is_public(o)) {
            counts[static_cast<std::size_t>(o)] += 1;
            draws += 1;
          }
    const double p = 1.0 / n_objects, sigma = std::sqrt(draws * p * (1 - p));
    double worst = 0.0;
    for (double c : counts) worst = std::max(worst, std::abs(c - draws * p) / sigma);
    pass = pass && draws >= 1e5 && worst <= 3.0;
    detail += fmt::format("Zipf-0 {:.0f} draws, max deviation {:.2f} sigma", draws, worst);
  }
  // Poisson arrivals at a fixed rate
  {
    WorkloadConfig w;
    w.seed = 12;
    w.lambda_lo = w.lambda_hi = 4.0;
    const std::int64_t slots = 100000;
    const Workload wl = generate_workload(w, pub, 2, 5, slots);
    const double rate = static_cast<double>(wl.requests.size()) / slots;
    const double z = (rate - 4.0) / std::sqrt(4.0 / slots);
    // dispersion: per-slot variance should match the mean
    std::vector<double> per_slot(static_cast<std::size_t>(slots), 0.0);
    for (const auto& r : wl.requests) per_slot[static_cast<std::size_t>(r.arrival)] += 1;
    double var = 0.0;
    for (double c : per_slot) var += (c - rate) * (c - rate);
    var /= static_cast<double>(slots - 1);
    pass = pass && std::abs(z) <= 3.0 && std::abs(var / rate - 1.0) < 0.03;
    detail += fmt::format("; rate {:.4f} (z {:.2f}), variance/mean {:.4f}", rate, z, var / rate);
  }
  // lifetimes uniform on [1, 5]
  {
    WorkloadConfig w;
    w.seed = 13;
    w.lambda_lo = w.lambda_hi = 10.0;
    const Workload wl = generate_workload(w, pub, 2, 5, 10200);
    std::vector<double> counts(5, 0.0);
    for (const auto& r : wl.requests) counts[static_cast<std::size_t>(r.duration - 1)] += 1;
    const double n = static_cast<double>(wl.requests.size());
    const double p = chi_square_p(counts, std::vector<double>(5, n / 5));
    pass = pass && n >= 1e5 && p > 0.01;
    detail += fmt::format("; lifetimes over {:.0f} requests, chi-square p {:.3f}", n, p);
  }
  report(11, "workload generator statistics", pass, detail);
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  try {
    increment_ratio();
    dual_feasibility();
    overshoot();
    greedy_ratio();
    stability_and_ordering();
    sweeps();
    v_tradeoff();
    lookahead_bound();
    determinism();
    workload_statistics();
  } catch (const std::exception& e) {
    std::cout << "FAIL acceptance aborted: " << e.what() << '\n';
    return 1;
  }
  std::cout << fmt::format("{} of 11 criteria failed, {:.1f} s total\n", failures, since(t0));
  return failures == 0 ? 0 : 1;
}
