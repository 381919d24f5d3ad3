#include "edgeorch/experiment.hpp"

#include <atomic>
#include <fstream>
#include <map>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "edgeorch/report.hpp"

namespace edgeorch {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<double> sweep(const json& sweeps, const char* key) {
  if (!sweeps.contains(key)) return {};
  const auto v = sweeps.at(key).get<std::vector<double>>();
  if (v.empty()) throw SpecError(fmt::format("sweep '{}' must not be empty", key));
  return v;
}

fs::path existing(const fs::path& base, const std::string& p, const char* what) {
  fs::path full = fs::path(p).is_absolute() ? fs::path(p) : base / p;
  if (!fs::exists(full)) throw SpecError(fmt::format("{} '{}' does not exist", what, full.string()));
  return full;
}

}  // namespace

ExperimentSpec experiment_from_json(const json& j, const fs::path& base) {
  try {
    ExperimentSpec s;
    s.name = j.at("name").get<std::string>();
    if (s.name.empty()) throw SpecError("name must not be empty");
    s.scenario = existing(base, j.at("scenario").get<std::string>(), "scenario");
    s.workload = existing(base, j.at("workload").get<std::string>(), "workload");
    if (j.contains("paper_scale")) {
      const auto& p = j.at("paper_scale");
      s.full_scenario = existing(base, p.at("scenario").get<std::string>(), "scenario");
      s.full_workload = existing(base, p.at("workload").get<std::string>(), "workload");
    }
    for (const auto& p : j.at("policies").get<std::vector<std::string>>())
      s.policies.push_back(policy_from_string(p));
    if (s.policies.empty()) throw SpecError("policies must not be empty");
    s.horizon = j.value("horizon", s.horizon);
    if (s.horizon < 1) throw SpecError("horizon must be positive");
    s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (s.seeds.empty()) throw SpecError("seeds must not be empty");
    if (j.contains("output")) s.output = j.at("output").get<std::string>();
    const json sweeps = j.value("sweeps", json::object());
    s.V = sweep(sweeps, "V");
    s.budget = sweep(sweeps, "budget");
    s.cache_ratio = sweep(sweeps, "cache_ratio");
    s.private_ratio = sweep(sweeps, "private_ratio");
    s.error_mean = sweep(sweeps, "error_mean");
    if (j.contains("lookahead")) {
      LookaheadSpec l;
      l.N = j.at("lookahead").value("N", l.N);
      l.frames = j.at("lookahead").value("frames", l.frames);
      if (l.N < 1 || l.frames < 1) throw SpecError("lookahead N and frames must be positive");
      s.lookahead = l;
    }
    return s;
  } catch (const json::exception& e) {
    throw SpecError(std::string("experiment spec: ") + e.what());
  } catch (const SpecError&) {
    throw;
  } catch (const Error& e) {
    throw SpecError(e.what());
  }
}

ExperimentSpec load_experiment(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open experiment spec " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw SpecError(path.string() + ": " + e.what());
  }
  return experiment_from_json(j, path.parent_path());
}

std::string Cell::label() const {
  std::string s = fmt::format("{}_s{}", to_string(policy), seed);
  if (V) s += "_V" + format_number(*V);
  if (budget) s += "_B" + format_number(*budget);
  if (cache_ratio) s += "_cache" + format_number(*cache_ratio);
  if (private_ratio) s += "_priv" + format_number(*private_ratio);
  if (error_mean) s += "_err" + format_number(*error_mean);
  return s;
}

std::vector<Cell> expand_cells(const ExperimentSpec& spec, const RunOverrides& overrides) {
  auto axis = [](const std::vector<double>& v) {
    std::vector<std::optional<double>> out(v.begin(), v.end());
    if (out.empty()) out.push_back(std::nullopt);
    return out;
  };
  std::vector<std::uint64_t> seeds = spec.seeds;
  if (overrides.seed) seeds = {*overrides.seed};
  std::vector<Cell> cells;
  for (auto V : axis(spec.V))
    for (auto b : axis(spec.budget))
      for (auto c : axis(spec.cache_ratio))
        for (auto p : axis(spec.private_ratio))
          for (auto e : axis(spec.error_mean))
            for (std::uint64_t seed : seeds)
              for (Policy pol : spec.policies) cells.push_back({pol, seed, V, b, c, p, e});
  return cells;
}

namespace {

struct Inputs {
  Scenario scenario;
  WorkloadConfig workload;
};

Inputs load_inputs(const ExperimentSpec& spec, const RunOverrides& overrides) {
  fs::path sc = spec.scenario, wl = spec.workload;
  if (overrides.paper_scale) {
    if (!spec.full_scenario || !spec.full_workload)
      throw SpecError("spec has no paper_scale section");
    sc = *spec.full_scenario;
    wl = *spec.full_workload;
  }
  try {
    return {load_scenario(sc), load_workload(wl)};
  } catch (const Error& e) {
    throw SpecError(e.what());
  }
}

CellResult run_cell(const Cell& cell, const Inputs& in, const ExperimentSpec& spec,
                    std::int64_t horizon, const fs::path& dir, bool svg) {
  CellResult out;
  out.cell = cell;
  try {
    Scenario sc = in.scenario;
    if (cell.V) sc.control.V = *cell.V;
    if (cell.budget) sc.control.budget = *cell.budget;
    if (cell.cache_ratio) sc.set_cache_ratio(*cell.cache_ratio);
    WorkloadConfig wc = in.workload;
    wc.seed = cell.seed;
    if (cell.private_ratio) wc.private_ratio = *cell.private_ratio;
    if (cell.error_mean) wc.error_mean = *cell.error_mean;

    const Workload wl = generate_workload(wc, sc.data, sc.vms.num_types(), sc.num_clouds(),
                                          horizon * sc.control.slots_per_coarse);
    RunOptions opt;
    opt.record_decisions = true;
    opt.record_placements = true;
    opt.error_mean = wc.error_mean;
    opt.perturb_seed = cell.seed;
    RunReport r = run_policy(cell.policy, sc, wl, horizon, opt);
    r.seed = cell.seed;

    if (spec.lookahead && cell.policy == Policy::proposed) {
      const auto& la = *spec.lookahead;
      if (horizon < static_cast<std::int64_t>(la.N) * la.frames)
        throw Error("horizon is shorter than the look-ahead frames");
      std::vector<double> oracle;
      for (int z = 0; z < la.frames; ++z) oracle.push_back(lookahead_oracle(sc, wl, la.N, z));
      out.lookahead = lookahead_bound_check(r.slots, oracle, r.B, la.N, sc.control.V);
      json t = {{"N", la.N},
                {"frames", la.frames},
                {"oracle", oracle},
                {"lhs", out.lookahead->lhs},
                {"rhs", out.lookahead->rhs},
                {"margin", out.lookahead->margin},
                {"pass", out.lookahead->pass}};
      write_text(dir / "lookahead_bound.json", t.dump(2) + "\n");
    }

    write_text(dir / "slots.csv", slots_csv(r.slots));
    write_text(dir / "decisions.csv", decisions_csv(r.decisions));
    write_text(dir / "placements.csv", placements_csv(r.placements));
    write_text(dir / "summary.json", summary_json(r).dump(2) + "\n");
    if (svg) {
      std::vector<double> R, C, Q;
      for (const auto& s : r.slots) {
        R.push_back(s.avg_R);
        C.push_back(s.avg_C);
        Q.push_back(s.Q);
      }
      write_text(dir / "averages.svg",
                 svg_chart(cell.label(), {{"avg R", R}, {"avg C", C}, {"Q", Q}}));
    }
    r.decisions.clear();
    r.placements.clear();
    out.report = std::move(r);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, const RunOverrides& overrides,
                                std::ostream& log) {
  const Inputs inputs = load_inputs(spec, overrides);
  const std::int64_t horizon = overrides.horizon.value_or(spec.horizon);
  if (horizon < 1) throw SpecError("horizon must be positive");
  const std::vector<Cell> cells = expand_cells(spec, overrides);

  ExperimentResult result;
  result.directory = overrides.output.value_or(spec.output) / spec.name;
  fs::create_directories(result.directory);
  result.cells.resize(cells.size());

  unsigned jobs = overrides.jobs ? overrides.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(cells.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < cells.size(); k = next++)
      result.cells[k] = run_cell(cells[k], inputs, spec, horizon,
                                 result.directory / cells[k].label(), overrides.svg);
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < jobs; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  // identical (seed, private ratio) must mean an identical request stream
  std::map<std::pair<std::uint64_t, std::string>, std::uint64_t> hashes;
  std::size_t unfair = 0;
  for (const auto& c : result.cells) {
    if (!c.error.empty()) continue;
    const auto key = std::make_pair(c.cell.seed, opt_number(c.cell.private_ratio));
    const auto [it, fresh] = hashes.emplace(key, c.report.stream_hash);
    if (!fresh && it->second != c.report.stream_hash) ++unfair;
  }

  std::string csv =
      "label,policy,seed,V,budget,cache_ratio,private_ratio,error_mean,avg_R,avg_C,final_Q,"
      "acceptance_rate,invariant_failures,stream_hash,lookahead_margin\n";
  log << fmt::format("{:<44} {:>12} {:>12} {:>12} {:>8} {:>5}\n", "cell", "avg_R", "avg_C",
                     "final_Q", "accept", "inv");
  bool failed = unfair > 0;
  for (const auto& c : result.cells) {
    const RunReport& r = c.report;
    if (!c.error.empty()) {
      failed = true;
      log << fmt::format("{:<44} error: {}\n", c.cell.label(), c.error);
      continue;
    }
    const std::size_t inv = r.invariants.total();
    const bool bound_fail = c.lookahead && !c.lookahead->pass;
    if (inv > 0 || bound_fail) failed = true;
    csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{:016x},{}\n", c.cell.label(),
                       to_string(c.cell.policy), c.cell.seed, opt_number(c.cell.V),
                       opt_number(c.cell.budget), opt_number(c.cell.cache_ratio),
                       opt_number(c.cell.private_ratio), opt_number(c.cell.error_mean),
                       format_number(r.avg_R()), format_number(r.avg_C()),
                       format_number(r.final_Q()), format_number(r.acceptance_rate()), inv,
                       r.stream_hash, c.lookahead ? format_number(c.lookahead->margin) : "");
    log << fmt::format("{:<44} {:>12.2f} {:>12.2f} {:>12.2f} {:>8.4f} {:>5}\n", c.cell.label(),
                       r.avg_R(), r.avg_C(), r.final_Q(), r.acceptance_rate(), inv);
    if (inv > 0)
      log << "  invariant counters: " << summary_json(r)["invariants"].dump() << "\n";
    if (bound_fail)
      log << fmt::format("  look-ahead bound failed: lhs {} rhs {}\n", c.lookahead->lhs,
                         c.lookahead->rhs);
  }
  if (unfair > 0) log << fmt::format("{} cells saw a different request stream\n", unfair);
  write_text(result.directory / "cells.csv", csv);

  if (overrides.svg) {
    std::vector<Series> series;
    for (const auto& c : result.cells) {
      if (!c.error.empty()) continue;
      Series s{c.cell.label(), {}};
      for (const auto& slot : c.report.slots) s.values.push_back(slot.avg_R);
      series.push_back(std::move(s));
    }
    write_text(result.directory / "avg_R.svg", svg_chart(spec.name + " time-average revenue", series));
  }
  result.exit_code = failed ? 1 : 0;
  return result;
}

}  // namespace edgeorch
