#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "edgeorch/experiment.hpp"
#include "edgeorch/report.hpp"
#include "edgeorch/scenario.hpp"
#include "edgeorch/verify.hpp"
#include "edgeorch/workload.hpp"

using namespace edgeorch;

namespace {

int cmd_run(const std::string& spec_path, const RunOverrides& overrides) {
  const ExperimentSpec spec = load_experiment(spec_path);
  const ExperimentResult res = run_experiment(spec, overrides, std::cout);
  std::cout << fmt::format("artifacts in {}\n", res.directory.string());
  return res.exit_code;
}

int cmd_verify(const std::string& suite, std::uint64_t seed) {
  bool known = false;
  for (const auto& n : suite_names()) known = known || n == suite;
  if (!known) {
    std::cerr << fmt::format("unknown suite '{}'; choose one of:", suite);
    for (const auto& n : suite_names()) std::cerr << ' ' << n;
    std::cerr << '\n';
    return 2;
  }
  const SuiteResult r = run_suite(suite, seed);
  for (const auto& c : r.cases)
    std::cout << fmt::format("{} {}: {} ({})\n", c.pass ? "PASS" : "FAIL", suite, c.name, c.detail);
  std::cout << fmt::format("{} {} in {:.2f} s\n", suite, r.pass() ? "passed" : "failed", r.seconds);
  return r.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-edge-cloud orchestration simulator"};
  app.require_subcommand(1);

  RunOverrides overrides;
  std::string spec_path;
  std::optional<std::uint64_t> run_seed;
  std::optional<std::int64_t> run_horizon;
  std::optional<std::string> run_out;
  auto* run = app.add_subcommand("run", "Run an experiment spec");
  run->add_option("spec", spec_path, "Experiment spec (JSON)")->required();
  run->add_option("--seed", run_seed, "Run only this seed");
  run->add_option("--horizon", run_horizon, "Coarse slots to simulate");
  run->add_option("--out", run_out, "Output directory");
  run->add_flag("--paper-scale", overrides.paper_scale, "Use the full-size scenario and workload");
  run->add_flag("--svg", overrides.svg, "Also write SVG charts");
  run->add_option("--jobs", overrides.jobs, "Worker threads (0 = all cores)");

  std::string suite;
  std::uint64_t verify_seed = 1;
  auto* verify = app.add_subcommand("verify", "Run an invariant suite");
  verify->add_option("suite", suite, "lemma5, lemma6, lemma7, prop2, theorem1 or lemma1")->required();
  verify->add_option("--seed", verify_seed, "Seed for the randomized instances");

  std::uint64_t gen_seed = 7;
  bool gen_full = false;
  std::string gen_out;
  std::string gen_name = "desk";
  auto* scenario = app.add_subcommand("scenario", "Draw and freeze a scenario file");
  scenario->add_option("--seed", gen_seed, "Seed for the latency draws");
  scenario->add_flag("--paper-scale", gen_full, "Full-size capacities and slot lengths");
  scenario->add_option("--name", gen_name, "Scenario name");
  scenario->add_option("--out", gen_out, "Output file (stdout when omitted)");

  std::uint64_t wl_seed = 1;
  bool wl_full = false;
  std::string wl_out;
  auto* workload = app.add_subcommand("workload", "Write the default workload config");
  workload->add_option("--seed", wl_seed, "Workload seed");
  workload->add_flag("--paper-scale", wl_full, "Full-size arrival rates");
  workload->add_option("--out", wl_out, "Output file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      overrides.seed = run_seed;
      overrides.horizon = run_horizon;
      if (run_out) overrides.output = *run_out;
      return cmd_run(spec_path, overrides);
    }
    if (*verify) return cmd_verify(suite, verify_seed);
    if (*scenario) {
      Scenario s = make_scenario(gen_full ? full_shape() : desk_shape(), gen_seed);
      s.name = gen_name;
      const std::string text = scenario_to_json(s).dump(2) + "\n";
      if (gen_out.empty()) std::cout << text;
      else write_text(gen_out, text);
      return 0;
    }
    if (*workload) {
      const auto w = wl_full ? full_workload(wl_seed) : desk_workload(wl_seed);
      const std::string text = workload_to_json(w).dump(2) + "\n";
      if (wl_out.empty()) std::cout << text;
      else write_text(wl_out, text);
      return 0;
    }
  } catch (const SpecError& e) {
    std::cerr << "spec error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
