#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "edgeorch/simulator.hpp"

namespace edgeorch {

// Malformed experiment spec (the CLI maps this to exit code 2).
class SpecError : public Error {
 public:
  using Error::Error;
};

struct LookaheadSpec {
  int N = 2;
  int frames = 3;
};

struct ExperimentSpec {
  std::string name;
  std::filesystem::path scenario;
  std::filesystem::path workload;
  std::optional<std::filesystem::path> full_scenario;
  std::optional<std::filesystem::path> full_workload;
  std::vector<Policy> policies;
  std::int64_t horizon = 150;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output = "out";

  // An empty sweep keeps the value from the scenario or workload file.
  std::vector<double> V;
  std::vector<double> budget;
  std::vector<double> cache_ratio;
  std::vector<double> private_ratio;
  std::vector<double> error_mean;
  std::optional<LookaheadSpec> lookahead;
};

// Relative paths resolve against `base`.
ExperimentSpec experiment_from_json(const nlohmann::json& j, const std::filesystem::path& base);
ExperimentSpec load_experiment(const std::filesystem::path& path);

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> horizon;
  std::optional<std::filesystem::path> output;
  bool paper_scale = false;
  bool svg = false;
  unsigned jobs = 0;  // 0 picks the hardware concurrency
};

struct Cell {
  Policy policy = Policy::proposed;
  std::uint64_t seed = 0;
  std::optional<double> V, budget, cache_ratio, private_ratio, error_mean;

  std::string label() const;
};

struct CellResult {
  Cell cell;
  RunReport report;
  std::optional<LookaheadBound> lookahead;
  std::string error;  // non-empty when the cell threw
};

struct ExperimentResult {
  int exit_code = 0;
  std::vector<CellResult> cells;
  std::filesystem::path directory;
};

std::vector<Cell> expand_cells(const ExperimentSpec& spec, const RunOverrides& overrides = {});

// Runs every cell, writes per-cell artifacts and cells.csv under
// output/name, prints the summary table to `log`.
ExperimentResult run_experiment(const ExperimentSpec& spec, const RunOverrides& overrides,
                                std::ostream& log);

}  // namespace edgeorch
