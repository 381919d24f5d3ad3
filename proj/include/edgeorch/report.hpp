#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "edgeorch/simulator.hpp"

namespace edgeorch {

// Shortest text that reads back to the same double.
std::string format_number(double v);

std::string slots_csv(const std::vector<SlotReport>& slots);
std::string decisions_csv(const std::vector<Decision>& decisions);
std::string placements_csv(const std::vector<PlacementRecord>& placements);
nlohmann::json summary_json(const RunReport& report, bool include_timing = false);

struct Series {
  std::string name;
  std::vector<double> values;
};

// Line chart with one polyline per series over x = 1..n.
std::string svg_chart(const std::string& title, const std::vector<Series>& series);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace edgeorch
