#include "edgeorch/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

namespace edgeorch {

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  if (v == 0.0) return "0";
  return fmt::format("{}", v);
}

std::string slots_csv(const std::vector<SlotReport>& slots) {
  std::string out = "T,R,C,Q,avg_R,avg_C,acceptance_rate,dpp_value\n";
  for (const auto& s : slots)
    out += fmt::format("{},{},{},{},{},{},{},{}\n", s.T, format_number(s.R), format_number(s.C),
                       format_number(s.Q), format_number(s.avg_R), format_number(s.avg_C),
                       format_number(s.acceptance_rate), format_number(s.dpp_value));
  return out;
}

std::string decisions_csv(const std::vector<Decision>& decisions) {
  std::string out =
      "request_id,arrival,verdict,assignment,delta_primal,delta_dual,objective,per_cloud\n";
  for (const auto& d : decisions) {
    std::string per_cloud;
    for (Eigen::Index i = 0; i < d.per_cloud.size(); ++i) {
      if (i) per_cloud += ';';
      per_cloud += fmt::format("{}:{}", i, format_number(d.per_cloud(i)));
    }
    out += fmt::format("{},{},{},{},{},{},{},{}\n", d.request, d.arrival,
                       d.accepted ? "accept" : to_string(d.reason),
                       d.config ? d.config->describe() : "", format_number(d.delta_primal),
                       format_number(d.delta_dual), format_number(d.objective), per_cloud);
  }
  return out;
}

std::string placements_csv(const std::vector<PlacementRecord>& placements) {
  std::string out = "slot,cached,objective,rounds,epsilon\n";
  for (const auto& p : placements) {
    std::string cached;
    for (std::size_t i = 0; i < p.objects.size(); ++i) {
      if (i) cached += ';';
      cached += fmt::format("{}:", i);
      for (std::size_t k = 0; k < p.objects[i].size(); ++k)
        cached += fmt::format("{}{}", k ? " " : "", p.objects[i][k]);
    }
    std::string rounds;
    for (std::size_t r = 0; r < p.rounds.size(); ++r)
      rounds += fmt::format("{}{}:{}", r ? ";" : "", p.rounds[r].cloud,
                            format_number(p.rounds[r].marginal));
    out += fmt::format("{},{},{},{},{}\n", p.slot, cached, format_number(p.objective), rounds,
                       format_number(p.epsilon));
  }
  return out;
}

nlohmann::json summary_json(const RunReport& r, bool include_timing) {
  nlohmann::json j;
  j["policy"] = to_string(r.policy);
  j["seed"] = r.seed;
  j["stream_hash"] = fmt::format("{:016x}", r.stream_hash);
  j["horizon"] = r.slots.size();
  j["avg_R"] = r.avg_R();
  j["avg_C"] = r.avg_C();
  j["final_Q"] = r.final_Q();
  j["acceptance_rate"] = r.acceptance_rate();
  j["B"] = r.B;
  const auto& inv = r.invariants;
  j["invariants"] = {{"capacity_violations", inv.capacity_violations},
                     {"conservation_failures", inv.conservation_failures},
                     {"ratio_violations", inv.ratio_violations},
                     {"infeasible_placements", inv.infeasible_placements},
                     {"objective_mismatches", inv.objective_mismatches},
                     {"queue_replay_mismatches", inv.queue_replay_mismatches},
                     {"budget_bound_violations", inv.budget_bound_violations}};
  if (r.policy == Policy::proposed) {
    const auto& a = r.allocator;
    j["allocator"] = {{"seen", a.seen},
                      {"accepted", a.accepted},
                      {"rejected_objective", a.rejected_objective},
                      {"rejected_ceiling", a.rejected_ceiling},
                      {"rejected_capacity", a.rejected_capacity},
                      {"scaling_warnings", a.scaling_warnings},
                      {"max_ratio_error", a.max_ratio_error},
                      {"max_request_usage", a.max_request_usage},
                      {"max_overshoot", r.max_overshoot}};
  }
  if (include_timing) j["wall_seconds"] = r.wall_seconds;
  return j;
}

std::string svg_chart(const std::string& title, const std::vector<Series>& series) {
  constexpr double W = 640, H = 360, L = 70, R = 150, Tp = 30, Bt = 40;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  double lo = 0.0, hi = 0.0;
  std::size_t n = 0;
  for (const auto& s : series) {
    n = std::max(n, s.values.size());
    for (double v : s.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (hi <= lo) hi = lo + 1.0;
  const double pw = W - L - R, ph = H - Tp - Bt;
  auto x_of = [&](std::size_t k) { return L + (n <= 1 ? 0.0 : pw * k / (n - 1.0)); };
  auto y_of = [&](double v) { return Tp + ph * (1.0 - (v - lo) / (hi - lo)); };

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      W, H);
  out += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", W, H);
  out += fmt::format("<text x=\"{}\" y=\"18\" text-anchor=\"middle\">{}</text>\n", L + pw / 2, title);
  out += fmt::format(
      "<polyline fill=\"none\" stroke=\"black\" points=\"{},{} {},{} {},{}\"/>\n", L, Tp, L,
      Tp + ph, L + pw, Tp + ph);
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = lo + (hi - lo) * tick / 4.0;
    out += fmt::format("<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">{:.4g}</text>\n", L - 6,
                       y_of(v) + 4, v);
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">slot</text>\n", L + pw / 2,
                     H - 10);
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = colors[s % std::size(colors)];
    std::string pts;
    for (std::size_t k = 0; k < series[s].values.size(); ++k)
      pts += fmt::format("{}{:.2f},{:.2f}", k ? " " : "", x_of(k), y_of(series[s].values[k]));
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                       color, pts);
    out += fmt::format("<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n", L + pw + 10,
                       Tp + 16 * (s + 1), color, series[s].name);
  }
  out += "</svg>\n";
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace edgeorch
