#include <cinttypes>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "csm/agent.hpp"
#include "csm/experiment_spec.hpp"
#include "csm/theory.hpp"

namespace csm {

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

std::string number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCategory::Io, "cannot write " + path.string());
  return out;
}

void close_checked(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) fail(ErrorCategory::Io, "error while writing " + path.string());
}

std::string metrics_header(const MetricSelection& sel) {
  std::string h = "run_id,cell,K,N,seed,super_frame,end_slot,live_users";
  if (sel.potential) h += ",potential";
  if (sel.in_smc) h += ",in_smc";
  if (sel.cum_reward) h += ",cum_reward";
  if (sel.norm_reward) h += ",norm_reward";
  if (sel.switches) h += ",total_switches,user_switches";
  return h;
}

constexpr const char* kSummaryHeader =
    "run_id,cell,K,N,seed,super_frames,final_potential,final_in_smc,final_norm_reward,"
    "total_switches,cfl_orthogonal,unintended_collisions,probes";

}  // namespace

EmittedFiles emit_metrics(const std::vector<CellResult>& results, const ExperimentSpec& spec,
                          const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorCategory::Io, "cannot create output directory " + out_dir.string() + ": " + ec.message());

  EmittedFiles files{out_dir / "metrics.csv", out_dir / "summary.csv", out_dir / "bounds.json"};
  auto metrics_out = open_for_write(files.metrics);
  auto summary_out = open_for_write(files.summary);
  metrics_out << metrics_header(spec.metrics) << '\n';
  summary_out << kSummaryHeader << '\n';

  nlohmann::ordered_json bounds = nlohmann::ordered_json::array();
  std::int64_t run_id = 0;
  for (std::size_t c = 0; c < results.size(); ++c) {
    const auto& cell = results[c];
    const auto frame = cell.config.frame_length();
    const auto cfl = cell.config.resolved_cfl_length();
    double worst_gap = std::numeric_limits<double>::infinity();
    nlohmann::ordered_json gaps = nlohmann::ordered_json::array();

    for (std::size_t r = 0; r < cell.runs.size(); ++r, ++run_id) {
      const auto& run = cell.runs[r];
      const auto& m = cell.metrics[r];
      const std::string prefix = std::to_string(run_id) + "," + std::to_string(c) + "," +
                                 std::to_string(cell.cell.K) + "," + std::to_string(cell.cell.N) + "," +
                                 std::to_string(run.seed) + ",";
      std::ostringstream rows;
      for (std::int64_t sf = 0; sf < m.super_frames(); ++sf) {
        const auto i = static_cast<std::size_t>(sf);
        rows << prefix << sf << ',' << cfl + (sf + 1) * frame << ',' << m.live_users[i];
        if (spec.metrics.potential) rows << ',' << m.potential[i];
        if (spec.metrics.in_smc) rows << ',' << int{m.in_smc[i]};
        if (spec.metrics.cum_reward) rows << ',' << number(m.cum_reward[i]);
        if (spec.metrics.norm_reward) rows << ',' << number(m.norm_reward[i]);
        if (spec.metrics.switches) {
          const auto row = m.switches.row(sf);
          std::string per_user;
          for (Eigen::Index n = 0; n < row.size(); ++n) {
            if (n) per_user += ',';
            per_user += std::to_string(row(n));
          }
          rows << ',' << row.sum() << ',' << csv_field(per_user);
        }
        rows << '\n';
      }
      metrics_out << rows.str();

      const auto last = m.super_frames() - 1;
      const auto li = static_cast<std::size_t>(last);
      summary_out << prefix << m.super_frames() << ',' << (last >= 0 ? m.potential[li] : 0) << ','
                  << (last >= 0 ? int{m.in_smc[li]} : 0) << ','
                  << (last >= 0 ? number(m.norm_reward[li]) : "") << ','
                  << (last >= 0 ? m.switches.row(last).sum() : 0) << ',' << int{run.trace.cfl_orthogonal}
                  << ',' << run.trace.unintended_collisions << ',' << run.trace.probes << '\n';

      double gap = std::numeric_limits<double>::infinity();
      try {
        gap = delta_min(run.model).delta_min;
      } catch (const Error&) {
        gap = 0.0;
      }
      worst_gap = std::min(worst_gap, gap);
      gaps.push_back(gap);
    }

    nlohmann::ordered_json entry;
    entry["cell"] = c;
    entry["K"] = cell.cell.K;
    entry["N"] = cell.cell.N;
    entry["epsilon"] = cell.config.resolved_epsilon();
    entry["delta"] = spec.bound_delta;
    entry["horizon"] = cell.config.padded_horizon();
    entry["delta_min_per_run"] = gaps;
    if (worst_gap > 0.0 && std::isfinite(worst_gap) && cell.config.padded_horizon() >= 2) {
      const auto report = theory::bound_report(cell.cell.K, cell.cell.N, cell.config.resolved_epsilon(),
                                               spec.bound_delta, worst_gap,
                                               static_cast<double>(cell.config.padded_horizon()));
      entry["delta_min"] = worst_gap;
      entry["t_min"] = report.t_min;
      entry["s_min"] = report.s_min;
      entry["T_delta_static"] = report.T_delta_static;
      entry["T_delta_departure"] = report.T_delta_departure;
      entry["T_arrival"] = report.T_arrival;
      entry["phi_max"] = report.phi_max;
      entry["static_valid"] = report.static_valid;
      entry["arrival_valid"] = report.arrival_valid;
    } else {
      entry["delta_min"] = nullptr;
    }
    bounds.push_back(entry);
  }

  close_checked(metrics_out, files.metrics);
  close_checked(summary_out, files.summary);
  auto bounds_out = open_for_write(files.bounds);
  bounds_out << bounds.dump(2) << '\n';
  close_checked(bounds_out, files.bounds);
  return files;
}

}  // namespace csm
