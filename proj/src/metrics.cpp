#include "csm/metrics.hpp"

#include <map>
#include <string>

namespace csm {

int user_potential(const RewardModel& model, const Configuration& config, UserId n) {
  if (n < 0 || static_cast<std::size_t>(n) >= config.size() || config[n] == kNoChannel) {
    fail(ErrorCategory::Domain, "user " + std::to_string(n) + " is not assigned a channel");
  }
  const auto row = model.mu().row(n);
  const double own = row(config[n]);
  return static_cast<int>((row.array() > own).count());
}

int system_potential(const RewardModel& model, const Configuration& config) {
  config.occupancy(model.channels());
  int total = 0;
  for (UserId n = 0; n < static_cast<UserId>(config.size()); ++n) {
    if (config[n] != kNoChannel) total += user_potential(model, config, n);
  }
  return total;
}

SwitchCurves count_switches(const RunTrace& trace) {
  SwitchCurves curves = SwitchCurves::Zero(trace.super_frames(), trace.population);
  Eigen::Matrix<std::int64_t, 1, Eigen::Dynamic> steps =
      Eigen::Matrix<std::int64_t, 1, Eigen::Dynamic>::Zero(trace.population);
  std::size_t e = 0;
  for (std::int64_t m = 0; m < trace.super_frames(); ++m) {
    for (; e < trace.events.size() && trace.events[e].super_frame == m; ++e) {
      const auto& ev = trace.events[e];
      if (ev.kind == EventKind::Swap) {
        ++steps(ev.user);
        ++steps(ev.other);
      } else if (ev.kind == EventKind::MoveToVacant) {
        ++steps(ev.user);
      }
    }
    curves.row(m) = steps;
  }
  return curves;
}

namespace {

/// Caches the optimum per distinct live-user set.
class OptimumCache {
 public:
  explicit OptimumCache(const RewardModel& model) : model_(model) {}

  double value_for(const std::vector<UserId>& live) {
    auto it = cache_.find(live);
    if (it == cache_.end()) it = cache_.emplace(live, optimal_assignment(model_, live).value).first;
    return it->second;
  }

 private:
  const RewardModel& model_;
  std::map<std::vector<UserId>, double> cache_;
};

double assigned_reward(const RewardModel& model, const Configuration& config, std::vector<UserId>& live) {
  live.clear();
  double total = 0.0;
  for (UserId n = 0; n < static_cast<UserId>(config.size()); ++n) {
    if (config[n] == kNoChannel) continue;
    live.push_back(n);
    total += model.mean(n, config[n]);
  }
  return total;
}

bool orthogonal(const Configuration& config, Eigen::Index K) {
  std::vector<std::uint8_t> taken(static_cast<std::size_t>(K), 0);
  for (Channel k : config.assignment) {
    if (k == kNoChannel) continue;
    if (taken[static_cast<std::size_t>(k)]++) return false;
  }
  return true;
}

}  // namespace

std::vector<double> normalized_reward(const RunTrace& trace, const RewardModel& model) {
  OptimumCache optimum(model);
  std::vector<double> ratio;
  ratio.reserve(static_cast<std::size_t>(trace.super_frames()));
  std::vector<UserId> live;
  for (std::int64_t m = 0; m < trace.super_frames(); ++m) {
    const auto config = trace.configuration_at(m);
    const double actual = assigned_reward(model, config, live);
    const double best = live.empty() ? 0.0 : optimum.value_for(live);
    ratio.push_back(best > 0.0 ? actual / best : 1.0);
  }
  return ratio;
}

MetricsTrace compute_metrics(const RunTrace& trace, const RewardModel& model, StabilityRule rule) {
  MetricsTrace out;
  const auto frames = static_cast<std::size_t>(trace.super_frames());
  out.potential.reserve(frames);
  out.in_smc.reserve(frames);
  out.live_users.reserve(frames);
  out.cum_reward = trace.cum_reward;
  out.norm_reward = normalized_reward(trace, model);
  out.switches = count_switches(trace);

  for (std::int64_t m = 0; m < trace.super_frames(); ++m) {
    const auto config = trace.configuration_at(m);
    int phi = 0;
    int live = 0;
    for (UserId n = 0; n < static_cast<UserId>(config.size()); ++n) {
      if (config[n] == kNoChannel) continue;
      phi += user_potential(model, config, n);
      ++live;
    }
    out.potential.push_back(phi);
    out.live_users.push_back(live);
    out.in_smc.push_back(orthogonal(config, model.channels()) && is_smc(config, model, rule) ? 1 : 0);
  }
  return out;
}

}  // namespace csm
