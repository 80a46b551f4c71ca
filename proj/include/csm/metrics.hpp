#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "csm/core.hpp"
#include "csm/engine.hpp"
#include "csm/oracle.hpp"

namespace csm {

/// Number of channels whose true mean is strictly above the user's current one.
/// Throws Domain for an unassigned user.
int user_potential(const RewardModel& model, const Configuration& config, UserId n);

/// Sum of user potentials over assigned users of an orthogonal configuration.
int system_potential(const RewardModel& model, const Configuration& config);

using SwitchCurves = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Row m, column n: channel changes by user n up to the end of super-frame m
/// (swaps and vacancy moves; joins and warm-up moves are not switches).
SwitchCurves count_switches(const RunTrace& trace);

/// Live users' expected reward at each super-frame over the optimum for the
/// same set of live users.
std::vector<double> normalized_reward(const RunTrace& trace, const RewardModel& model);

/// Per-super-frame metrics, all against true means.
struct MetricsTrace {
  std::vector<int> potential;
  std::vector<std::uint8_t> in_smc;
  std::vector<double> cum_reward;
  std::vector<double> norm_reward;
  std::vector<int> live_users;
  SwitchCurves switches;

  std::int64_t super_frames() const { return static_cast<std::int64_t>(potential.size()); }
};

MetricsTrace compute_metrics(const RunTrace& trace, const RewardModel& model,
                             StabilityRule rule = StabilityRule::PairsAndVacancies);

}  // namespace csm
