#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "csm/core.hpp"

namespace csm {

/// Channel per user (indexed by model row); kNoChannel for users that are
/// not in the system.
struct Configuration {
  std::vector<Channel> assignment;

  std::size_t size() const noexcept { return assignment.size(); }
  Channel operator[](UserId n) const { return assignment[static_cast<std::size_t>(n)]; }

  /// Per-channel holder, or kNoUser. Throws InvalidConfiguration when two
  /// users share a channel or an index is out of range.
  std::vector<UserId> occupancy(Eigen::Index K) const;

  friend bool operator==(const Configuration&, const Configuration&) = default;
};

enum class StabilityRule : std::uint8_t {
  PairsOnly,         // user-pair swap condition only
  PairsAndVacancies  // additionally forbid strictly better empty channels
};

/// Exchange stability against true means: no ordered pair with a strict
/// gain for the first user and a weak gain for the second, and (by default)
/// no assigned user strictly preferring an empty channel.
bool is_smc(const Configuration& config, const RewardModel& model,
            StabilityRule rule = StabilityRule::PairsAndVacancies);

inline constexpr std::uint64_t kEnumerationLimit = 10'000'000;

/// Number of injective assignments of N users to K channels, saturating at
/// UINT64_MAX.
std::uint64_t injective_assignment_count(Eigen::Index K, Eigen::Index N);

/// All orthogonal full assignments passing is_smc, in lexicographic order.
/// Throws Size above kEnumerationLimit candidates.
std::vector<Configuration> enumerate_absorbing(const RewardModel& model,
                                               StabilityRule rule = StabilityRule::PairsAndVacancies);

struct Assignment {
  double value = 0.0;
  Configuration config;
};

/// Maximum total expected reward over orthogonal assignments of the given
/// users (all users by default). Hungarian method, O(N^2 K).
Assignment optimal_assignment(const RewardModel& model);
Assignment optimal_assignment(const RewardModel& model, std::span<const UserId> users);

}  // namespace csm
