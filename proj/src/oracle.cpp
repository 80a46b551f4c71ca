#include "csm/oracle.hpp"

#include <limits>
#include <numeric>
#include <string>

namespace csm {

std::vector<UserId> Configuration::occupancy(Eigen::Index K) const {
  std::vector<UserId> holder(static_cast<std::size_t>(K), kNoUser);
  for (std::size_t n = 0; n < assignment.size(); ++n) {
    const Channel k = assignment[n];
    if (k == kNoChannel) continue;
    if (k < 0 || k >= K) {
      fail(ErrorCategory::InvalidConfiguration,
           "user " + std::to_string(n) + " assigned to out-of-range channel " + std::to_string(k));
    }
    auto& slot = holder[static_cast<std::size_t>(k)];
    if (slot != kNoUser) {
      fail(ErrorCategory::InvalidConfiguration,
           "configuration is not orthogonal: channel " + std::to_string(k) + " holds users " +
               std::to_string(slot) + " and " + std::to_string(n));
    }
    slot = static_cast<UserId>(n);
  }
  return holder;
}

bool is_smc(const Configuration& config, const RewardModel& model, StabilityRule rule) {
  if (config.size() != static_cast<std::size_t>(model.users())) {
    fail(ErrorCategory::InvalidConfiguration, "configuration size does not match the reward model");
  }
  const auto& mu = model.mu();
  const auto holder = config.occupancy(model.channels());
  const auto N = static_cast<UserId>(config.size());

  for (UserId n1 = 0; n1 < N; ++n1) {
    const Channel a1 = config[n1];
    if (a1 == kNoChannel) continue;
    for (UserId n2 = 0; n2 < N; ++n2) {
      const Channel a2 = config[n2];
      if (n2 == n1 || a2 == kNoChannel) continue;
      const bool initiator_gains = mu(n1, a1) < mu(n1, a2);
      const bool responder_accepts = mu(n2, a2) <= mu(n2, a1);
      if (initiator_gains && responder_accepts) return false;
    }
    if (rule == StabilityRule::PairsAndVacancies) {
      for (Eigen::Index k = 0; k < model.channels(); ++k) {
        if (holder[static_cast<std::size_t>(k)] == kNoUser && mu(n1, k) > mu(n1, a1)) return false;
      }
    }
  }
  return true;
}

std::uint64_t injective_assignment_count(Eigen::Index K, Eigen::Index N) {
  std::uint64_t count = 1;
  for (Eigen::Index i = 0; i < N; ++i) {
    const auto factor = static_cast<std::uint64_t>(K - i);
    if (factor != 0 && count > std::numeric_limits<std::uint64_t>::max() / factor) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    count *= factor;
  }
  return count;
}

std::vector<Configuration> enumerate_absorbing(const RewardModel& model, StabilityRule rule) {
  const auto K = model.channels();
  const auto N = model.users();
  const auto total = injective_assignment_count(K, N);
  if (total > kEnumerationLimit) {
    fail(ErrorCategory::Size, "instance has " + std::to_string(total) +
                                  " injective assignments, above the enumeration limit");
  }

  std::vector<Configuration> absorbing;
  Configuration current{std::vector<Channel>(static_cast<std::size_t>(N), kNoChannel)};
  std::vector<bool> used(static_cast<std::size_t>(K), false);

  auto recurse = [&](auto&& self, std::size_t user) -> void {
    if (user == current.size()) {
      if (is_smc(current, model, rule)) absorbing.push_back(current);
      return;
    }
    for (Channel k = 0; k < K; ++k) {
      if (used[static_cast<std::size_t>(k)]) continue;
      used[static_cast<std::size_t>(k)] = true;
      current.assignment[user] = k;
      self(self, user + 1);
      used[static_cast<std::size_t>(k)] = false;
    }
    current.assignment[user] = kNoChannel;
  };
  recurse(recurse, 0);
  return absorbing;
}

Assignment optimal_assignment(const RewardModel& model) {
  std::vector<UserId> users(static_cast<std::size_t>(model.users()));
  std::iota(users.begin(), users.end(), 0);
  return optimal_assignment(model, users);
}

Assignment optimal_assignment(const RewardModel& model, std::span<const UserId> users) {
  const auto& mu = model.mu();
  const auto n = static_cast<Eigen::Index>(users.size());
  const auto m = model.channels();
  Assignment result;
  result.config.assignment.assign(static_cast<std::size_t>(model.users()), kNoChannel);
  if (n == 0) return result;
  if (n > m) fail(ErrorCategory::InvalidConfiguration, "more users than channels");

  // Shortest augmenting path with potentials, minimizing -mu. Rows and
  // columns are 1-based; column 0 is the virtual source.
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n + 1);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(m + 1);
  std::vector<Eigen::Index> row_of(static_cast<std::size_t>(m + 1), 0);
  std::vector<Eigen::Index> way(static_cast<std::size_t>(m + 1), 0);
  Eigen::VectorXd min_slack(m + 1);
  std::vector<bool> visited(static_cast<std::size_t>(m + 1));

  for (Eigen::Index i = 1; i <= n; ++i) {
    row_of[0] = i;
    Eigen::Index j0 = 0;
    min_slack.setConstant(inf);
    std::fill(visited.begin(), visited.end(), false);
    do {
      visited[static_cast<std::size_t>(j0)] = true;
      const Eigen::Index i0 = row_of[static_cast<std::size_t>(j0)];
      const UserId user = users[static_cast<std::size_t>(i0 - 1)];
      double delta = inf;
      Eigen::Index j1 = 0;
      for (Eigen::Index j = 1; j <= m; ++j) {
        if (visited[static_cast<std::size_t>(j)]) continue;
        const double reduced = -mu(user, j - 1) - u(i0) - v(j);
        if (reduced < min_slack(j)) {
          min_slack(j) = reduced;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (min_slack(j) < delta) {
          delta = min_slack(j);
          j1 = j;
        }
      }
      for (Eigen::Index j = 0; j <= m; ++j) {
        if (visited[static_cast<std::size_t>(j)]) {
          u(row_of[static_cast<std::size_t>(j)]) += delta;
          v(j) -= delta;
        } else {
          min_slack(j) -= delta;
        }
      }
      j0 = j1;
    } while (row_of[static_cast<std::size_t>(j0)] != 0);
    do {
      const Eigen::Index j1 = way[static_cast<std::size_t>(j0)];
      row_of[static_cast<std::size_t>(j0)] = row_of[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  for (Eigen::Index j = 1; j <= m; ++j) {
    const auto row = row_of[static_cast<std::size_t>(j)];
    if (row == 0) continue;
    const UserId user = users[static_cast<std::size_t>(row - 1)];
    result.config.assignment[static_cast<std::size_t>(user)] = static_cast<Channel>(j - 1);
    result.value += mu(user, j - 1);
  }
  return result;
}

}  // namespace csm
