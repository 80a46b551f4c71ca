#include "csm/core.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

namespace csm {

const char* to_string(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::InvalidConfiguration: return "invalid-configuration";
    case ErrorCategory::Index: return "index";
    case ErrorCategory::DegenerateGap: return "degenerate-gap";
    case ErrorCategory::ProtocolViolation: return "protocol-violation";
    case ErrorCategory::AssumptionViolation: return "assumption-violation";
    case ErrorCategory::Domain: return "domain";
    case ErrorCategory::Size: return "size";
    case ErrorCategory::Validity: return "validity";
    case ErrorCategory::Parse: return "parse";
    case ErrorCategory::Constraint: return "constraint";
    case ErrorCategory::Io: return "io";
  }
  return "unknown";
}

RewardModel::RewardModel(RewardMatrix mu) : mu_(std::move(mu)) {
  if (mu_.rows() < 1 || mu_.cols() < 1) {
    fail(ErrorCategory::InvalidConfiguration, "reward model needs at least one user and one channel");
  }
  if (mu_.rows() > mu_.cols()) {
    fail(ErrorCategory::InvalidConfiguration,
         "reward model has N=" + std::to_string(mu_.rows()) + " users but only K=" +
             std::to_string(mu_.cols()) + " channels");
  }
  if (!mu_.allFinite() || mu_.minCoeff() < 0.0 || mu_.maxCoeff() > 1.0) {
    fail(ErrorCategory::InvalidConfiguration, "expected rewards must lie in [0,1]");
  }
}

void RewardModel::check_indices(UserId n, Channel k) const {
  if (n < 0 || n >= users() || k < 0 || k >= channels()) {
    fail(ErrorCategory::Index, "reward index (user " + std::to_string(n) + ", channel " +
                                   std::to_string(k) + ") out of range");
  }
}

namespace {

bool row_has_tie(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  std::vector<double> sorted(row.begin(), row.end());
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

}  // namespace

RewardModel draw_reward_matrix(Eigen::Index K, Eigen::Index N, RngStream& rng) {
  if (K < 1 || N < 1 || N > K) {
    fail(ErrorCategory::InvalidConfiguration,
         "draw_reward_matrix requires 1 <= N <= K (got K=" + std::to_string(K) +
             ", N=" + std::to_string(N) + ")");
  }
  RewardMatrix mu(N, K);
  for (Eigen::Index n = 0; n < N; ++n) {
    do {
      for (Eigen::Index k = 0; k < K; ++k) mu(n, k) = rng.uniform();
    } while (K > 1 && row_has_tie(mu.row(n)));
  }
  return RewardModel(std::move(mu));
}

int sample_reward(const RewardModel& model, UserId n, Channel k, RngStream& rng) {
  model.check_indices(n, k);
  return rng.bernoulli(model.mean(n, k)) ? 1 : 0;
}

GapStats delta_min(const RewardModel& model) {
  const auto& mu = model.mu();
  GapStats stats;
  stats.delta_n.resize(mu.rows());
  for (Eigen::Index n = 0; n < mu.rows(); ++n) {
    std::vector<double> sorted(mu.row(n).begin(), mu.row(n).end());
    std::sort(sorted.begin(), sorted.end());
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < sorted.size(); ++i) gap = std::min(gap, sorted[i] - sorted[i - 1]);
    if (gap <= 0.0) {
      fail(ErrorCategory::DegenerateGap, "user " + std::to_string(n) + " has tied channel means");
    }
    stats.delta_n(n) = gap;
  }
  stats.delta_min = stats.delta_n.minCoeff();
  return stats;
}

}  // namespace csm
