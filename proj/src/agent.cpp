#include "csm/agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace csm {

AgentState make_agent(UserId id, Eigen::Index K, Phase phase) {
  AgentState state;
  state.id = id;
  state.r = Eigen::VectorXd::Zero(K);
  state.s = CountVector::Zero(K);
  state.phase = phase;
  state.index.values = Eigen::VectorXd::Constant(K, std::numeric_limits<double>::infinity());
  return state;
}

Ranking rank_channels(const AgentState& state, std::int64_t t) {
  const auto K = state.s.size();
  Ranking out;
  out.index.t = std::max<std::int64_t>(t, 1);
  out.index.values.resize(K);
  const double log_t = std::log(static_cast<double>(out.index.t));
  for (Eigen::Index k = 0; k < K; ++k) {
    const auto samples = state.s(k);
    if (samples == 0) {
      out.index.values(k) = std::numeric_limits<double>::infinity();
    } else {
      const double n = static_cast<double>(samples);
      out.index.values(k) = state.r(k) / n + std::sqrt(2.0 * log_t / n);
    }
  }

  std::vector<Channel> order(static_cast<std::size_t>(K));
  std::iota(order.begin(), order.end(), 0);
  const auto& I = out.index.values;
  std::sort(order.begin(), order.end(), [&](Channel x, Channel y) {
    if (I(x) != I(y)) return I(x) > I(y);
    return x < y;
  });

  if (state.a != kNoChannel) {
    const double own = I(state.a);
    for (Channel k : order) {
      if (!(I(k) > own)) break;
      out.pref_list.push_back(k);
    }
  }
  return out;
}

int initiator_flag(std::span<const Channel> pref_list, double epsilon, RngStream& rng) {
  if (pref_list.empty()) return 0;
  return rng.bernoulli(epsilon) ? 1 : 0;
}

std::optional<UserId> elect_initiator(std::span<const int> flags) {
  std::optional<UserId> winner;
  for (std::size_t n = 0; n < flags.size(); ++n) {
    if (flags[n] == 0) continue;
    if (winner) return std::nullopt;
    winner = static_cast<UserId>(n);
  }
  return winner;
}

std::optional<Channel> current_target(const AgentState& state) {
  if (!state.initiator || state.pref_ptr <= 0 ||
      state.pref_ptr > static_cast<int>(state.pref_list.size())) {
    return std::nullopt;
  }
  return state.pref_list[static_cast<std::size_t>(state.pref_ptr - 1)];
}

SwapStep coordinate_swap_step(AgentState& state, int response, bool channel_available) {
  if (!state.initiator) {
    fail(ErrorCategory::ProtocolViolation,
         "user " + std::to_string(state.id) + " coordinated a swap without being initiator");
  }
  const auto target = current_target(state);
  if (!target) {
    fail(ErrorCategory::ProtocolViolation,
         "user " + std::to_string(state.id) + " has no active preference pointer");
  }
  SwapStep step{SwapAction::Advanced, *target, state.a};
  if (channel_available || response == 1) {
    state.a = *target;
    state.pref_ptr = 0;
    step.action = channel_available ? SwapAction::MovedToVacant : SwapAction::Swapped;
    return step;
  }
  ++state.pref_ptr;
  if (state.pref_ptr > static_cast<int>(state.pref_list.size())) step.action = SwapAction::Exhausted;
  return step;
}

int respond(const UcbIndexVector& index, Channel own_channel, Channel initiator_channel) {
  return index[own_channel] <= index[initiator_channel] ? 1 : 0;
}

void transmit_and_learn(AgentState& state, double reward) {
  state.r(state.a) += reward;
  state.s(state.a) += 1;
}

namespace {

Channel draw_from(const Eigen::VectorXd& p, RngStream& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    acc += p(k);
    if (u < acc) return static_cast<Channel>(k);
  }
  // rounding left u above the total; take the last channel with mass
  for (Eigen::Index k = p.size() - 1; k > 0; --k) {
    if (p(k) > 0.0) return static_cast<Channel>(k);
  }
  return 0;
}

}  // namespace

void cfl_start(AgentState& state, Eigen::Index K, RngStream& rng) {
  state.phase = Phase::Cfl;
  state.cfl_satisfied = false;
  state.cfl_p = Eigen::VectorXd::Constant(K, 1.0 / static_cast<double>(K));
  state.a = draw_from(state.cfl_p, rng);
}

void cfl_step(AgentState& state, bool sensed_collision, Eigen::Index K, RngStream& rng) {
  if (state.cfl_p.size() != K) state.cfl_p = Eigen::VectorXd::Constant(K, 1.0 / static_cast<double>(K));
  if (!sensed_collision) {
    state.cfl_satisfied = true;
    state.cfl_p.setZero();
    state.cfl_p(state.a) = 1.0;
    return;
  }
  state.cfl_satisfied = false;
  if (K < 2) return;
  state.cfl_p *= 1.0 - kCflBeta;
  state.cfl_p.array() += kCflBeta / static_cast<double>(K - 1);
  state.cfl_p(state.a) -= kCflBeta / static_cast<double>(K - 1);
  state.a = draw_from(state.cfl_p, rng);
}

std::optional<Channel> newbie_join(std::span<const std::uint8_t> s1_sensing, RngStream& rng) {
  std::vector<Channel> available;
  for (std::size_t k = 0; k < s1_sensing.size(); ++k) {
    if (s1_sensing[k] == 0) available.push_back(static_cast<Channel>(k));
  }
  if (available.empty()) return std::nullopt;
  return available[rng.below(available.size())];
}

double p_initiator(double epsilon, int ell) {
  if (ell < 1) fail(ErrorCategory::Domain, "contender count must be at least 1");
  return epsilon * std::pow(1.0 - epsilon, ell - 1);
}

std::int64_t default_cfl_length(Eigen::Index K) {
  return static_cast<std::int64_t>(std::ceil(16.0 * static_cast<double>(K) * std::log(static_cast<double>(K) + 1.0)));
}

}  // namespace csm
