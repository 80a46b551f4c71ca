#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "csm/core.hpp"

namespace csm {

enum class Phase : std::uint8_t { Cfl, Steady, NewbieWait };

using CountVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// UCB indices of every channel at ranking time `t`. Unsampled channels
/// carry +infinity.
struct UcbIndexVector {
  Eigen::VectorXd values;
  std::int64_t t = 1;

  double operator[](Channel k) const { return values(k); }
};

/// One user's local knowledge and protocol state.
struct AgentState {
  UserId id = kNoUser;
  Eigen::VectorXd r;  // reward sums per channel
  CountVector s;      // sample counts per channel
  Channel a = kNoChannel;
  std::vector<Channel> pref_list;  // channels with index strictly above I[a], best first
  int pref_ptr = 0;                // 1-based into pref_list; 0 means inactive
  Phase phase = Phase::Cfl;
  bool cfl_satisfied = false;
  Eigen::VectorXd cfl_p;           // warm-up channel distribution
  bool initiator = false;          // elected for the current super-frame
  UcbIndexVector index;            // indices from the most recent ranking
};

AgentState make_agent(UserId id, Eigen::Index K, Phase phase = Phase::Cfl);

struct Ranking {
  std::vector<Channel> pref_list;
  UcbIndexVector index;
};

/// I_k = r_k/s_k + sqrt(2 ln t / s_k), descending sort with ties to the
/// lower channel; pref_list keeps the prefix strictly better than the
/// current channel. t < 1 is treated as 1.
Ranking rank_channels(const AgentState& state, std::int64_t t);

/// Bernoulli(epsilon) when the user wants to move, otherwise 0 (no draw).
int initiator_flag(std::span<const Channel> pref_list, double epsilon, RngStream& rng);

/// The unique flagged user, or nothing for zero or several flags.
std::optional<UserId> elect_initiator(std::span<const int> flags);

enum class SwapAction : std::uint8_t { MovedToVacant, Swapped, Advanced, Exhausted };

struct SwapStep {
  SwapAction action;
  Channel target;      // channel examined in this mini-frame
  Channel previous;    // initiator's channel before the step
};

/// The channel the initiator examines in the current mini-frame, if any.
std::optional<Channel> current_target(const AgentState& state);

/// Applies one mini-frame of coordination for the elected initiator:
/// a vacant target is taken directly, otherwise the sensed S4 response
/// decides between swapping and advancing the pointer.
/// Throws ProtocolViolation unless `state` is the initiator with an active pointer.
SwapStep coordinate_swap_step(AgentState& state, int response, bool channel_available);

/// 1 iff I[own] <= I[initiator] (ties accept).
int respond(const UcbIndexVector& index, Channel own_channel, Channel initiator_channel);

void transmit_and_learn(AgentState& state, double reward);

/// Share of warm-up probability moved off a collided channel.
inline constexpr double kCflBeta = 0.1;

/// First warm-up slot: uniform distribution, uniform channel, unsatisfied.
void cfl_start(AgentState& state, Eigen::Index K, RngStream& rng);

/// Post-slot warm-up update (communication-free learning). A clean slot
/// satisfies the user and pins her distribution to her channel. A collision
/// unsatisfies her, moves kCflBeta of the mass from her channel evenly onto
/// the others, and re-draws her channel from the result.
void cfl_step(AgentState& state, bool sensed_collision, Eigen::Index K, RngStream& rng);

/// Uniform choice among channels that were silent in S1, or nothing.
std::optional<Channel> newbie_join(std::span<const std::uint8_t> s1_sensing, RngStream& rng);

/// Probability that one given contender among `ell` is the sole flagger.
double p_initiator(double epsilon, int ell);

inline double default_epsilon(Eigen::Index K) { return 1.0 / static_cast<double>(K); }

/// ceil(16 K ln(K+1)) warm-up slots.
std::int64_t default_cfl_length(Eigen::Index K);

}  // namespace csm
