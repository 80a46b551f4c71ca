#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "csm/core.hpp"
#include "csm/oracle.hpp"

namespace csm {

struct ScheduledEvent {
  std::int64_t slot = 0;  // steady-phase slot; applied at the next super-frame boundary
  UserId user = kNoUser;

  friend bool operator==(const ScheduledEvent&, const ScheduledEvent&) = default;
};

struct ExperimentConfig {
  Eigen::Index K = 0;
  Eigen::Index N_initial = 0;
  std::int64_t T = 0;              // steady-phase horizon in slots (after warm-up)
  std::optional<double> epsilon;   // empty means 1/K
  bool dynamic = false;
  std::vector<ScheduledEvent> arrivals;
  std::vector<ScheduledEvent> departures;
  std::optional<std::int64_t> cfl_length;  // empty means default_cfl_length(K)
  std::uint64_t seed = 0;
  int repetitions = 1;

  double resolved_epsilon() const;
  std::int64_t resolved_cfl_length() const;
  std::int64_t frame_length() const;
  /// Whole super-frames covering T (T is padded up to a multiple).
  std::int64_t super_frames() const;
  std::int64_t padded_horizon() const { return super_frames() * frame_length(); }
  /// Users ever present: initial users plus one per arrival.
  Eigen::Index population() const;
  /// Super-frame boundary at which a slot-stamped event takes effect.
  std::int64_t boundary_of(std::int64_t slot) const;
};

/// Throws InvalidConfiguration / AssumptionViolation for schedules the
/// protocol cannot honor.
void validate(const ExperimentConfig& config, Eigen::Index population);

enum class EventKind : std::uint8_t {
  Election,
  Swap,
  MoveToVacant,
  Arrival,
  NewbieJoin,
  NewbieWait,
  Departure,
};

const char* to_string(EventKind kind) noexcept;

struct TraceEvent {
  EventKind kind;
  std::int64_t super_frame;
  UserId user;
  UserId other = kNoUser;     // responder for swaps
  Channel from = kNoChannel;
  Channel to = kNoChannel;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

using ChannelHistory = Eigen::Matrix<Channel, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct RunTrace {
  Eigen::Index K = 0;
  Eigen::Index population = 0;
  std::int64_t frame_length = 0;
  std::int64_t cfl_length = 0;
  std::uint64_t seed = 0;
  bool dynamic = false;

  /// Row m: every user's channel at the end of super-frame m (kNoChannel
  /// when absent or still waiting).
  ChannelHistory channel_history;
  /// Cumulative realized system reward at the end of each super-frame.
  std::vector<double> cum_reward;
  std::vector<TraceEvent> events;

  bool cfl_orthogonal = false;
  /// Every user's channel when warm-up ends (kNoChannel for late joiners).
  std::vector<Channel> cfl_assignment;
  /// Steady-phase slots other than S3 with two or more transmitters on a channel.
  std::int64_t unintended_collisions = 0;
  std::int64_t probe_collisions = 0;
  std::int64_t probes = 0;

  std::int64_t super_frames() const { return channel_history.rows(); }
  Configuration configuration_at(std::int64_t super_frame) const;

};

bool operator==(const RunTrace& lhs, const RunTrace& rhs);

/// Runs one repetition with the given seed and reward model.
RunTrace run_experiment(const ExperimentConfig& config, const RewardModel& model);

/// Draws the reward model from (config.seed, Model stream) first.
RewardModel draw_model_for(const ExperimentConfig& config);
RunTrace run_experiment(const ExperimentConfig& config);

struct RunOutput {
  std::uint64_t seed;
  RewardModel model;
  RunTrace trace;
};

using ModelFactory = std::function<RewardModel(const ExperimentConfig& run_config)>;

/// Repetition i uses seed config.seed + i. Runs are spread over `workers`
/// threads and returned in repetition order.
std::vector<RunOutput> run_repetitions(const ExperimentConfig& config, const ModelFactory& model_for,
                                       unsigned workers);

}  // namespace csm
