#include "csm/engine.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>

#include "csm/agent.hpp"
#include "csm/protocol.hpp"

namespace csm {

double ExperimentConfig::resolved_epsilon() const {
  return epsilon ? *epsilon : default_epsilon(K);
}

std::int64_t ExperimentConfig::resolved_cfl_length() const {
  return cfl_length ? *cfl_length : default_cfl_length(K);
}

std::int64_t ExperimentConfig::frame_length() const { return super_frame_length(K, dynamic); }

std::int64_t ExperimentConfig::super_frames() const {
  const auto F = frame_length();
  return (T + F - 1) / F;
}

Eigen::Index ExperimentConfig::population() const {
  return N_initial + static_cast<Eigen::Index>(arrivals.size());
}

std::int64_t ExperimentConfig::boundary_of(std::int64_t slot) const {
  const auto F = frame_length();
  return (slot + F - 1) / F;
}

void validate(const ExperimentConfig& config, Eigen::Index population) {
  auto invalid = [](const std::string& what) { fail(ErrorCategory::InvalidConfiguration, what); };
  if (config.K < 1) invalid("K must be positive");
  if (config.N_initial < 1) invalid("N must be positive");
  if (config.N_initial > config.K) {
    invalid("N=" + std::to_string(config.N_initial) + " exceeds K=" + std::to_string(config.K));
  }
  if (config.T < 1) invalid("horizon T must be positive");
  if (config.repetitions < 1) invalid("repetitions must be positive");
  if (config.epsilon && !(*config.epsilon > 0.0 && *config.epsilon <= 1.0)) {
    invalid("epsilon must lie in (0,1]");
  }
  if (config.cfl_length && *config.cfl_length < 0) invalid("cfl_length must be nonnegative");
  if (population < config.population()) {
    invalid("reward model has " + std::to_string(population) + " users but the schedule needs " +
            std::to_string(config.population()));
  }
  if (!config.dynamic && (!config.arrivals.empty() || !config.departures.empty())) {
    invalid("arrivals and departures require the dynamic layout");
  }

  const auto frames = config.super_frames();
  std::map<UserId, std::int64_t> arrival_boundary;
  std::set<std::int64_t> arrival_frames;
  for (const auto& ev : config.arrivals) {
    if (ev.slot < 0) invalid("event slots must be nonnegative");
    if (ev.user < config.N_initial || ev.user >= population) {
      invalid("arriving user " + std::to_string(ev.user) + " is not a late-joining user id");
    }
    const auto m = config.boundary_of(ev.slot);
    if (m >= frames) invalid("arrival of user " + std::to_string(ev.user) + " is beyond the horizon");
    if (!arrival_boundary.emplace(ev.user, m).second) {
      invalid("user " + std::to_string(ev.user) + " arrives twice");
    }
    if (!arrival_frames.insert(m).second) {
      fail(ErrorCategory::AssumptionViolation,
           "two arrivals fall into super-frame " + std::to_string(m) + "; at most one is allowed");
    }
  }

  std::map<std::int64_t, int> delta_live;
  std::set<UserId> departed;
  for (const auto& ev : config.departures) {
    if (ev.slot < 0) invalid("event slots must be nonnegative");
    const auto m = config.boundary_of(ev.slot);
    if (m >= frames) invalid("departure of user " + std::to_string(ev.user) + " is beyond the horizon");
    if (!departed.insert(ev.user).second) invalid("user " + std::to_string(ev.user) + " departs twice");
    if (ev.user < 0 || ev.user >= population) invalid("departing user id out of range");
    if (ev.user >= config.N_initial) {
      const auto it = arrival_boundary.find(ev.user);
      if (it == arrival_boundary.end() || it->second >= m) {
        invalid("user " + std::to_string(ev.user) + " departs before arriving");
      }
    }
    --delta_live[m];
  }
  for (const auto& [user, m] : arrival_boundary) ++delta_live[m];
  auto live = static_cast<std::int64_t>(config.N_initial);
  for (const auto& [m, d] : delta_live) {
    live += d;
    if (live > config.K) invalid("more than K users live at super-frame " + std::to_string(m));
  }
}

const char* to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::Election: return "election";
    case EventKind::Swap: return "swap";
    case EventKind::MoveToVacant: return "move";
    case EventKind::Arrival: return "arrival";
    case EventKind::NewbieJoin: return "join";
    case EventKind::NewbieWait: return "wait";
    case EventKind::Departure: return "departure";
  }
  return "?";
}

Configuration RunTrace::configuration_at(std::int64_t super_frame) const {
  const auto row = channel_history.row(super_frame);
  return Configuration{std::vector<Channel>(row.begin(), row.end())};
}

bool operator==(const RunTrace& lhs, const RunTrace& rhs) {
  return lhs.K == rhs.K && lhs.population == rhs.population && lhs.frame_length == rhs.frame_length &&
         lhs.cfl_length == rhs.cfl_length && lhs.seed == rhs.seed && lhs.dynamic == rhs.dynamic &&
         lhs.channel_history.rows() == rhs.channel_history.rows() &&
         lhs.channel_history.cols() == rhs.channel_history.cols() &&
         lhs.channel_history == rhs.channel_history && lhs.cum_reward == rhs.cum_reward &&
         lhs.events == rhs.events && lhs.cfl_orthogonal == rhs.cfl_orthogonal &&
         lhs.cfl_assignment == rhs.cfl_assignment &&
         lhs.unintended_collisions == rhs.unintended_collisions &&
         lhs.probe_collisions == rhs.probe_collisions && lhs.probes == rhs.probes;
}

namespace {

enum class Presence : std::uint8_t { Absent, Waiting, Live, Gone };

class Simulation {
 public:
  Simulation(const ExperimentConfig& config, const RewardModel& model)
      : config_(config),
        model_(model),
        K_(model.channels()),
        population_(model.users()),
        epsilon_(config.resolved_epsilon()),
        occupied_(static_cast<std::size_t>(K_), 0) {
    for (UserId n = 0; n < population_; ++n) {
      const auto owner = static_cast<std::uint32_t>(n);
      agents_.push_back(make_agent(n, K_));
      presence_.push_back(n < config.N_initial ? Presence::Live : Presence::Absent);
      reward_rng_.emplace_back(config.seed, stream_id(StreamPurpose::Reward, owner));
      flag_rng_.emplace_back(config.seed, stream_id(StreamPurpose::Flag, owner));
      cfl_rng_.emplace_back(config.seed, stream_id(StreamPurpose::Cfl, owner));
      newbie_rng_.emplace_back(config.seed, stream_id(StreamPurpose::Newbie, owner));
    }
    flags_.assign(static_cast<std::size_t>(population_), 0);
    for (const auto& ev : config.arrivals) arrivals_[config.boundary_of(ev.slot)] = ev.user;
    for (const auto& ev : config.departures) departures_[config.boundary_of(ev.slot)].push_back(ev.user);

    trace_.K = K_;
    trace_.population = population_;
    trace_.frame_length = config.frame_length();
    trace_.cfl_length = config.resolved_cfl_length();
    trace_.seed = config.seed;
    trace_.dynamic = config.dynamic;
    trace_.channel_history = ChannelHistory::Constant(config.super_frames(), population_, kNoChannel);
    trace_.cum_reward.reserve(static_cast<std::size_t>(config.super_frames()));
  }

  RunTrace run() {
    warm_up();
    for (std::int64_t m = 0; m < config_.super_frames(); ++m) super_frame(m);
    return std::move(trace_);
  }

 private:
  void warm_up() {
    const auto length = trace_.cfl_length;
    for (UserId n = 0; n < population_; ++n) {
      if (presence_[idx(n)] == Presence::Live) cfl_start(agents_[idx(n)], K_, cfl_rng_[idx(n)]);
    }
    for (std::int64_t slot = 0; slot < length; ++slot) {
      intents_.clear();
      for (UserId n = 0; n < population_; ++n) {
        if (presence_[idx(n)] == Presence::Live) intents_.push_back({n, agents_[idx(n)].a, false});
      }
      resolve_slot_into(model_, intents_, reward_rng_, outcome_);
      for (UserId n = 0; n < population_; ++n) {
        if (presence_[idx(n)] != Presence::Live) continue;
        auto& agent = agents_[idx(n)];
        cfl_step(agent, outcome_.occupancy[idx(agent.a)] >= 2, K_, cfl_rng_[idx(n)]);
      }
    }
    std::vector<int> count(static_cast<std::size_t>(K_), 0);
    bool orthogonal = true;
    for (UserId n = 0; n < population_; ++n) {
      if (presence_[idx(n)] != Presence::Live) continue;
      auto& agent = agents_[idx(n)];
      if (++count[idx(agent.a)] > 1) orthogonal = false;
      agent.phase = Phase::Steady;
    }
    trace_.cfl_orthogonal = orthogonal;
    trace_.cfl_assignment.resize(static_cast<std::size_t>(population_), kNoChannel);
    for (UserId n = 0; n < population_; ++n) {
      if (presence_[idx(n)] == Presence::Live) trace_.cfl_assignment[idx(n)] = agents_[idx(n)].a;
    }
  }

  void apply_events(std::int64_t m) {
    if (auto it = departures_.find(m); it != departures_.end()) {
      for (UserId n : it->second) {
        auto& agent = agents_[idx(n)];
        trace_.events.push_back({EventKind::Departure, m, n, kNoUser, agent.a, kNoChannel});
        presence_[idx(n)] = Presence::Gone;
        agent.a = kNoChannel;
      }
    }
    if (auto it = arrivals_.find(m); it != arrivals_.end()) {
      const UserId n = it->second;
      presence_[idx(n)] = Presence::Waiting;
      agents_[idx(n)].phase = Phase::NewbieWait;
      trace_.events.push_back({EventKind::Arrival, m, n});
    }
  }

  void super_frame(std::int64_t m) {
    const std::int64_t t0 = m * trace_.frame_length;
    apply_events(m);

    joined_this_frame_ = kNoUser;
    for (UserId n = 0; n < population_; ++n) {
      auto& agent = agents_[idx(n)];
      agent.initiator = false;
      agent.pref_ptr = 0;
      if (presence_[idx(n)] != Presence::Live) continue;
      auto ranking = rank_channels(agent, t0);
      agent.pref_list = std::move(ranking.pref_list);
      agent.index = std::move(ranking.index);
    }

    // S1: availability snapshot; everyone live transmits on her channel.
    intents_.clear();
    for (UserId n = 0; n < population_; ++n) {
      if (presence_[idx(n)] == Presence::Live) intents_.push_back({n, agents_[idx(n)].a, true});
    }
    step(SlotKind::S1);
    occupied_ = outcome_.sensing;

    if (config_.dynamic) {
      intents_.clear();
      for (UserId n = 0; n < population_; ++n) {
        if (presence_[idx(n)] != Presence::Waiting) continue;
        auto& agent = agents_[idx(n)];
        if (auto channel = newbie_join(occupied_, newbie_rng_[idx(n)])) {
          agent.a = *channel;
          agent.phase = Phase::Steady;
          presence_[idx(n)] = Presence::Live;
          joined_this_frame_ = n;
          auto ranking = rank_channels(agent, t0);
          agent.index = std::move(ranking.index);
          agent.pref_list.clear();
          intents_.push_back({n, *channel, false});
          trace_.events.push_back({EventKind::NewbieJoin, m, n, kNoUser, kNoChannel, *channel});
        } else {
          trace_.events.push_back({EventKind::NewbieWait, m, n});
        }
      }
      step(SlotKind::Sa);
      for (std::size_t k = 0; k < occupied_.size(); ++k) occupied_[k] |= outcome_.sensing[k];
    }

    // S2: flags are transmissions on the flagger's own channel.
    intents_.clear();
    int raised = 0;
    for (UserId n = 0; n < population_; ++n) {
      flags_[idx(n)] = 0;
      if (presence_[idx(n)] != Presence::Live || n == joined_this_frame_) continue;
      auto& agent = agents_[idx(n)];
      flags_[idx(n)] = initiator_flag(agent.pref_list, epsilon_, flag_rng_[idx(n)]);
      if (flags_[idx(n)]) {
        intents_.push_back({n, agent.a, true});
        ++raised;
      }
    }
    step(SlotKind::S2);
    const int sensed_flags = static_cast<int>(
        std::count(outcome_.sensing.begin(), outcome_.sensing.end(), std::uint8_t{1}));
    if (sensed_flags != raised) {
      fail(ErrorCategory::ProtocolViolation, "flag transmissions collided in super-frame " + std::to_string(m));
    }

    const auto elected = elect_initiator(flags_);
    Channel initiator_channel = kNoChannel;
    if (elected) {
      auto& initiator = agents_[idx(*elected)];
      initiator.initiator = true;
      initiator.pref_ptr = 1;
      initiator_channel = initiator.a;
      trace_.events.push_back({EventKind::Election, m, *elected, kNoUser, initiator.a, kNoChannel});
    }

    for (Eigen::Index pair = 1; pair < K_; ++pair) {
      mini_frame(m, elected, initiator_channel);
    }

    for (UserId n = 0; n < population_; ++n) {
      if (presence_[idx(n)] == Presence::Live) trace_.channel_history(m, n) = agents_[idx(n)].a;
    }
    trace_.cum_reward.push_back(cum_reward_);
  }

  void mini_frame(std::int64_t m, std::optional<UserId> elected, Channel initiator_channel) {
    UserId prober = kNoUser;
    Channel target = kNoChannel;

    // S3: only the initiator may transmit (a probe); everyone else senses.
    intents_.clear();
    if (!elected) {
      for (UserId n = 0; n < population_; ++n) {
        if (presence_[idx(n)] == Presence::Live) intents_.push_back({n, agents_[idx(n)].a, true});
      }
    } else {
      auto& initiator = agents_[idx(*elected)];
      if (auto next = current_target(initiator)) {
        if (!occupied_[idx(*next)]) {
          const auto result = coordinate_swap_step(initiator, 0, true);
          occupied_[idx(result.previous)] = 0;
          occupied_[idx(result.target)] = 1;
          trace_.events.push_back(
              {EventKind::MoveToVacant, m, *elected, kNoUser, result.previous, result.target});
        } else {
          prober = *elected;
          target = *next;
          intents_.push_back({prober, target, false});
          ++trace_.probes;
        }
      }
    }
    step(SlotKind::S3);

    UserId responder = kNoUser;
    if (prober != kNoUser) {
      for (UserId n = 0; n < population_; ++n) {
        if (n == prober || presence_[idx(n)] != Presence::Live) continue;
        if (outcome_.sensing[idx(agents_[idx(n)].a)]) {
          responder = n;
          break;
        }
      }
    }

    // S4: the approached user answers by transmitting; the rest learn.
    intents_.clear();
    for (UserId n = 0; n < population_; ++n) {
      if (presence_[idx(n)] != Presence::Live || n == prober) continue;
      auto& agent = agents_[idx(n)];
      if (n == responder) {
        if (respond(agent.index, agent.a, initiator_channel)) intents_.push_back({n, agent.a, true});
        continue;
      }
      intents_.push_back({n, agent.a, true});
    }
    step(SlotKind::S4);

    if (prober != kNoUser) {
      const int response = outcome_.sensing[idx(target)];
      const auto result = coordinate_swap_step(agents_[idx(prober)], response, false);
      if (result.action == SwapAction::Swapped) {
        if (responder == kNoUser) {
          fail(ErrorCategory::ProtocolViolation, "swap acknowledged on a channel without a responder");
        }
        agents_[idx(responder)].a = result.previous;
        trace_.events.push_back({EventKind::Swap, m, prober, responder, result.previous, result.target});
      }
    }
  }

  /// Resolves the current intents and feeds rewards back to the agents.
  void step(SlotKind kind) {
    resolve_slot_into(model_, intents_, reward_rng_, outcome_);
    if (outcome_.any_collision()) {
      if (kind == SlotKind::S3) {
        ++trace_.probe_collisions;
      } else {
        ++trace_.unintended_collisions;
      }
    }
    // Rewards are listed in intent order, skipping silent intents.
    std::size_t j = 0;
    for (const auto& intent : intents_) {
      if (intent.channel == kNoChannel) continue;
      const auto& reward = outcome_.rewards[j++];
      cum_reward_ += reward.value;
      if (intent.counts_as_sample) transmit_and_learn(agents_[idx(intent.user)], reward.value);
    }
  }

  static std::size_t idx(std::int64_t i) { return static_cast<std::size_t>(i); }

  const ExperimentConfig& config_;
  const RewardModel& model_;
  Eigen::Index K_;
  Eigen::Index population_;
  double epsilon_;

  std::vector<AgentState> agents_;
  std::vector<Presence> presence_;
  std::vector<RngStream> reward_rng_;
  std::vector<RngStream> flag_rng_;
  std::vector<RngStream> cfl_rng_;
  std::vector<RngStream> newbie_rng_;
  std::map<std::int64_t, UserId> arrivals_;
  std::map<std::int64_t, std::vector<UserId>> departures_;

  std::vector<TransmissionIntent> intents_;
  MediumOutcome outcome_;
  std::vector<std::uint8_t> occupied_;
  std::vector<int> flags_;
  UserId joined_this_frame_ = kNoUser;
  double cum_reward_ = 0.0;
  RunTrace trace_;
};

}  // namespace

RunTrace run_experiment(const ExperimentConfig& config, const RewardModel& model) {
  validate(config, model.users());
  if (model.channels() != config.K) {
    fail(ErrorCategory::InvalidConfiguration, "reward model channel count differs from K");
  }
  return Simulation(config, model).run();
}

RewardModel draw_model_for(const ExperimentConfig& config) {
  RngStream rng(config.seed, stream_id(StreamPurpose::Model));
  return draw_reward_matrix(config.K, config.population(), rng);
}

RunTrace run_experiment(const ExperimentConfig& config) {
  validate(config, config.population());
  return run_experiment(config, draw_model_for(config));
}

std::vector<RunOutput> run_repetitions(const ExperimentConfig& config, const ModelFactory& model_for,
                                       unsigned workers) {
  const auto count = static_cast<std::size_t>(config.repetitions);
  std::vector<std::optional<RunOutput>> slots(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        ExperimentConfig run_config = config;
        run_config.seed = config.seed + i;
        run_config.repetitions = 1;
        RewardModel model = model_for(run_config);
        RunTrace trace = run_experiment(run_config, model);
        slots[i].emplace(RunOutput{run_config.seed, std::move(model), std::move(trace)});
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (first_error) std::rethrow_exception(first_error);

  std::vector<RunOutput> out;
  out.reserve(count);
  for (auto& slot : slots) out.push_back(std::move(*slot));
  return out;
}

}  // namespace csm
