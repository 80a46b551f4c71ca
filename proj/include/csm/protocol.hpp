#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "csm/core.hpp"

namespace csm {

enum class SlotKind : std::uint8_t { S1, S2, Sa, S3, S4 };

const char* to_string(SlotKind kind) noexcept;

struct SlotRole {
  SlotKind kind = SlotKind::S1;
  int mini_frame = 0;  // 1..K-1 for S3/S4, 0 otherwise

  friend bool operator==(const SlotRole&, const SlotRole&) = default;
};

/// 2K for the static layout [S1, S2, (S3,S4)x(K-1)];
/// 2K+1 for the dynamic layout [S1, Sa, S2, (S3,S4)x(K-1)].
constexpr std::int64_t super_frame_length(std::int64_t K, bool dynamic) noexcept {
  return 2 * K + (dynamic ? 1 : 0);
}

/// Role of steady-phase slot t (t = 0 is the first slot after warm-up).
SlotRole slot_kind(std::int64_t t, std::int64_t K, bool dynamic);

struct TransmissionIntent {
  UserId user = kNoUser;
  Channel channel = kNoChannel;  // kNoChannel means silent
  bool counts_as_sample = true;
};

struct MediumOutcome {
  std::vector<int> occupancy;       // transmitters per channel
  std::vector<std::uint8_t> sensing;  // 1 iff occupancy >= 1
  /// One entry per transmitting intent, in intent order.
  struct Reward {
    UserId user;
    Channel channel;
    int value;
    bool collided;
  };
  std::vector<Reward> rewards;

  bool any_collision() const noexcept;
};

/// Resolves one slot on the shared medium. Lone transmitters draw
/// Bernoulli rewards from `rng`; colliders get 0; silent users get no entry.
/// Throws ProtocolViolation on a duplicated user.
MediumOutcome resolve_slot(const RewardModel& model, std::span<const TransmissionIntent> intents,
                           RngStream& rng);

/// Same rule, but each user draws from her own stream (`streams[user]`).
MediumOutcome resolve_slot(const RewardModel& model, std::span<const TransmissionIntent> intents,
                           std::span<RngStream> streams);

/// Buffer-reusing form of the per-user-stream overload, for the slot loop.
void resolve_slot_into(const RewardModel& model, std::span<const TransmissionIntent> intents,
                       std::span<RngStream> streams, MediumOutcome& out);

}  // namespace csm
