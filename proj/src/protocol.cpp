#include "csm/protocol.hpp"

#include <algorithm>
#include <string>

namespace csm {

const char* to_string(SlotKind kind) noexcept {
  switch (kind) {
    case SlotKind::S1: return "S1";
    case SlotKind::S2: return "S2";
    case SlotKind::Sa: return "Sa";
    case SlotKind::S3: return "S3";
    case SlotKind::S4: return "S4";
  }
  return "?";
}

SlotRole slot_kind(std::int64_t t, std::int64_t K, bool dynamic) {
  const std::int64_t period = super_frame_length(K, dynamic);
  const std::int64_t offset = ((t % period) + period) % period;
  const std::int64_t header = dynamic ? 3 : 2;
  if (offset == 0) return {SlotKind::S1, 0};
  if (dynamic && offset == 1) return {SlotKind::Sa, 0};
  if (offset == header - 1) return {SlotKind::S2, 0};
  const auto pair = offset - header;
  return {pair % 2 == 0 ? SlotKind::S3 : SlotKind::S4, static_cast<int>(pair / 2 + 1)};
}

bool MediumOutcome::any_collision() const noexcept {
  return std::any_of(occupancy.begin(), occupancy.end(), [](int c) { return c >= 2; });
}

namespace {

template <typename DrawFor>
void resolve_with(const RewardModel& model, std::span<const TransmissionIntent> intents,
                  DrawFor&& draw_for, MediumOutcome& out) {
  const auto K = static_cast<std::size_t>(model.channels());
  out.occupancy.assign(K, 0);
  out.sensing.assign(K, 0);
  out.rewards.clear();

  thread_local std::vector<std::uint8_t> seen;
  seen.assign(static_cast<std::size_t>(model.users()), 0);
  for (const auto& intent : intents) {
    if (intent.user < 0 || intent.user >= model.users()) {
      fail(ErrorCategory::Index, "intent for unknown user " + std::to_string(intent.user));
    }
    if (seen[static_cast<std::size_t>(intent.user)]++) {
      fail(ErrorCategory::ProtocolViolation,
           "user " + std::to_string(intent.user) + " submitted two intents in one slot");
    }
    if (intent.channel == kNoChannel) continue;
    model.check_indices(intent.user, intent.channel);
    ++out.occupancy[static_cast<std::size_t>(intent.channel)];
  }
  for (std::size_t k = 0; k < K; ++k) out.sensing[k] = out.occupancy[k] >= 1 ? 1 : 0;

  for (const auto& intent : intents) {
    if (intent.channel == kNoChannel) continue;
    const bool collided = out.occupancy[static_cast<std::size_t>(intent.channel)] >= 2;
    int value = 0;
    if (!collided) value = draw_for(intent.user).bernoulli(model.mean(intent.user, intent.channel)) ? 1 : 0;
    out.rewards.push_back({intent.user, intent.channel, value, collided});
  }
}

}  // namespace

MediumOutcome resolve_slot(const RewardModel& model, std::span<const TransmissionIntent> intents,
                           RngStream& rng) {
  MediumOutcome out;
  resolve_with(model, intents, [&](UserId) -> RngStream& { return rng; }, out);
  return out;
}

MediumOutcome resolve_slot(const RewardModel& model, std::span<const TransmissionIntent> intents,
                           std::span<RngStream> streams) {
  MediumOutcome out;
  resolve_slot_into(model, intents, streams, out);
  return out;
}

void resolve_slot_into(const RewardModel& model, std::span<const TransmissionIntent> intents,
                       std::span<RngStream> streams, MediumOutcome& out) {
  if (streams.size() < static_cast<std::size_t>(model.users())) {
    fail(ErrorCategory::Index, "resolve_slot needs one reward stream per user");
  }
  resolve_with(
      model, intents, [&](UserId n) -> RngStream& { return streams[static_cast<std::size_t>(n)]; },
      out);
}

}  // namespace csm
