#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "csm/error.hpp"

namespace csm {

/// Channels and users are zero-based everywhere in the library.
using Channel = std::int32_t;
using UserId = std::int32_t;
inline constexpr Channel kNoChannel = -1;
inline constexpr UserId kNoUser = -1;

/// Row n holds user n's expected reward on each channel.
using RewardMatrix = Eigen::MatrixXd;

/// Purpose tags for per-user random streams. A stream is identified by
/// (purpose, owner), so adding a user never shifts another user's draws.
enum class StreamPurpose : std::uint32_t {
  Model = 1,
  Reward = 2,
  Flag = 3,
  Cfl = 4,
  Newbie = 5,
  Test = 0xfff,
};

constexpr std::uint64_t stream_id(StreamPurpose purpose, std::uint32_t owner = 0) noexcept {
  return (static_cast<std::uint64_t>(purpose) << 32) | owner;
}

/// SplitMix64 finalizer, used only to derive engine seeds from (seed, stream).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// A single-owner deterministic random stream. Draw routines are written
/// out explicitly (instead of std distributions) so sequences do not depend
/// on the standard library implementation.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed), stream_(stream), engine_(splitmix64(seed ^ splitmix64(stream))) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % bound;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

/// Immutable K-channel, N-user Bernoulli reward model.
class RewardModel {
 public:
  /// Validates 1 <= N <= K and entries in [0,1]; throws InvalidConfiguration.
  explicit RewardModel(RewardMatrix mu);

  Eigen::Index channels() const noexcept { return mu_.cols(); }
  Eigen::Index users() const noexcept { return mu_.rows(); }
  const RewardMatrix& mu() const noexcept { return mu_; }
  double mean(UserId n, Channel k) const { return mu_(n, k); }

  void check_indices(UserId n, Channel k) const;

 private:
  RewardMatrix mu_;
};

struct GapStats {
  Eigen::VectorXd delta_n;  // per-user minimal absolute gap
  double delta_min = 0.0;
};

/// Uniform[0,1] entries; rows with an exact tie are redrawn.
RewardModel draw_reward_matrix(Eigen::Index K, Eigen::Index N, RngStream& rng);

/// Bernoulli(mu[n][k]) draw in {0,1}.
int sample_reward(const RewardModel& model, UserId n, Channel k, RngStream& rng);

/// Minimal absolute pairwise gap per row and over rows. Throws
/// DegenerateGap if any row contains a tie.
GapStats delta_min(const RewardModel& model);

}  // namespace csm
