#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace branchmc {

/// Philox4x32-10 counter-based generator.
///
/// The 64-bit key is the run seed; the upper half of the 128-bit counter
/// selects an independent stream (one per batch) and the lower half is the
/// block index within that stream. Two streams with different ids never
/// share a block, whatever order they are consumed in.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Raw bijection, exposed for known-answer tests.
  static Block encrypt(Block counter, Key key);

 private:
  void refill();

  Key key_;
  Block counter_;
  Block out_{};
  int cursor_ = 2;
};

/// One private random stream: engine plus the distributions that carry state.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream) : engine_(seed, stream) {}

  double uniform() { return uniform_(engine_); }
  double gaussian() { return normal_(engine_); }
  Philox4x32& engine() { return engine_; }

 private:
  Philox4x32 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Mixes (seed, index) into a fresh 64-bit seed (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace branchmc
