#pragma once

// Counter-based random numbers (Philox4x32-10). A stream is fully
// determined by a 64-bit key and three 32-bit coordinates, so any
// replication can be regenerated independently of execution order.

#include <array>
#include <cstdint>
#include <limits>

namespace trifactor {

using Philox4x32 = std::array<std::uint32_t, 4>;

/// Ten-round Philox bijection of `counter` under `key`.
Philox4x32 philox4x32_10(Philox4x32 counter, std::array<std::uint32_t, 2> key) noexcept;

/// Stream tags for the simulation's independent draws.
enum class StreamTag : std::uint32_t {
  GlobalFactors = 1,
  ExporterFactors = 2,
  ImporterFactors = 3,
  Errors = 4,
  GlobalLoadings = 5,
  ExporterLoadings = 6,
  ImporterLoadings = 7,
  Auxiliary = 8,
};

class CounterRng {
 public:
  using result_type = std::uint32_t;

  CounterRng(std::uint64_t seed, std::uint32_t cell, std::uint32_t replication,
             std::uint32_t tag) noexcept;
  CounterRng(std::uint64_t seed, std::uint32_t cell, std::uint32_t replication,
             StreamTag tag) noexcept
      : CounterRng(seed, cell, replication, static_cast<std::uint32_t>(tag)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;
  std::uint64_t next_u64() noexcept;

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() noexcept;

  /// Standard normal via Box-Muller; pairs are cached.
  double normal() noexcept;

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  Philox4x32 counter_;  // [block, tag, replication, cell]
  Philox4x32 buffer_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace trifactor
