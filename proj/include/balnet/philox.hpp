#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Each draw is
// a pure function of (key, counter), so parallel schedules cannot change the
// numbers a neuron sees.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace balnet {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter generate(Counter ctr, Key key) {
    ctr = round(ctr, key);
    for (int r = 1; r < 10; ++r) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
      ctr = round(ctr, key);
    }
    return ctr;
  }

  static constexpr Key key_from_seed(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Counter round(const Counter& c, const Key& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// 53-bit uniform in [0, 1) from two 32-bit words.
inline double uniform53(std::uint32_t hi, std::uint32_t lo) {
  return (static_cast<double>(hi >> 5) * 67108864.0 + static_cast<double>(lo >> 6)) * (1.0 / 9007199254740992.0);
}

/// Purpose tags keep different uses of the same (neuron, step) apart.
enum class StreamTag : std::uint32_t {
  Increment = 0,
  InitialCondition = 1,
  Reference = 2,
};

struct NormalPair {
  double first;
  double second;
};

/// Two independent standard normals (Box–Muller) for counter
/// (index, step, tag) under `seed`.
inline NormalPair normal_pair(std::uint64_t seed, std::uint32_t index, std::uint64_t step, StreamTag tag) {
  const Philox4x32::Counter ctr{index, static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32),
                                static_cast<std::uint32_t>(tag)};
  const auto out = Philox4x32::generate(ctr, Philox4x32::key_from_seed(seed));
  const double u1 = 1.0 - uniform53(out[0], out[1]);  // (0, 1]
  const double u2 = uniform53(out[2], out[3]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

}  // namespace balnet
