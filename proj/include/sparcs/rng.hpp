#pragma once

// Counter-based random streams.
//
// Philox4x32-10 (Salmon et al., SC'11) keyed by a 64-bit master seed. The
// 128-bit counter is split into a 64-bit stream id (high words) and a 64-bit
// block index (low words), so every (seed, stream) pair is an independent,
// reproducible sequence and parallel trials never share state.
//
// Normals use the Box-Muller transform on 53-bit uniforms; nothing here
// depends on the standard library's implementation-defined distributions.

#include <array>
#include <cstdint>
#include <string_view>

namespace sparcs {

inline constexpr std::string_view kRngAlgorithm = "philox4x32-10/box-muller";

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// One Philox4x32-10 block.
PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept;

/// Stream purposes inside one trial. Values are part of the reproducibility
/// contract: changing them changes every experiment output.
enum class StreamPurpose : std::uint32_t {
  Design = 1,
  Coefficients = 2,
  Noise = 3,
  Stage2 = 4,
  TestSet = 5,
  TestNoise = 6,
  Mixing = 7,
  Support = 8,
  Sphere = 9,
};

/// Stream id for (trial, purpose). Trials up to 2^56 are distinct.
constexpr std::uint64_t stream_id(std::uint64_t trial, StreamPurpose purpose) noexcept {
  return (trial << 8) | static_cast<std::uint64_t>(purpose);
}

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint32_t next_u32() noexcept;
  std::uint64_t next_u64() noexcept;

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept;

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept;

  double normal() noexcept;

  /// Gamma(shape, 1) via Marsaglia-Tsang.
  double gamma(double shape) noexcept;

  /// Chi-square with dof degrees of freedom.
  double chi_square(double dof) noexcept { return 2.0 * gamma(0.5 * dof); }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  PhiloxKey key_;
  std::uint64_t block_ = 0;
  PhiloxCounter buffer_{};
  int used_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sparcs
