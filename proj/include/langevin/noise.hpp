#pragma once

// Counter-based Gaussian noise. Every value is a pure function of
// (seed, chain, step, stream, index), so chains can run in any order or in
// parallel and produce bitwise-identical output.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace langevin {

/// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as
/// 1, 2, 3", SC'11).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)} {}

  Counter operator()(Counter ctr) const {
    Key key = key_;
    for (int round = 0; round < 10; ++round) {
      ctr = single_round(ctr, key);
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static Counter single_round(const Counter& c, const Key& k) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    return {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0],
            static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1],
            static_cast<std::uint32_t>(p0)};
  }

  Key key_;
};

/// Independent noise families drawn from one master seed.
enum class NoiseStream : std::uint32_t {
  kStep = 0,           // Euler-Maruyama increments
  kInterpolation = 1,  // within-step interpolation draws
  kInit = 2,           // initial state
  kAuxiliary = 3,      // test/estimator use (seed splitting, jitter)
};

/// Fills `out` with standard normals for one (chain, step, stream) cell.
/// `sub` distinguishes several draws inside the same cell (e.g. quadrature
/// nodes) and is folded into the block counter.
class CounterNormals {
 public:
  explicit CounterNormals(std::uint64_t seed) : gen_(seed) {}

  void fill(std::span<double> out, std::uint64_t chain, std::uint64_t step,
            NoiseStream stream, std::uint32_t sub = 0) const {
    // Each Philox block yields 128 bits: two 64-bit uniforms, two normals.
    const std::uint32_t tag =
        static_cast<std::uint32_t>(stream) |
        (static_cast<std::uint32_t>(chain >> 32) << 2);
    std::size_t i = 0;
    for (std::uint32_t block = 0; i < out.size(); ++block) {
      const Philox4x32::Counter ctr{
          block + (sub << 16), static_cast<std::uint32_t>(step),
          static_cast<std::uint32_t>(chain),
          tag ^ (static_cast<std::uint32_t>(step >> 32) << 16)};
      const auto r = gen_(ctr);
      const double u1 = to_open_unit((std::uint64_t{r[0]} << 32) | r[1]);
      const double u2 = to_open_unit((std::uint64_t{r[2]} << 32) | r[3]);
      const double radius = std::sqrt(-2.0 * std::log(u1));
      const double angle = 2.0 * std::numbers::pi * u2;
      out[i++] = radius * std::cos(angle);
      if (i < out.size()) out[i++] = radius * std::sin(angle);
    }
  }

  /// Uniform in (0, 1) for the same addressing scheme.
  double uniform(std::uint64_t chain, std::uint64_t step, NoiseStream stream,
                 std::uint32_t sub = 0) const {
    const Philox4x32::Counter ctr{sub, static_cast<std::uint32_t>(step),
                                  static_cast<std::uint32_t>(chain),
                                  static_cast<std::uint32_t>(stream) | 0x80000000u};
    const auto r = gen_(ctr);
    return to_open_unit((std::uint64_t{r[0]} << 32) | r[1]);
  }

 private:
  static double to_open_unit(std::uint64_t bits) {
    // 53 high bits, shifted by half an ulp so 0 is never produced.
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  Philox4x32 gen_;
};

}  // namespace langevin
