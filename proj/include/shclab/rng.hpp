#pragma once

#include <array>
#include <cstdint>

namespace shclab {

/// Sub-stream tags. Each (seed, tag, index) triple names an independent
/// Philox stream, so the draws seen by path i never depend on how paths are
/// scheduled across workers.
enum class StreamTag : std::uint64_t {
    process = 1,  // increments of the simulated process
    starts = 2,   // start points inside the domain
    pilot = 3,    // pilot runs (shell width)
    normalizer = 4,
    geometry = 5,
    oracle = 6,
    clock = 7,
    bridge = 8,   // bridge-maximum uniforms
    user = 100,
};

/// Philox4x32-10 counter-based generator.
///
/// The key is derived from (seed, tag); the high half of the counter holds
/// the stream index and the low half counts 128-bit blocks, so a stream can
/// produce 2^64 blocks before wrapping.
class RngStream {
  public:
    RngStream(std::uint64_t seed, StreamTag tag, std::uint64_t index);
    RngStream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index);

    std::uint64_t next_u64();

    /// Uniform on the open interval (0, 1).
    double uniform();
    /// Uniform on (lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal (Box-Muller, second variate cached).
    double normal();
    /// Exp(1).
    double exponential();

    /// Number of 64-bit words consumed so far.
    std::uint64_t words_drawn() const { return words_drawn_; }

  private:
    void refill();

    std::array<std::uint32_t, 2> key_{};
    std::array<std::uint32_t, 4> counter_{};
    std::array<std::uint64_t, 2> block_{};
    int block_pos_ = 2;
    std::uint64_t words_drawn_ = 0;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

/// Raw Philox4x32-10 bijection, exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace shclab
