#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace outage {

/// Identifies one reproducible random stream. Streams that differ in
/// stream_id use different Philox keys and are statistically independent.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
};

/// Philox4x64-10 counter-based generator (Salmon et al., "Parallel random
/// numbers: as easy as 1, 2, 3"). The 128-bit key is (seed, stream_id); the
/// counter is (block, substream, phase, 0). Any (stream, phase, substream)
/// triple addresses a disjoint, reproducible sequence without jumping.
class Philox4x64 {
public:
    using result_type = std::uint64_t;
    using Block = std::array<std::uint64_t, 4>;
    using Key = std::array<std::uint64_t, 2>;

    explicit Philox4x64(RngStream stream, std::uint64_t phase = 0, std::uint64_t substream = 0) noexcept
        : key_{stream.seed, stream.stream_id}, counter_{0, substream, phase, 0} {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (index_ == 4) {
            buffer_ = encrypt(counter_, key_);
            ++counter_[0];
            index_ = 0;
        }
        return buffer_[index_++];
    }

    /// The raw 10-round block function.
    static Block encrypt(Block counter, Key key) noexcept;

private:
    Key key_;
    Block counter_;
    Block buffer_{};
    int index_ = 4;
};

using Engine = Philox4x64;

/// Uniform double on the open interval (0, 1) with 53 random bits.
inline double uniform_open01(Engine& eng) noexcept {
    return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace outage
