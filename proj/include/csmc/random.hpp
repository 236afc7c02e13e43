#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>

#include <boost/random/normal_distribution.hpp>

namespace csmc {

namespace detail {

constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
constexpr std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) noexcept
{
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

}  // namespace detail

/// Counter-based random stream.
///
/// A stream is identified by a 64-bit key; draws are Philox blocks indexed by
/// an internal counter, so the output is a pure function of (key, position)
/// and identical on every platform. `fork(id)` derives an independent child
/// stream from the key alone, without advancing the parent. A stream path
/// such as (seed, replicate, iteration, time, purpose) is therefore
/// `RandomStream(seed).fork(replicate).fork(iteration)...`.
///
/// Streams are small value types; copying one replays the same draws, which is
/// how common random numbers are shared between the two sides of a coupling.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) noexcept
        : key_(detail::mix64(seed + 0x9e3779b97f4a7c15ull))
    {
    }

    static RandomStream from_path(std::uint64_t seed, std::initializer_list<std::uint64_t> path)
    {
        RandomStream s(seed);
        for (auto id : path) s = s.fork(id);
        return s;
    }

    [[nodiscard]] RandomStream fork(std::uint64_t id) const noexcept
    {
        RandomStream child(0);
        const std::uint64_t h = detail::mix64(id * 0xd1b54a32d192ed03ull + 0x8cb92ba72f3d8dd7ull);
        child.key_ = detail::mix64(key_ ^ h) + (key_ << 7 | key_ >> 57);
        return child;
    }

    [[nodiscard]] RandomStream fork(std::uint64_t a, std::uint64_t b) const noexcept
    {
        return fork(a).fork(b);
    }

    std::uint64_t next_u64() noexcept
    {
        if (buffered_ == 0) refill();
        return buffer_[--buffered_];
    }

    /// Computes the next block now. Copies made afterwards share it, so
    /// replaying a copied stream does not recompute it. Draws are unchanged.
    void prefetch() noexcept
    {
        if (buffered_ == 0) refill();
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on the open interval (0, 1).
    double uniform_open() noexcept
    {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal by the ziggurat method: one 64-bit draw in the common
    /// case, more when the first point is rejected.
    double normal() { return boost::random::normal_distribution<double>()(*this); }

    // UniformRandomBitGenerator interface.
    using result_type = std::uint64_t;
    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
    result_type operator()() noexcept { return next_u64(); }

    [[nodiscard]] std::uint64_t key() const noexcept { return key_; }
    [[nodiscard]] std::uint64_t position() const noexcept { return counter_ * 2 - buffered_; }

    friend bool operator==(const RandomStream& a, const RandomStream& b) noexcept
    {
        return a.key_ == b.key_ && a.position() == b.position();
    }

  private:
    void refill() noexcept
    {
        const std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(counter_),
                                               static_cast<std::uint32_t>(counter_ >> 32), 0u, 0u};
        const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(key_),
                                               static_cast<std::uint32_t>(key_ >> 32)};
        const auto out = detail::philox4x32(ctr, key);
        ++counter_;
        buffer_[1] = (std::uint64_t{out[0]} << 32) | out[1];
        buffer_[0] = (std::uint64_t{out[2]} << 32) | out[3];
        buffered_ = 2;
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int buffered_ = 0;
};

}  // namespace csmc
