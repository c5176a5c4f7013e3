#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace mrs {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
// A stream is identified by a 64-bit key; within a stream, blocks are
// addressed by a 64-bit "row" and a 64-bit running block index, so
// independent rows can be generated in any order with identical results.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key) noexcept;
};

// Uniform random stream on top of Philox. Satisfies
// UniformRandomBitGenerator with 32-bit output.
class Rng {
public:
    using result_type = std::uint32_t;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return 0xFFFFFFFFu; }

    explicit Rng(std::uint64_t key, std::uint64_t row = 0) noexcept;

    result_type operator()() noexcept;

    // Uniform on the open interval (0, 1) with 53 random bits.
    double uniform() noexcept;

    // Uniform integer in [0, bound) by rejection; bound > 0.
    std::uint64_t below(std::uint64_t bound) noexcept;

    std::uint64_t key() const noexcept { return key_; }

private:
    void refill() noexcept;

    std::uint64_t key_;
    std::uint64_t row_;
    std::uint64_t block_ = 0;
    Philox4x32::Counter buffer_{};
    int used_ = 4;
};

// Deterministic 64-bit mixing used to derive stream keys from seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) noexcept;
std::uint64_t derive_key(std::uint64_t seed, std::string_view stream) noexcept;

inline constexpr std::string_view kRngName = "philox4x32-10";

} // namespace mrs
