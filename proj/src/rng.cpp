#include "mrs/rng.hpp"

namespace mrs {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t prod = std::uint64_t{a} * b;
    hi = static_cast<std::uint32_t>(prod >> 32);
    lo = static_cast<std::uint32_t>(prod);
}

} // namespace

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

Rng::Rng(std::uint64_t key, std::uint64_t row) noexcept : key_(key), row_(row) {}

void Rng::refill() noexcept {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                  static_cast<std::uint32_t>(row_), static_cast<std::uint32_t>(row_ >> 32)};
    const Philox4x32::Key key{static_cast<std::uint32_t>(key_), static_cast<std::uint32_t>(key_ >> 32)};
    buffer_ = Philox4x32::block(ctr, key);
    ++block_;
    used_ = 0;
}

Rng::result_type Rng::operator()() noexcept {
    if (used_ == 4) refill();
    return buffer_[used_++];
}

double Rng::uniform() noexcept {
    const std::uint64_t hi = (*this)() >> 5; // 27 bits
    const std::uint64_t lo = (*this)() >> 6; // 26 bits
    const std::uint64_t bits = (hi << 26) | lo;
    // (bits + 0.5) / 2^53 lies strictly inside (0, 1).
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    for (;;) {
        const std::uint64_t x = (std::uint64_t{(*this)()} << 32) | (*this)();
        if (x < limit) return x % bound;
    }
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x5851F42D4C957F2Dull));
}

std::uint64_t derive_key(std::uint64_t seed, std::string_view stream) noexcept {
    // FNV-1a over the stream name.
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : stream) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return derive_key(seed, h);
}

} // namespace mrs
