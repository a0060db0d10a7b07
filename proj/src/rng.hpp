#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>
#include <utility>

// Counter-based random numbers (Philox4x32-10). Every draw is a pure
// function of (stream key, counter), so simulations sharded across any
// number of workers produce identical streams, and two runs that hand
// the same ids to the same stream see the same noise (common random
// numbers by construction).
namespace mfg::rng {

namespace detail {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mul_hi_lo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mul_hi_lo(kPhiloxM0, ctr[0], hi0, lo0);
        mul_hi_lo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

// 53 uniform bits mapped into the open interval (0,1).
inline double u64_to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

} // namespace detail

// A named substream of the master seed. Streams with different labels or
// different master seeds are statistically independent.
class Stream {
public:
    Stream() = default;
    Stream(std::uint64_t master_seed, std::string_view label)
        : key_(detail::splitmix64(master_seed ^ detail::fnv1a64(label))) {}

    // Derive a child stream (e.g. one per replication).
    Stream child(std::uint64_t id) const {
        Stream s;
        s.key_ = detail::splitmix64(key_ ^ (0x9E3779B97F4A7C15ull * (id + 1)));
        return s;
    }

    std::uint64_t key() const { return key_; }

    // Four raw 32-bit words at counter (a, b).
    std::array<std::uint32_t, 4> words(std::uint64_t a, std::uint64_t b) const {
        const std::array<std::uint32_t, 4> ctr = {
            static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
            static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
        const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(key_),
                                                  static_cast<std::uint32_t>(key_ >> 32)};
        return detail::philox4x32_10(ctr, key);
    }

    double uniform(std::uint64_t a, std::uint64_t b) const {
        const auto w = words(a, b);
        return detail::u64_to_unit((static_cast<std::uint64_t>(w[0]) << 32) | w[1]);
    }

    // Two independent standard normals at counter (a, b), via Box-Muller.
    std::pair<double, double> normal_pair(std::uint64_t a, std::uint64_t b) const {
        const auto w = words(a, b);
        const double u1 = detail::u64_to_unit((static_cast<std::uint64_t>(w[0]) << 32) | w[1]);
        const double u2 = detail::u64_to_unit((static_cast<std::uint64_t>(w[2]) << 32) | w[3]);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        return {r * std::cos(theta), r * std::sin(theta)};
    }

    double normal(std::uint64_t a, std::uint64_t b) const { return normal_pair(a, b).first; }

private:
    std::uint64_t key_ = 0;
};

// Packs (step, slot) into one counter word; callers use it to key
// per-time-step draws without collisions.
inline std::uint64_t pack(std::uint32_t hi, std::uint32_t lo) {
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

} // namespace mfg::rng
