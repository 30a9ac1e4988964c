#pragma once

// Seedable, splittable random streams for reproducible simulation runs.
//
// Every stream is a xoshiro256** generator whose 256-bit state is expanded
// from a 64-bit key by SplitMix64. Keys for sub-streams are derived by mixing
// the run seed with a path of integer tags (e.g. {agent stream, round, agent}),
// so the draws of one agent never depend on how many draws another consumed.
//
// All distributions are implemented here rather than taken from <random>:
// the standard distributions are implementation-defined and would break
// bit-for-bit replay across standard libraries.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <span>
#include <string_view>
#include <utility>

namespace opcascade {

inline constexpr std::string_view kRngAlgorithm = "xoshiro256**/splitmix64-v1";

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    std::uint64_t s = x;
    return splitmix64(s);
}

// FNV-1a, used for stable digests of strings (stream tags, cache keys).
constexpr std::uint64_t fnv1a(std::string_view text,
                              std::uint64_t hash = 0xCBF29CE484222325ULL) noexcept {
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001B3ULL;
    }
    return hash;
}

}  // namespace detail

// Stream tags. Values are part of the replay contract; do not renumber.
enum class StreamTag : std::uint64_t {
    shuffle = 1,
    agent = 2,
    persona_init = 3,
    network = 4,
    sampling = 5,
    post = 6,
};

class Rng {
public:
    explicit Rng(std::uint64_t key = 0) noexcept { reseed(key); }

    void reseed(std::uint64_t key) noexcept {
        std::uint64_t sm = key;
        for (auto& word : s_) word = detail::splitmix64(sm);
    }

    // Independent stream keyed by (seed, tag, rest...).
    static Rng derive(std::uint64_t seed, StreamTag tag,
                      std::initializer_list<std::uint64_t> rest = {}) noexcept {
        std::uint64_t key = detail::mix64(seed ^ 0x5DEECE66DULL);
        key = detail::mix64(key ^ detail::mix64(static_cast<std::uint64_t>(tag) + 0x632BE59BD9B4E019ULL));
        for (std::uint64_t t : rest) key = detail::mix64(key ^ detail::mix64(t + 0x632BE59BD9B4E019ULL));
        return Rng(key);
    }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = std::rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 bits of resolution.
    double uniform01() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

    bool bernoulli(double p) noexcept { return uniform01() < p; }

    // Uniform integer in [0, bound) without modulo bias (Lemire).
    std::uint64_t below(std::uint64_t bound) noexcept {
        if (bound == 0) return 0;
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<unsigned __int128>(next_u64()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Standard normal via Box-Muller (one draw per call; the pair's sine half is discarded).
    double normal() noexcept {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t digest() const noexcept {
        std::uint64_t h = 0xCBF29CE484222325ULL;
        for (auto word : s_) h = detail::mix64(h ^ word);
        return h;
    }

    const std::array<std::uint64_t, 4>& state() const noexcept { return s_; }

private:
    std::array<std::uint64_t, 4> s_{};
};

// Fisher-Yates with the bias-free `below`.
template <class T>
void shuffle(std::span<T> items, Rng& rng) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        using std::swap;
        swap(items[i - 1], items[j]);
    }
}

}  // namespace opcascade
