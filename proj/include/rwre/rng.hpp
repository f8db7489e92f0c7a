#pragma once

#include <cstdint>
#include <span>

// Counter-based random streams. Every random quantity in the project is a
// pure function of (key, counter): there is no mutable generator state to
// share between threads, so replicas and lattice sites can be evaluated in
// any order, on any number of workers, with bit-identical results.

namespace rwre {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ull;

// splitmix64 finalizer; full-avalanche 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
}

// One key-derivation step. Chains fold arbitrary tuples (seed, role, index,
// coordinates, ...) into a stream key; the interleaved mix64 keeps related
// inputs (adjacent sites, consecutive replicas) statistically unrelated.
constexpr std::uint64_t derive_key(std::uint64_t key, std::uint64_t word) noexcept {
    return mix64(mix64(key) + word);
}

// Role tags keep the independent randomness sources on disjoint streams even
// when they share the same master seed.
namespace stream_role {
inline constexpr std::uint64_t environment = 0x7a8d00c049f3a1b1ull;
inline constexpr std::uint64_t walk = 0x51f8c17d190beefdull;
inline constexpr std::uint64_t env_seed = 0x93c467e37db0c7a5ull;
inline constexpr std::uint64_t walk_seed = 0xb5ad4eceda1ce2a9ull;
inline constexpr std::uint64_t bootstrap = 0xcafef00dd15ea5e5ull;
}  // namespace stream_role

// value i of the stream with key k; i may be consumed in any order
constexpr std::uint64_t stream_u64(std::uint64_t key, std::uint64_t i) noexcept {
    return mix64(key + i * kGoldenGamma);
}

// uniform in [0, 1), 53 significant bits
constexpr double to_unit_double(std::uint64_t u) noexcept {
    return static_cast<double>(u >> 11) * 0x1.0p-53;
}

constexpr double stream_unit(std::uint64_t key, std::uint64_t i) noexcept {
    return to_unit_double(stream_u64(key, i));
}

// Sequential view of a counter-based stream.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}

    std::uint64_t next_u64() { return stream_u64(key_, counter_++); }
    double next_unit() { return to_unit_double(next_u64()); }

    // uniform index in [0, n)
    std::uint64_t next_index(std::uint64_t n) {
        return static_cast<std::uint64_t>(next_unit() * static_cast<double>(n));
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// Stream key for the kernel draw at one lattice site.
inline std::uint64_t site_key(std::uint64_t env_seed, std::span<const std::int64_t> site) noexcept {
    std::uint64_t key = derive_key(stream_role::environment, env_seed);
    for (std::int64_t c : site) {
        key = derive_key(key, static_cast<std::uint64_t>(c));
    }
    return key;
}

}  // namespace rwre
