#pragma once

#include <cstdint>
#include <random>

namespace comap {

// splitmix64; used to derive independent seed streams from one master seed.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Named sub-streams so no two call sites share a generator by accident.
enum class Stream : uint64_t {
    Capture = 1,
    Minibatch,
    Comm,
    DecoderInit,
    Generic,
};

inline uint64_t derive_seed(uint64_t base, Stream s, uint64_t a = 0, uint64_t b = 0,
                            uint64_t c = 0) {
    uint64_t h = splitmix64(base ^ 0x5851f42d4c957f2dull);
    h = splitmix64(h ^ static_cast<uint64_t>(s));
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    h = splitmix64(h ^ c);
    return h;
}

inline std::mt19937_64 seeded_rng(uint64_t base, Stream s, uint64_t a = 0, uint64_t b = 0,
                                  uint64_t c = 0) {
    return std::mt19937_64(derive_seed(base, s, a, b, c));
}

}  // namespace comap
