#pragma once
#include <cstdint>

namespace spinsim {

// splitmix64: tiny, well-mixed 64-bit stream; used only to derive independent
// per-realization seeds from (master_seed, i, j). Not used for sampling.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic seed for realization (i, j) of a run. Crossing the stream
// twice decorrelates adjacent (i, j) pairs.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t i,
                                 std::uint64_t j) {
    std::uint64_t s = master;
    std::uint64_t a = splitmix64(s);
    s ^= (i + 1) * 0x9e3779b97f4a7c15ULL;
    std::uint64_t b = splitmix64(s);
    s ^= (j + 1) * 0xc2b2ae3d27d4eb4fULL;
    std::uint64_t c = splitmix64(s);
    return a ^ (b << 1) ^ c;
}

} // namespace spinsim
