#pragma once

#include <cstdint>

namespace mwvar {

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
}  // namespace detail

/// Counter-based stream generator (splitmix64 core). Each (seed, stream,
/// index) triple yields an independent deterministic sequence, so parallel
/// workers can draw replication streams in any order and reproduce the same
/// values.
class StreamRng {
public:
    StreamRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
        : state_(detail::mix64(detail::mix64(detail::mix64(seed) ^ stream) ^ index)) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform draw strictly inside (0,1): bin centers on a 2^-53 grid.
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

}  // namespace mwvar
