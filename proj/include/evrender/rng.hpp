#pragma once

#include <cstdint>

namespace evrender {

/// Identifies one path sample. The same key always reproduces the same
/// random stream, independent of which worker traces it.
struct RngKey {
    std::uint64_t seed = 0;
    std::uint32_t x = 0;
    std::uint32_t y = 0;
    std::uint32_t frame = 0;
    std::uint64_t sample = 0;
};

/// Counter-based stream: the key is hashed into a start state, then a
/// SplitMix64 sequence is drawn from it.
class SampleRng {
public:
    explicit SampleRng(const RngKey& key) {
        std::uint64_t h = mix(key.seed ^ 0x9e3779b97f4a7c15ULL);
        h = mix(h ^ ((std::uint64_t{key.x} << 32) | key.y));
        h = mix(h ^ key.frame);
        state_ = mix(h ^ key.sample);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

}  // namespace evrender
