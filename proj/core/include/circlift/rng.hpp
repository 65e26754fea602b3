#pragma once

#include <cstdint>

namespace circlift {

// Counter-based random stream. A draw is a pure function of
// (seed, stream, index), so replicate r and replicate r' never share draws,
// sequences have the prefix property by construction, and parallel workers
// need no coordination. The generator is the splitmix64 finalizer applied to
// a keyed counter; statistical quality is more than enough for Monte Carlo.
struct CounterRng {
    uint64_t key = 0;

    CounterRng() = default;
    CounterRng(uint64_t seed, uint64_t stream) { key = mix(mix(seed) ^ (0x9E3779B97F4A7C15ull * (stream + 1))); }

    static constexpr uint64_t mix(uint64_t z) {
        z += 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    uint64_t word(uint64_t index) const { return mix(key ^ (index * 0xD1B54A32D192ED03ull + 0x8CB92BA72F3D8DD7ull)); }

    // uniform in [0, 1), 53-bit resolution
    double uniform01(uint64_t index) const { return static_cast<double>(word(index) >> 11) * 0x1.0p-53; }
};

} // namespace circlift
