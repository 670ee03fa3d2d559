#pragma once

#include <cstdint>
#include <random>

namespace stereotune {

/// Seeded mt19937_64 with distribution code that is fully specified here, so a
/// seed yields the same stream on every standard library. (The standard fixes
/// the engine output but not std::uniform_*_distribution.)
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [lo, hi] by rejection sampling on the raw 64-bit draw.
    int uniform_int(int lo, int hi)
    {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t v = next();
        while (v >= limit)
            v = next();
        return lo + static_cast<int>(v % span);
    }

    /// Uniform double in [0, 1) from the top 53 bits of one draw.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

} // namespace stereotune
