#pragma once

#include <cstdint>
#include <string_view>

#include "stereotune/image.hpp"

namespace stereotune {

enum class SynthPattern { UniformNoise, Bands, Checker };

SynthPattern parse_pattern(std::string_view name);
std::string_view pattern_name(SynthPattern p);

struct SynthSpec {
    int width = 128;
    int height = 96;
    int true_disparity = 8; // must be < width / 2
    SynthPattern pattern = SynthPattern::UniformNoise;
    std::uint64_t noise_seed = 1;

    /// Throws std::invalid_argument when the overlap invariant is violated.
    void validate() const;
};

struct StereoPair {
    GrayImage left;
    GrayImage right;
    DisparityMap ground_truth;
};

/// Constant-disparity scene: left(x, y) = right(x - d, y), edge-clamped for
/// x < d, where ground truth is invalid.
StereoPair generate(const SynthSpec& spec);

} // namespace stereotune
