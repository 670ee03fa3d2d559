#include "stereotune/synth.hpp"

#include <stdexcept>
#include <string>

#include "stereotune/rng.hpp"

namespace stereotune {

SynthPattern parse_pattern(std::string_view name)
{
    if (name == "uniform-noise")
        return SynthPattern::UniformNoise;
    if (name == "bands")
        return SynthPattern::Bands;
    if (name == "checker")
        return SynthPattern::Checker;
    throw std::invalid_argument("unknown pattern '" + std::string(name) +
                                "' (expected uniform-noise, bands or checker)");
}

std::string_view pattern_name(SynthPattern p)
{
    switch (p) {
    case SynthPattern::UniformNoise: return "uniform-noise";
    case SynthPattern::Bands: return "bands";
    case SynthPattern::Checker: return "checker";
    }
    return "?";
}

void SynthSpec::validate() const
{
    if (width < 1 || height < 1)
        throw std::invalid_argument("synthetic image dimensions must be positive");
    if (true_disparity < 0)
        throw std::invalid_argument("true disparity must be non-negative");
    if (2 * true_disparity >= width)
        throw std::invalid_argument("true disparity " + std::to_string(true_disparity) +
                                    " must be less than width / 2 (width " +
                                    std::to_string(width) + ")");
}

StereoPair generate(const SynthSpec& spec)
{
    spec.validate();
    const int w = spec.width;
    const int h = spec.height;
    const int d = spec.true_disparity;

    GrayImage right(w, h);
    Rng rng(spec.noise_seed);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            std::uint8_t v = 0;
            switch (spec.pattern) {
            case SynthPattern::UniformNoise:
                v = static_cast<std::uint8_t>(rng.next() >> 56);
                break;
            case SynthPattern::Bands:
                v = static_cast<std::uint8_t>((x / 4) % 2 ? 200 : 40);
                break;
            case SynthPattern::Checker:
                v = static_cast<std::uint8_t>(((x / 8) + (y / 8)) % 2 ? 220 : 30);
                break;
            }
            right.at(x, y) = v;
        }

    GrayImage left(w, h);
    DisparityMap gt(w, h, kInvalidDisparity);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            left.at(x, y) = right.clamped(x - d, y);
            if (x >= d)
                gt.at(x, y) = static_cast<float>(d);
        }
    return {std::move(left), std::move(right), std::move(gt)};
}

} // namespace stereotune
