#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stereotune/ga.hpp"

namespace stereotune {

/// Flat JSON object with keys alpha, beta, delta_lr, eta, gamma,
/// speckle_window, speckle_range, lambda, sigma, num_disparities.
std::string format_parameters(const ParameterSet& params);

struct LoadedParameters {
    ParameterSet params;
    std::vector<std::string> warnings; // repairs applied while loading
};

/// Missing keys keep their defaults; unknown keys and out-of-range values
/// throw FormatError. beta <= alpha is repaired to alpha + 1 with a warning.
LoadedParameters parse_parameters(const std::string& text);

void save_parameters(const ParameterSet& params, const std::filesystem::path& path);
LoadedParameters load_parameters(const std::filesystem::path& path);

} // namespace stereotune
