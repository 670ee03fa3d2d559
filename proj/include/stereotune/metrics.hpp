#pragma once

#include <string_view>

#include "stereotune/image.hpp"

namespace stereotune {

// All metrics substitute 0.0 for invalid pixels in both maps before comparing,
// so maps that invalidate everything are penalized rather than ignored.

double mse(const DisparityMap& gt, const DisparityMap& pred);

/// 10 log10(d_max^2 / mse); +infinity when the maps agree exactly.
double psnr(const DisparityMap& gt, const DisparityMap& pred, double d_max);

/// Mean local SSIM over every 11x11 Gaussian window (std 1.5) that fits in
/// the maps, with C1 = (0.01 d_max)^2 and C2 = (0.03 d_max)^2.
double ssim(const DisparityMap& gt, const DisparityMap& pred, double d_max);

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

struct MetricReport {
    double mse = 0.0;
    double psnr = 0.0;
    double ssim = 0.0;
    std::size_t valid_pixel_count = 0; // pixels valid in pred
};

MetricReport evaluate(const DisparityMap& gt, const DisparityMap& pred, double d_max);

enum class Metric { Mse, Psnr, Ssim };

/// "mse", "psnr" or "ssim"; throws std::invalid_argument otherwise.
Metric parse_metric(std::string_view name);
std::string_view metric_name(Metric m);

} // namespace stereotune
