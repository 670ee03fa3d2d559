#include "stereotune/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace stereotune {

namespace {

double sample(const DisparityMap& m, int x, int y)
{
    const float v = m.at(x, y);
    return is_valid(v) ? double(v) : 0.0;
}

std::array<double, kSsimWindow> gaussian_taps()
{
    std::array<double, kSsimWindow> taps{};
    double sum = 0.0;
    const int half = kSsimWindow / 2;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double t = i - half;
        taps[i] = std::exp(-(t * t) / (2.0 * kSsimSigma * kSsimSigma));
        sum += taps[i];
    }
    for (double& t : taps)
        t /= sum;
    return taps;
}

} // namespace

double mse(const DisparityMap& gt, const DisparityMap& pred)
{
    require_same_shape(gt, pred, "mse");
    double sum = 0.0;
    for (int y = 0; y < gt.height(); ++y)
        for (int x = 0; x < gt.width(); ++x) {
            const double e = sample(gt, x, y) - sample(pred, x, y);
            sum += e * e;
        }
    return sum / static_cast<double>(gt.size());
}

double psnr(const DisparityMap& gt, const DisparityMap& pred, double d_max)
{
    if (!(d_max > 0.0))
        throw std::invalid_argument("psnr: d_max must be positive");
    const double e = mse(gt, pred);
    if (e == 0.0)
        return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(d_max * d_max / e);
}

double ssim(const DisparityMap& gt, const DisparityMap& pred, double d_max)
{
    require_same_shape(gt, pred, "ssim");
    if (gt.width() < kSsimWindow || gt.height() < kSsimWindow)
        throw DimensionError("ssim: maps must be at least 11x11, got " +
                             std::to_string(gt.width()) + "x" + std::to_string(gt.height()));
    if (!(d_max > 0.0))
        throw std::invalid_argument("ssim: d_max must be positive");

    static const auto taps = gaussian_taps();
    const double c1 = (0.01 * d_max) * (0.01 * d_max);
    const double c2 = (0.03 * d_max) * (0.03 * d_max);

    const int ow = gt.width() - kSsimWindow + 1;
    const int oh = gt.height() - kSsimWindow + 1;
    double total = 0.0;
    for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
            double mu_a = 0.0, mu_b = 0.0;
            for (int j = 0; j < kSsimWindow; ++j)
                for (int i = 0; i < kSsimWindow; ++i) {
                    const double wgt = taps[i] * taps[j];
                    mu_a += wgt * sample(gt, ox + i, oy + j);
                    mu_b += wgt * sample(pred, ox + i, oy + j);
                }
            // Centered second moments; avoids the cancellation of E[x^2] - mu^2.
            double var_a = 0.0, var_b = 0.0, cov = 0.0;
            for (int j = 0; j < kSsimWindow; ++j)
                for (int i = 0; i < kSsimWindow; ++i) {
                    const double wgt = taps[i] * taps[j];
                    const double da = sample(gt, ox + i, oy + j) - mu_a;
                    const double db = sample(pred, ox + i, oy + j) - mu_b;
                    var_a += wgt * da * da;
                    var_b += wgt * db * db;
                    cov += wgt * da * db;
                }
            total += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
                     ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
        }
    return total / (static_cast<double>(ow) * oh);
}

MetricReport evaluate(const DisparityMap& gt, const DisparityMap& pred, double d_max)
{
    MetricReport r;
    r.mse = mse(gt, pred);
    r.psnr = psnr(gt, pred, d_max);
    r.ssim = ssim(gt, pred, d_max);
    for (float v : pred.pixels())
        r.valid_pixel_count += is_valid(v) ? 1 : 0;
    return r;
}

Metric parse_metric(std::string_view name)
{
    if (name == "mse")
        return Metric::Mse;
    if (name == "psnr")
        return Metric::Psnr;
    if (name == "ssim")
        return Metric::Ssim;
    throw std::invalid_argument("unknown metric '" + std::string(name) +
                                "' (expected mse, psnr or ssim)");
}

std::string_view metric_name(Metric m)
{
    switch (m) {
    case Metric::Mse: return "mse";
    case Metric::Psnr: return "psnr";
    case Metric::Ssim: return "ssim";
    }
    return "?";
}

} // namespace stereotune
