#pragma once

#include <vector>

#include "stereotune/image.hpp"

namespace stereotune {

struct WlsParams {
    int lambda = 8;      // regularization strength, >= 1
    double sigma = 0.5;  // edge sensitivity on [0,1]-normalized intensities, [0, 0.99]
    int max_iterations = 200;
    double tolerance = 1e-4; // relative residual

    void validate() const;

    friend bool operator==(const WlsParams&, const WlsParams&) = default;
};

/// Smallest sigma used by the weight formula; sigma = 0 maps here.
inline constexpr double kMinWlsSigma = 0.01;

/// Weights on the 4-neighbor edges of the guide image.
/// horizontal(x, y) joins (x, y)-(x+1, y); vertical(x, y) joins (x, y)-(x, y+1).
class EdgeWeights {
public:
    EdgeWeights(int width, int height);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    double& horizontal(int x, int y) { return horizontal_[std::size_t(y) * (width_ - 1) + x]; }
    double horizontal(int x, int y) const { return horizontal_[std::size_t(y) * (width_ - 1) + x]; }
    double& vertical(int x, int y) { return vertical_[std::size_t(y) * width_ + x]; }
    double vertical(int x, int y) const { return vertical_[std::size_t(y) * width_ + x]; }

private:
    int width_;
    int height_;
    std::vector<double> horizontal_;
    std::vector<double> vertical_;
};

/// w_pq = exp(-|I(p) - I(q)|^2 / (2 sigma^2)) with I scaled to [0, 1].
double edge_weight(std::uint8_t a, std::uint8_t b, double sigma);
EdgeWeights edge_weights(const GrayImage& guide, double sigma);

/// sum_p (D(p) - D0(p))^2 + lambda * sum_{(p,q)} w_pq (D(p) - D(q))^2 over
/// pixels valid in `initial`, and 4-neighbor pairs where both are valid.
double wls_energy(const DisparityMap& candidate, const DisparityMap& initial,
                  const EdgeWeights& weights, double lambda);

struct WlsResult {
    DisparityMap disparity;
    bool converged = false;
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Minimizes the WLS energy with Jacobi-preconditioned conjugate gradients,
/// starting from the initial map. Invalid pixels stay invalid. On
/// non-convergence the lowest-residual iterate is returned with
/// converged = false.
WlsResult wls_refine(const DisparityMap& initial, const GrayImage& guide, const WlsParams& params);

} // namespace stereotune
