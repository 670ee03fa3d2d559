#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "stereotune/image.hpp"

namespace stereotune {

/// Per-pixel, per-disparity integer costs, laid out (y, x, d) so that the
/// disparity axis of one pixel is contiguous.
class CostVolume {
public:
    using cost_type = std::uint32_t;

    CostVolume() = default;
    CostVolume(int width, int height, int disparities, cost_type fill = 0);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int disparities() const noexcept { return disparities_; }

    cost_type& at(int x, int y, int d) noexcept { return costs_[offset(x, y) + d]; }
    cost_type at(int x, int y, int d) const noexcept { return costs_[offset(x, y) + d]; }

    std::span<cost_type> pixel(int x, int y) noexcept
    {
        return {costs_.data() + offset(x, y), static_cast<std::size_t>(disparities_)};
    }
    std::span<const cost_type> pixel(int x, int y) const noexcept
    {
        return {costs_.data() + offset(x, y), static_cast<std::size_t>(disparities_)};
    }

    std::span<cost_type> raw() noexcept { return costs_; }
    std::span<const cost_type> raw() const noexcept { return costs_; }

    bool congruent(const CostVolume& o) const noexcept
    {
        return width_ == o.width_ && height_ == o.height_ && disparities_ == o.disparities_;
    }

    friend bool operator==(const CostVolume&, const CostVolume&) = default;

private:
    std::size_t offset(int x, int y) const noexcept
    {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(disparities_);
    }

    int width_ = 0;
    int height_ = 0;
    int disparities_ = 0;
    std::vector<cost_type> costs_;
};

/// Cost assigned when the correspondence x - d lies left of the image.
inline constexpr CostVolume::cost_type kOutOfRangeCost = 255;

/// Scanline direction r. The predecessor of p along the path is p - r.
struct PathDirection {
    int dx;
    int dy;
    friend bool operator==(const PathDirection&, const PathDirection&) = default;
};

inline constexpr std::array<PathDirection, 8> kPathDirections{{
    {1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {1, -1}, {-1, 1},
}};

struct MatchParams {
    int alpha = 10;           // small smoothness penalty
    int beta = 120;           // large smoothness penalty
    int eta = 30;             // gradient weight, percent
    int gamma = 10;           // uniqueness ratio, percent
    int delta_lr = 1;         // LR consistency threshold, pixels
    int speckle_window = 100; // W, pixels
    int speckle_range = 2;    // delta, disparity units
    int num_disparities = 64;

    /// Throws std::invalid_argument naming the first field out of range.
    void validate() const;

    friend bool operator==(const MatchParams&, const MatchParams&) = default;
};

CostVolume bt_gray_cost(const GrayImage& left, const GrayImage& right, int d_range);
CostVolume bt_grad_cost(const GradientImage& left, const GradientImage& right, int d_range);

/// floor(((100 - eta) * gray + eta * grad) / 100), eta in [1, 100].
CostVolume combine_costs(const CostVolume& gray, const CostVolume& grad, int eta);

/// Single-direction semi-global recurrence
///   L(p,d) = C(p,d) + min(L(p-r,d), L(p-r,d+-1) + alpha, min_k L(p-r,k) + beta) - min_k L(p-r,k)
/// Pixels with no predecessor inside the image start the path with L = C.
CostVolume aggregate_path(const CostVolume& cost, PathDirection dir, int alpha, int beta);

/// Sum of aggregate_path over the eight kPathDirections.
CostVolume aggregate_all(const CostVolume& cost, int alpha, int beta);

/// Winner-take-all; ties resolve to the smallest disparity.
DisparityMap select_disparity(const CostVolume& aggregated);

/// Parabola fit through S(d*-1), S(d*), S(d*+1). Only applied for
/// 0 < d* < D-1 with a positive denominator; the offset never exceeds 0.5.
DisparityMap subpixel_refine(const CostVolume& aggregated, const DisparityMap& d_star);

/// Invalidates pixels where S2 - S1 < gamma/100 * S1, with S2 the best cost
/// among disparities further than one step from the winner.
DisparityMap uniqueness_filter(const CostVolume& aggregated, const DisparityMap& disp, int gamma);

/// Right-view disparity reprojected from the left-referenced volume:
/// D_R(x, y) = argmin_d S(x + d, y, d). Columns with no candidate are invalid.
DisparityMap right_disparity(const CostVolume& aggregated);

/// Invalidates pixels with |D_L(x,y) - D_R(x - D_L(x,y), y)| > delta_lr or
/// whose projection leaves the image.
DisparityMap lr_consistency(const DisparityMap& left_disp, const CostVolume& aggregated,
                            int delta_lr);

/// Removes 4-connected regions (neighbors within `range`) smaller than `window`.
DisparityMap speckle_filter(const DisparityMap& disp, int window, int range);

/// Sobel -> BT costs -> blend -> 8-path aggregation -> WTA -> sub-pixel ->
/// uniqueness -> LR check -> speckle.
DisparityMap run_sgbm(const GrayImage& left, const GrayImage& right, const MatchParams& params);

} // namespace stereotune
