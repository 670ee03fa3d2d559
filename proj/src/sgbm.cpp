#include "stereotune/sgbm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace stereotune {

namespace {

using cost_t = CostVolume::cost_type;

void require_range(const char* name, int value, int lo, int hi)
{
    if (value < lo || value > hi)
        throw std::invalid_argument(std::string(name) + " = " + std::to_string(value) +
                                    " outside [" + std::to_string(lo) + ", " +
                                    std::to_string(hi) + "]");
}

template <typename Image>
CostVolume bt_cost(const Image& left, const Image& right, int d_range, const char* what)
{
    require_same_shape(left, right, what);
    if (d_range < 2)
        throw std::invalid_argument(std::string(what) + ": disparity range must be >= 2");

    const int w = left.width();
    const int h = left.height();
    CostVolume vol(w, h, d_range);

    // Per-pixel min/max of the right image over {q-1, q, q+1}, edge clamped.
    std::vector<std::uint8_t> rmin(static_cast<std::size_t>(w));
    std::vector<std::uint8_t> rmax(static_cast<std::size_t>(w));

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto a = right.clamped(x - 1, y);
            const auto b = right.at(x, y);
            const auto c = right.clamped(x + 1, y);
            rmin[x] = std::min({a, b, c});
            rmax[x] = std::max({a, b, c});
        }
        for (int x = 0; x < w; ++x) {
            const int il = left.at(x, y);
            auto px = vol.pixel(x, y);
            for (int d = 0; d < d_range; ++d) {
                const int q = x - d;
                if (q < 0) {
                    px[d] = kOutOfRangeCost;
                    continue;
                }
                px[d] = static_cast<cost_t>(std::max({0, il - int(rmax[q]), int(rmin[q]) - il}));
            }
        }
    }
    return vol;
}

void require_matches(const DisparityMap& map, const CostVolume& vol, const char* what)
{
    if (map.width() != vol.width() || map.height() != vol.height())
        throw DimensionError(std::string(what) + ": disparity map does not match cost volume");
}

} // namespace

CostVolume::CostVolume(int width, int height, int disparities, cost_type fill)
    : width_(width), height_(height), disparities_(disparities)
{
    if (width < 1 || height < 1 || disparities < 1)
        throw DimensionError("cost volume dimensions must be positive");
    costs_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                      static_cast<std::size_t>(disparities),
                  fill);
}

void MatchParams::validate() const
{
    if (alpha < 1)
        throw std::invalid_argument("alpha = " + std::to_string(alpha) + " must be >= 1");
    if (beta <= alpha)
        throw std::invalid_argument("beta = " + std::to_string(beta) + " must exceed alpha = " +
                                    std::to_string(alpha));
    require_range("eta", eta, 1, 100);
    require_range("gamma", gamma, 1, 100);
    require_range("delta_lr", delta_lr, 1, 100);
    require_range("speckle_window", speckle_window, 1, 1000);
    require_range("speckle_range", speckle_range, 1, 1000);
    if (num_disparities < 2)
        throw std::invalid_argument("num_disparities = " + std::to_string(num_disparities) +
                                    " must be >= 2");
}

CostVolume bt_gray_cost(const GrayImage& left, const GrayImage& right, int d_range)
{
    return bt_cost(left, right, d_range, "bt_gray_cost");
}

CostVolume bt_grad_cost(const GradientImage& left, const GradientImage& right, int d_range)
{
    return bt_cost(left, right, d_range, "bt_grad_cost");
}

CostVolume combine_costs(const CostVolume& gray, const CostVolume& grad, int eta)
{
    if (!gray.congruent(grad))
        throw DimensionError("combine_costs: cost volumes are not congruent");
    require_range("eta", eta, 1, 100);

    CostVolume out(gray.width(), gray.height(), gray.disparities());
    const auto g = gray.raw();
    const auto gr = grad.raw();
    auto o = out.raw();
    const auto wg = static_cast<std::uint64_t>(100 - eta);
    const auto wr = static_cast<std::uint64_t>(eta);
    for (std::size_t i = 0; i < o.size(); ++i)
        o[i] = static_cast<cost_t>((wg * g[i] + wr * gr[i]) / 100);
    return out;
}

CostVolume aggregate_path(const CostVolume& cost, PathDirection dir, int alpha, int beta)
{
    const int w = cost.width();
    const int h = cost.height();
    const int nd = cost.disparities();
    const auto p1 = static_cast<cost_t>(alpha);
    const auto p2 = static_cast<cost_t>(beta);

    CostVolume out(w, h, nd);
    // Minimum of L over d at every pixel, so successors do not rescan.
    std::vector<cost_t> min_l(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));

    const int y0 = dir.dy >= 0 ? 0 : h - 1;
    const int ys = dir.dy >= 0 ? 1 : -1;
    const int x0 = dir.dx >= 0 ? 0 : w - 1;
    const int xs = dir.dx >= 0 ? 1 : -1;

    for (int yi = 0, y = y0; yi < h; ++yi, y += ys) {
        for (int xi = 0, x = x0; xi < w; ++xi, x += xs) {
            const auto c = cost.pixel(x, y);
            auto l = out.pixel(x, y);
            const int px = x - dir.dx;
            const int py = y - dir.dy;
            cost_t m = std::numeric_limits<cost_t>::max();

            if (px < 0 || px >= w || py < 0 || py >= h) {
                for (int d = 0; d < nd; ++d) {
                    l[d] = c[d];
                    m = std::min(m, l[d]);
                }
            } else {
                const auto prev = out.pixel(px, py);
                const cost_t prev_min = min_l[static_cast<std::size_t>(py) * w + px];
                const cost_t jump = prev_min + p2;
                for (int d = 0; d < nd; ++d) {
                    cost_t best = std::min(prev[d], jump);
                    if (d > 0)
                        best = std::min(best, prev[d - 1] + p1);
                    if (d + 1 < nd)
                        best = std::min(best, prev[d + 1] + p1);
                    l[d] = c[d] + best - prev_min;
                    m = std::min(m, l[d]);
                }
            }
            min_l[static_cast<std::size_t>(y) * w + x] = m;
        }
    }
    return out;
}

CostVolume aggregate_all(const CostVolume& cost, int alpha, int beta)
{
    CostVolume sum(cost.width(), cost.height(), cost.disparities());
    auto s = sum.raw();
    for (const auto& dir : kPathDirections) {
        const CostVolume l = aggregate_path(cost, dir, alpha, beta);
        const auto lr = l.raw();
        for (std::size_t i = 0; i < s.size(); ++i)
            s[i] += lr[i];
    }
    return sum;
}

DisparityMap select_disparity(const CostVolume& aggregated)
{
    DisparityMap out(aggregated.width(), aggregated.height());
    for (int y = 0; y < aggregated.height(); ++y)
        for (int x = 0; x < aggregated.width(); ++x) {
            const auto s = aggregated.pixel(x, y);
            // min_element returns the first minimum, i.e. the smallest d on ties.
            out.at(x, y) = static_cast<float>(std::min_element(s.begin(), s.end()) - s.begin());
        }
    return out;
}

DisparityMap subpixel_refine(const CostVolume& aggregated, const DisparityMap& d_star)
{
    require_matches(d_star, aggregated, "subpixel_refine");
    DisparityMap out = d_star;
    const int d_max = aggregated.disparities() - 1;
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) {
            const float v = d_star.at(x, y);
            if (!is_valid(v))
                continue;
            const int d = static_cast<int>(v);
            if (d <= 0 || d >= d_max)
                continue;
            const auto s = aggregated.pixel(x, y);
            const double lo = s[d - 1];
            const double mid = s[d];
            const double hi = s[d + 1];
            const double denom = lo + hi - 2.0 * mid;
            if (denom <= 0.0)
                continue;
            out.at(x, y) = static_cast<float>(d + (lo - hi) / (2.0 * denom));
        }
    return out;
}

DisparityMap uniqueness_filter(const CostVolume& aggregated, const DisparityMap& disp, int gamma)
{
    require_matches(disp, aggregated, "uniqueness_filter");
    DisparityMap out = disp;
    const int nd = aggregated.disparities();
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) {
            if (!is_valid(out.at(x, y)))
                continue;
            const auto s = aggregated.pixel(x, y);
            const int best = static_cast<int>(std::min_element(s.begin(), s.end()) - s.begin());
            const std::uint64_t s1 = s[best];
            std::uint64_t s2 = std::numeric_limits<std::uint64_t>::max();
            for (int d = 0; d < nd; ++d)
                if (d < best - 1 || d > best + 1)
                    s2 = std::min<std::uint64_t>(s2, s[d]);
            if (s2 == std::numeric_limits<std::uint64_t>::max())
                continue;
            // S2 - S1 >= gamma/100 * S1, in integers.
            if (100 * (s2 - s1) < static_cast<std::uint64_t>(gamma) * s1)
                out.at(x, y) = kInvalidDisparity;
        }
    return out;
}

DisparityMap right_disparity(const CostVolume& aggregated)
{
    const int w = aggregated.width();
    const int nd = aggregated.disparities();
    DisparityMap out(w, aggregated.height(), kInvalidDisparity);
    for (int y = 0; y < aggregated.height(); ++y)
        for (int x = 0; x < w; ++x) {
            int best = -1;
            cost_t best_cost = std::numeric_limits<cost_t>::max();
            for (int d = 0; d < nd && x + d < w; ++d) {
                const cost_t c = aggregated.at(x + d, y, d);
                if (best < 0 || c < best_cost) {
                    best = d;
                    best_cost = c;
                }
            }
            if (best >= 0)
                out.at(x, y) = static_cast<float>(best);
        }
    return out;
}

DisparityMap lr_consistency(const DisparityMap& left_disp, const CostVolume& aggregated,
                            int delta_lr)
{
    require_matches(left_disp, aggregated, "lr_consistency");
    const DisparityMap right = right_disparity(aggregated);
    DisparityMap out = left_disp;
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) {
            const float dl = out.at(x, y);
            if (!is_valid(dl))
                continue;
            const long xr = std::lround(static_cast<double>(x) - dl);
            if (xr < 0 || xr >= out.width()) {
                out.at(x, y) = kInvalidDisparity;
                continue;
            }
            const float dr = right.at(static_cast<int>(xr), y);
            if (!is_valid(dr) || std::fabs(double(dl) - double(dr)) > delta_lr)
                out.at(x, y) = kInvalidDisparity;
        }
    return out;
}

DisparityMap speckle_filter(const DisparityMap& disp, int window, int range)
{
    const int w = disp.width();
    const int h = disp.height();
    DisparityMap out = disp;
    std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
    std::vector<int> stack;
    std::vector<int> region;
    int next_label = 0;

    for (int start = 0; start < w * h; ++start) {
        if (label[start] >= 0 || !is_valid(disp.pixels()[start]))
            continue;
        region.clear();
        stack.assign(1, start);
        label[start] = next_label;
        while (!stack.empty()) {
            const int p = stack.back();
            stack.pop_back();
            region.push_back(p);
            const int px = p % w;
            const int py = p / w;
            const float dp = disp.pixels()[p];
            const int nbrs[4][2] = {{px - 1, py}, {px + 1, py}, {px, py - 1}, {px, py + 1}};
            for (const auto& n : nbrs) {
                if (n[0] < 0 || n[0] >= w || n[1] < 0 || n[1] >= h)
                    continue;
                const int q = n[1] * w + n[0];
                const float dq = disp.pixels()[q];
                if (label[q] >= 0 || !is_valid(dq) || std::fabs(dp - dq) > range)
                    continue;
                label[q] = next_label;
                stack.push_back(q);
            }
        }
        if (static_cast<int>(region.size()) < window)
            for (int p : region)
                out.pixels()[p] = kInvalidDisparity;
        ++next_label;
    }
    return out;
}

DisparityMap run_sgbm(const GrayImage& left, const GrayImage& right, const MatchParams& params)
{
    params.validate();
    require_same_shape(left, right, "run_sgbm");

    const GradientImage gl = sobel_magnitude(left);
    const GradientImage gr = sobel_magnitude(right);
    const CostVolume cost = combine_costs(bt_gray_cost(left, right, params.num_disparities),
                                          bt_grad_cost(gl, gr, params.num_disparities),
                                          params.eta);
    const CostVolume aggregated = aggregate_all(cost, params.alpha, params.beta);

    DisparityMap disp = subpixel_refine(aggregated, select_disparity(aggregated));
    disp = uniqueness_filter(aggregated, disp, params.gamma);
    disp = lr_consistency(disp, aggregated, params.delta_lr);
    return speckle_filter(disp, params.speckle_window, params.speckle_range);
}

} // namespace stereotune
