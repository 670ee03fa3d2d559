#include "stereotune/wls.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stereotune {

void WlsParams::validate() const
{
    if (lambda < 1)
        throw std::invalid_argument("lambda = " + std::to_string(lambda) + " must be >= 1");
    if (!(sigma >= 0.0 && sigma <= 0.99))
        throw std::invalid_argument("sigma = " + std::to_string(sigma) + " outside [0, 0.99]");
    if (max_iterations < 1)
        throw std::invalid_argument("max_iterations must be >= 1");
    if (!(tolerance > 0.0))
        throw std::invalid_argument("tolerance must be positive");
}

EdgeWeights::EdgeWeights(int width, int height)
    : width_(width), height_(height),
      horizontal_(std::size_t(width > 1 ? width - 1 : 0) * height),
      vertical_(std::size_t(width) * (height > 1 ? height - 1 : 0))
{
}

double edge_weight(std::uint8_t a, std::uint8_t b, double sigma)
{
    const double s = sigma > 0.0 ? sigma : kMinWlsSigma;
    const double diff = (double(a) - double(b)) / 255.0;
    return std::exp(-(diff * diff) / (2.0 * s * s));
}

EdgeWeights edge_weights(const GrayImage& guide, double sigma)
{
    EdgeWeights w(guide.width(), guide.height());
    for (int y = 0; y < guide.height(); ++y)
        for (int x = 0; x < guide.width(); ++x) {
            if (x + 1 < guide.width())
                w.horizontal(x, y) = edge_weight(guide.at(x, y), guide.at(x + 1, y), sigma);
            if (y + 1 < guide.height())
                w.vertical(x, y) = edge_weight(guide.at(x, y), guide.at(x, y + 1), sigma);
        }
    return w;
}

double wls_energy(const DisparityMap& candidate, const DisparityMap& initial,
                  const EdgeWeights& weights, double lambda)
{
    require_same_shape(candidate, initial, "wls_energy");
    double data = 0.0;
    double smooth = 0.0;
    for (int y = 0; y < initial.height(); ++y)
        for (int x = 0; x < initial.width(); ++x) {
            if (!is_valid(initial.at(x, y)))
                continue;
            const double v = candidate.at(x, y);
            const double r = v - initial.at(x, y);
            data += r * r;
            if (x + 1 < initial.width() && is_valid(initial.at(x + 1, y))) {
                const double g = v - candidate.at(x + 1, y);
                smooth += weights.horizontal(x, y) * g * g;
            }
            if (y + 1 < initial.height() && is_valid(initial.at(x, y + 1))) {
                const double g = v - candidate.at(x, y + 1);
                smooth += weights.vertical(x, y) * g * g;
            }
        }
    return data + lambda * smooth;
}

namespace {

/// Sparse (I + lambda * L_w) restricted to valid pixels.
struct WlsSystem {
    struct Edge {
        int a;
        int b;
        double w; // lambda * w_pq
    };
    std::vector<double> diagonal;
    std::vector<Edge> edges;

    void multiply(const std::vector<double>& x, std::vector<double>& y) const
    {
        for (std::size_t i = 0; i < x.size(); ++i)
            y[i] = diagonal[i] * x[i];
        for (const Edge& e : edges) {
            y[e.a] -= e.w * x[e.b];
            y[e.b] -= e.w * x[e.a];
        }
    }
};

double dot(const std::vector<double>& a, const std::vector<double>& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

} // namespace

WlsResult wls_refine(const DisparityMap& initial, const GrayImage& guide, const WlsParams& params)
{
    params.validate();
    require_same_shape(initial, guide, "wls_refine");

    const int w = initial.width();
    const int h = initial.height();
    std::vector<int> index(std::size_t(w) * h, -1);
    std::vector<double> rhs;
    for (int i = 0; i < w * h; ++i)
        if (is_valid(initial.pixels()[i])) {
            index[i] = static_cast<int>(rhs.size());
            rhs.push_back(initial.pixels()[i]);
        }

    WlsResult result{initial, true, 0, 0.0};
    const std::size_t n = rhs.size();
    if (n == 0)
        return result;

    const EdgeWeights weights = edge_weights(guide, params.sigma);
    const double lambda = params.lambda;
    WlsSystem sys;
    sys.diagonal.assign(n, 1.0);
    auto link = [&](int p, int q, double wpq) {
        const int a = index[p];
        const int b = index[q];
        if (a < 0 || b < 0)
            return;
        sys.diagonal[a] += lambda * wpq;
        sys.diagonal[b] += lambda * wpq;
        sys.edges.push_back({a, b, lambda * wpq});
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (x + 1 < w)
                link(y * w + x, y * w + x + 1, weights.horizontal(x, y));
            if (y + 1 < h)
                link(y * w + x, (y + 1) * w + x, weights.vertical(x, y));
        }

    // Preconditioned CG from x0 = D0.
    std::vector<double> x = rhs;
    std::vector<double> r(n), z(n), p(n), ap(n);
    sys.multiply(x, ap);
    for (std::size_t i = 0; i < n; ++i)
        r[i] = rhs[i] - ap[i];

    const double rhs_norm = std::sqrt(dot(rhs, rhs));
    auto relative = [&](const std::vector<double>& res) {
        const double rn = std::sqrt(dot(res, res));
        return rhs_norm > 0.0 ? rn / rhs_norm : rn;
    };

    double res = relative(r);
    std::vector<double> best_x = x;
    double best_res = res;
    int iter = 0;

    if (res > params.tolerance) {
        for (std::size_t i = 0; i < n; ++i)
            z[i] = r[i] / sys.diagonal[i];
        p = z;
        double rz = dot(r, z);
        while (iter < params.max_iterations) {
            sys.multiply(p, ap);
            const double pap = dot(p, ap);
            if (!(pap > 0.0))
                break;
            const double step = rz / pap;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += step * p[i];
                r[i] -= step * ap[i];
            }
            ++iter;
            res = relative(r);
            if (res < best_res) {
                best_res = res;
                best_x = x;
            }
            if (res <= params.tolerance)
                break;
            for (std::size_t i = 0; i < n; ++i)
                z[i] = r[i] / sys.diagonal[i];
            const double rz_next = dot(r, z);
            const double ratio = rz_next / rz;
            rz = rz_next;
            for (std::size_t i = 0; i < n; ++i)
                p[i] = z[i] + ratio * p[i];
        }
    }

    result.iterations = iter;
    result.relative_residual = best_res;
    result.converged = best_res <= params.tolerance;
    // The exact minimizer lies within the input range; keep approximate
    // iterates there too so no refined value can fall onto the sentinel.
    const auto [lo, hi] = std::minmax_element(rhs.begin(), rhs.end());
    for (int i = 0; i < w * h; ++i)
        if (index[i] >= 0)
            result.disparity.pixels()[i] =
                static_cast<float>(std::clamp(best_x[index[i]], *lo, *hi));
    return result;
}

} // namespace stereotune
