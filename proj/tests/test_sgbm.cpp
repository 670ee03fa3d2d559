#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "stereotune/sgbm.hpp"
#include "stereotune/synth.hpp"

using namespace stereotune;

namespace {

CostVolume single_pixel(std::vector<CostVolume::cost_type> costs)
{
    CostVolume v(1, 1, static_cast<int>(costs.size()));
    std::copy(costs.begin(), costs.end(), v.raw().begin());
    return v;
}

/// Right image whose row holds `triple` at columns q-1, q, q+1 = 1, 2, 3.
GrayImage row_with_triple(std::uint8_t a, std::uint8_t b, std::uint8_t c)
{
    GrayImage img(8, 1, 0);
    img.at(1, 0) = a;
    img.at(2, 0) = b;
    img.at(3, 0) = c;
    return img;
}

bool only_invalidates(const DisparityMap& in, const DisparityMap& out)
{
    for (std::size_t i = 0; i < in.size(); ++i)
        if (out.pixels()[i] != in.pixels()[i] && out.pixels()[i] != kInvalidDisparity)
            return false;
    return true;
}

} // namespace

TEST_CASE("bt_gray_cost")
{
    SUBCASE("identical images cost zero at d = 0")
    {
        std::mt19937 gen(1);
        GrayImage img(9, 4);
        for (auto& v : img.pixels())
            v = static_cast<std::uint8_t>(gen());
        const CostVolume c = bt_gray_cost(img, img, 4);
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 9; ++x)
                CHECK(c.at(x, y, 0) == 0);
    }
    SUBCASE("left 100 against right triple (90, 95, 98) costs 2")
    {
        GrayImage left(8, 1, 0);
        left.at(5, 0) = 100; // q = 5 - 3 = 2
        const CostVolume c = bt_gray_cost(left, row_with_triple(90, 95, 98), 4);
        CHECK(c.at(5, 0, 3) == 2);
    }
    SUBCASE("left 93 inside the interval costs 0")
    {
        GrayImage left(8, 1, 0);
        left.at(5, 0) = 93;
        const CostVolume c = bt_gray_cost(left, row_with_triple(90, 95, 98), 4);
        CHECK(c.at(5, 0, 3) == 0);
    }
    SUBCASE("left 80 below the interval costs I_min - I_l = 10")
    {
        GrayImage left(8, 1, 0);
        left.at(5, 0) = 80;
        CHECK(bt_gray_cost(left, row_with_triple(90, 95, 98), 4).at(5, 0, 3) == 10);
    }
    SUBCASE("correspondences left of the image cost 255")
    {
        const GrayImage img(6, 2, 10);
        const CostVolume c = bt_gray_cost(img, img, 4);
        CHECK(c.at(0, 0, 1) == kOutOfRangeCost);
        CHECK(c.at(2, 1, 3) == kOutOfRangeCost);
        CHECK(c.at(3, 1, 3) == 0);
    }
    SUBCASE("q-1 and q+1 are edge clamped at the borders")
    {
        GrayImage right(4, 1, {50, 60, 70, 80});
        GrayImage left(4, 1, {55, 0, 0, 85});
        const CostVolume c = bt_gray_cost(left, right, 2);
        CHECK(c.at(0, 0, 0) == 0);  // triple (50, 50, 60)
        CHECK(c.at(3, 0, 0) == 5);  // triple (70, 80, 80): 85 - 80
    }
    SUBCASE("errors")
    {
        CHECK_THROWS_AS(bt_gray_cost(GrayImage(4, 4), GrayImage(5, 4), 4), DimensionError);
        CHECK_THROWS_AS(bt_gray_cost(GrayImage(4, 4), GrayImage(4, 4), 1), std::invalid_argument);
    }
}

TEST_CASE("bt_grad_cost")
{
    SUBCASE("constant gradient images cost zero wherever the match is in range")
    {
        const GradientImage g(10, 3, 40);
        const CostVolume c = bt_grad_cost(g, g, 5);
        for (int y = 0; y < 3; ++y)
            for (int x = 0; x < 10; ++x)
                for (int d = 0; d < 5; ++d)
                    CHECK(c.at(x, y, d) == (x - d < 0 ? kOutOfRangeCost : 0u));
    }
    SUBCASE("a gradient step only costs near the step")
    {
        GradientImage left(12, 1, 0);
        GradientImage right(12, 1, 0);
        left.at(6, 0) = 200;
        right.at(6, 0) = 200;
        const CostVolume c = bt_grad_cost(left, right, 3);
        // At d = 1, x = 6 maps to q = 5, whose triple (0, 0, 200) contains 200.
        CHECK(c.at(6, 0, 1) == 0);
        // At d = 2, q = 4 with triple (0, 0, 0): cost 200 - 0.
        CHECK(c.at(6, 0, 2) == 200);
        // x = 8, d = 2 -> q = 6: triple (0, 200, 0), left 0 is inside [0, 200].
        CHECK(c.at(8, 0, 2) == 0);
        for (int x = 0; x < 12; ++x)
            if (x != 6)
                for (int d = 0; d < 3; ++d)
                    if (x - d >= 0)
                        CHECK(c.at(x, 0, d) == 0);
    }
}

TEST_CASE("combine_costs")
{
    CostVolume gray(1, 1, 3), grad(1, 1, 3);
    gray.at(0, 0, 0) = 10;
    grad.at(0, 0, 0) = 20;
    gray.at(0, 0, 1) = 255;
    grad.at(0, 0, 1) = 255;
    gray.at(0, 0, 2) = 7;
    grad.at(0, 0, 2) = 3;

    CHECK(combine_costs(gray, grad, 50).at(0, 0, 0) == 15);
    CHECK(combine_costs(gray, grad, 100) == grad);
    CHECK(combine_costs(CostVolume(1, 1, 3), CostVolume(1, 1, 3), 1) == CostVolume(1, 1, 3));
    CHECK(combine_costs(gray, grad, 33).at(0, 0, 1) == 255);
    CHECK(combine_costs(gray, grad, 33).at(0, 0, 2) == (67 * 7 + 33 * 3) / 100);
    CHECK_THROWS_AS(combine_costs(gray, grad, 0), std::invalid_argument);
    CHECK_THROWS_AS(combine_costs(gray, grad, 101), std::invalid_argument);
    CHECK_THROWS_AS(combine_costs(gray, CostVolume(1, 1, 4), 50), DimensionError);
}

TEST_CASE("aggregate_path hand-rolled examples")
{
    SUBCASE("zero costs propagate as zero")
    {
        const CostVolume z(1, 6, 4);
        CHECK(aggregate_path(z, {0, 1}, 3, 9) == z);
    }
    SUBCASE("two pixels, two disparities")
    {
        CostVolume c(2, 1, 2);
        c.at(0, 0, 0) = 5;
        c.at(0, 0, 1) = 9;
        c.at(1, 0, 0) = 4;
        c.at(1, 0, 1) = 0;
        const CostVolume l = aggregate_path(c, {1, 0}, 1, 100);
        CHECK(l.at(0, 0, 0) == 5);
        CHECK(l.at(0, 0, 1) == 9);
        CHECK(l.at(1, 0, 0) == 4); // 4 + min(5, 9 + 1, 5 + 100) - 5
        CHECK(l.at(1, 0, 1) == 1); // 0 + min(9, 5 + 1, 105) - 5
    }
}

TEST_CASE("aggregate_path matches the brute-force recurrence on random volumes")
{
    std::mt19937_64 gen(42);
    for (int trial = 0; trial < 20; ++trial) {
        std::uniform_int_distribution<int> dim(1, 10);
        const int w = dim(gen), h = dim(gen), nd = std::uniform_int_distribution<int>(2, 8)(gen);
        const int alpha = std::uniform_int_distribution<int>(1, 30)(gen);
        const int beta = alpha + std::uniform_int_distribution<int>(1, 200)(gen);
        const CostVolume c = oracle::random_volume(gen, w, h, nd);
        for (const auto& dir : kPathDirections) {
            const CostVolume l = aggregate_path(c, dir, alpha, beta);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    const auto ref = oracle::path_cost_at(c, dir, x, y, alpha, beta);
                    const auto px = l.pixel(x, y);
                    const auto mn = *std::min_element(px.begin(), px.end());
                    const auto cp = c.pixel(x, y);
                    const auto cmin = *std::min_element(cp.begin(), cp.end());
                    // L <= C + beta and min L >= min C, so the spread is bounded by
                    // beta plus the spread of the raw cost.
                    for (int d = 0; d < nd; ++d) {
                        REQUIRE(px[d] == ref[d]);
                        REQUIRE(px[d] - mn <= beta + (cp[d] - cmin));
                    }
                }
        }
    }
}

TEST_CASE("aggregate_all")
{
    SUBCASE("zero volume aggregates to zero")
    {
        const CostVolume z(5, 4, 3);
        CHECK(aggregate_all(z, 2, 8) == z);
    }
    SUBCASE("1xN image: only horizontal paths carry context, S = L_right + L_left + 6C")
    {
        std::mt19937_64 gen(9);
        const CostVolume c = oracle::random_volume(gen, 7, 1, 5);
        const CostVolume s = aggregate_all(c, 4, 30);
        for (int x = 0; x < 7; ++x) {
            const auto lr = oracle::path_cost_at(c, {1, 0}, x, 0, 4, 30);
            const auto ll = oracle::path_cost_at(c, {-1, 0}, x, 0, 4, 30);
            for (int d = 0; d < 5; ++d)
                CHECK(s.at(x, 0, d) == lr[d] + ll[d] + 6 * c.at(x, 0, d));
        }
    }
    SUBCASE("random volume equals the sum of eight brute-force paths")
    {
        std::mt19937_64 gen(10);
        const CostVolume c = oracle::random_volume(gen, 10, 8, 6);
        const CostVolume s = aggregate_all(c, 7, 50);
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 10; ++x) {
                std::vector<std::int64_t> sum(6, 0);
                for (const auto& dir : kPathDirections) {
                    const auto l = oracle::path_cost_at(c, dir, x, y, 7, 50);
                    for (int d = 0; d < 6; ++d)
                        sum[d] += l[d];
                }
                for (int d = 0; d < 6; ++d)
                    REQUIRE(s.at(x, y, d) == sum[d]);
            }
    }
}

TEST_CASE("select_disparity picks the first minimum")
{
    CHECK(select_disparity(single_pixel({3, 1, 2})).at(0, 0) == 1.0f);
    CHECK(select_disparity(single_pixel({2, 2, 5})).at(0, 0) == 0.0f);
}

TEST_CASE("subpixel_refine")
{
    auto refine = [](std::vector<CostVolume::cost_type> s, float d) {
        const CostVolume v = single_pixel(std::move(s));
        return subpixel_refine(v, DisparityMap(1, 1, d)).at(0, 0);
    };
    CHECK(refine({4, 2, 4}, 1.0f) == 1.0f);
    CHECK(refine({6, 2, 4}, 1.0f) == doctest::Approx(1.0 + 1.0 / 6.0).epsilon(1e-7));
    CHECK(refine({2, 6, 4}, 0.0f) == 0.0f);  // d* = 0 is left alone
    CHECK(refine({9, 6, 2}, 2.0f) == 2.0f);  // d* = d_max is left alone
    CHECK(refine({5, 5, 5, 5}, 1.0f) == 1.0f); // flat: denominator 0
    CHECK(refine({5, 5, 5}, kInvalidDisparity) == kInvalidDisparity);

    SUBCASE("offset never exceeds half a pixel")
    {
        std::mt19937_64 gen(3);
        const CostVolume s = oracle::random_volume(gen, 12, 12, 9, 1000);
        const DisparityMap d = select_disparity(s);
        const DisparityMap r = subpixel_refine(s, d);
        for (std::size_t i = 0; i < d.size(); ++i)
            CHECK(std::fabs(r.pixels()[i] - d.pixels()[i]) <= 0.5f);
    }
}

TEST_CASE("uniqueness_filter")
{
    auto run = [](std::vector<CostVolume::cost_type> s, int gamma) {
        const CostVolume v = single_pixel(std::move(s));
        return uniqueness_filter(v, select_disparity(v), gamma).at(0, 0);
    };
    CHECK(run({10, 50, 60}, 100) == 0.0f);                // 60 - 10 = 50 >= 10
    CHECK(run({10, 11, 12}, 100) == kInvalidDisparity);   // 2 < 10
    CHECK(run({100, 300, 300, 101}, 1) == 0.0f);              // margin of exactly 1%
    CHECK(run({100, 300, 300, 100}, 1) == kInvalidDisparity); // non-adjacent tie
    CHECK(run({30, 20, 31}, 100) == 1.0f); // no non-adjacent candidate: kept
}

TEST_CASE("right_disparity and lr_consistency")
{
    SUBCASE("reprojected right disparity disagreeing by more than delta invalidates")
    {
        CostVolume s(20, 1, 12, 100);
        s.at(14, 0, 9) = 0; // D_R(5) = 9
        DisparityMap dl(20, 1, kInvalidDisparity);
        dl.at(10, 0) = 5.0f;
        CHECK(right_disparity(s).at(5, 0) == 9.0f);
        CHECK(lr_consistency(dl, s, 2).at(10, 0) == kInvalidDisparity);
        CHECK(lr_consistency(dl, s, 4).at(10, 0) == 5.0f);
    }
    SUBCASE("constant-disparity volume passes everywhere it projects inside")
    {
        const int w = 16, nd = 6, shift = 3;
        CostVolume s(w, 2, nd, 50);
        for (int y = 0; y < 2; ++y)
            for (int x = 0; x < w; ++x)
                s.at(x, y, shift) = 0;
        const DisparityMap dl = select_disparity(s);
        const DisparityMap out = lr_consistency(dl, s, 1);
        for (int y = 0; y < 2; ++y)
            for (int x = 0; x < w; ++x)
                CHECK(out.at(x, y) == (x >= shift ? float(shift) : kInvalidDisparity));
    }
    SUBCASE("slack bound keeps everything with an in-bounds projection")
    {
        std::mt19937_64 gen(8);
        const CostVolume s = oracle::random_volume(gen, 12, 5, 6);
        const DisparityMap dl = select_disparity(s);
        const DisparityMap out = lr_consistency(dl, s, 100);
        for (int y = 0; y < 5; ++y)
            for (int x = 0; x < 12; ++x)
                CHECK(out.at(x, y) == (x - dl.at(x, y) >= 0 ? dl.at(x, y) : kInvalidDisparity));
    }
}

TEST_CASE("speckle_filter")
{
    SUBCASE("uniform map survives")
    {
        const DisparityMap m(6, 5, 3.0f);
        CHECK(speckle_filter(m, 30, 1) == m);
    }
    SUBCASE("isolated pixel is removed with W = 2")
    {
        DisparityMap m(5, 5, kInvalidDisparity);
        m.at(2, 2) = 4.0f;
        CHECK(speckle_filter(m, 2, 1).at(2, 2) == kInvalidDisparity);
        CHECK(speckle_filter(m, 1, 1).at(2, 2) == 4.0f);
    }
    SUBCASE("plateaus further apart than delta are separate components")
    {
        DisparityMap m(10, 4, 2.0f);
        for (int y = 0; y < 4; ++y)
            for (int x = 5; x < 10; ++x)
                m.at(x, y) = 20.0f;
        // Each plateau has 20 pixels.
        CHECK(speckle_filter(m, 20, 3) == m);
        const DisparityMap gone = speckle_filter(m, 21, 3);
        for (float v : gone.pixels())
            CHECK(v == kInvalidDisparity);
        // With delta >= 18 the plateaus merge into one 40-pixel region.
        CHECK(speckle_filter(m, 40, 18) == m);
    }
    SUBCASE("diagonal neighbors are not connected")
    {
        DisparityMap m(2, 2, kInvalidDisparity);
        m.at(0, 0) = 1.0f;
        m.at(1, 1) = 1.0f;
        const DisparityMap out = speckle_filter(m, 2, 5);
        CHECK(out.at(0, 0) == kInvalidDisparity);
        CHECK(out.at(1, 1) == kInvalidDisparity);
    }
}

TEST_CASE("filters only ever invalidate")
{
    std::mt19937_64 gen(77);
    for (int trial = 0; trial < 25; ++trial) {
        const CostVolume s = oracle::random_volume(gen, 9, 7, 7, 400);
        const DisparityMap d = subpixel_refine(s, select_disparity(s));
        const int gamma = std::uniform_int_distribution<int>(1, 100)(gen);
        const int delta = std::uniform_int_distribution<int>(1, 4)(gen);
        const int window = std::uniform_int_distribution<int>(1, 30)(gen);
        CHECK(only_invalidates(d, uniqueness_filter(s, d, gamma)));
        CHECK(only_invalidates(d, lr_consistency(d, s, delta)));
        CHECK(only_invalidates(d, speckle_filter(d, window, delta)));
    }
}

TEST_CASE("run_sgbm")
{
    SUBCASE("recovers a constant shift on textured input")
    {
        const StereoPair pair = generate({96, 64, 6, SynthPattern::UniformNoise, 21});
        MatchParams p;
        p.num_disparities = 16;
        const DisparityMap d = run_sgbm(pair.left, pair.right, p);
        int good = 0, total = 0;
        for (int y = 1; y < 63; ++y)
            for (int x = 7; x < 95; ++x) {
                ++total;
                good += is_valid(d.at(x, y)) && std::fabs(d.at(x, y) - 6.0f) <= 1.0f;
            }
        CHECK(good >= 0.95 * total);
    }
    SUBCASE("identical views give zero disparity on the interior")
    {
        const StereoPair pair = generate({40, 30, 0, SynthPattern::UniformNoise, 4});
        MatchParams p;
        p.num_disparities = 8;
        const DisparityMap d = run_sgbm(pair.left, pair.right, p);
        for (int y = 1; y < 29; ++y)
            for (int x = 1; x < 39; ++x)
                CHECK(d.at(x, y) == 0.0f);
    }
    SUBCASE("all-black pair resolves to an all-zero map")
    {
        const GrayImage black(24, 16, 0);
        MatchParams p;
        p.num_disparities = 8;
        const DisparityMap d = run_sgbm(black, black, p);
        for (float v : d.pixels())
            CHECK(v == 0.0f);
    }
    SUBCASE("deterministic")
    {
        const StereoPair pair = generate({48, 32, 4, SynthPattern::Checker, 1});
        MatchParams p;
        p.num_disparities = 12;
        CHECK(run_sgbm(pair.left, pair.right, p) == run_sgbm(pair.left, pair.right, p));
    }
    SUBCASE("invalid parameters are rejected")
    {
        MatchParams p;
        p.beta = p.alpha;
        CHECK_THROWS_AS(run_sgbm(GrayImage(8, 8), GrayImage(8, 8), p), std::invalid_argument);
        CHECK_THROWS_AS(run_sgbm(GrayImage(8, 8), GrayImage(9, 8), MatchParams{}), DimensionError);
    }
}
