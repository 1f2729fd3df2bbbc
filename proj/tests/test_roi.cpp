#include <doctest.h>

#include <cmath>
#include <random>

#include "maskprop/roi.hpp"
#include "oracles.hpp"

using namespace maskprop;
using roi::RoiParams;

TEST_CASE("mask_bbox") {
    RoiParams params;
    params.min_pixels = 1;

    ProbMap zero(10, 10, 0.f);
    CHECK(!roi::mask_bbox(zero, params).has_value());

    ProbMap single(10, 10, 0.f);
    single.at(4, 7) = 1.f;
    auto box = roi::mask_bbox(single, params);
    REQUIRE(box.has_value());
    CHECK(*box == BBox{4, 7, 5, 8});

    ProbMap two(10, 10, 0.f);
    two.at(1, 1) = 0.9f;
    two.at(6, 3) = 0.8f;
    box = roi::mask_bbox(two, params);
    REQUIRE(box.has_value());
    CHECK(*box == BBox{1, 1, 7, 4});

    params.min_pixels = 3;
    CHECK(!roi::mask_bbox(two, params).has_value());
}

TEST_CASE("mask_bbox contains every thresholded pixel") {
    std::mt19937 rng(101);
    RoiParams params;
    params.min_pixels = 1;
    for (int trial = 0; trial < 30; ++trial) {
        ProbMap m = oracles::random_prob_map(rng, 12, 12);
        auto box = roi::mask_bbox(m, params);
        for (int y = 0; y < 12; ++y)
            for (int x = 0; x < 12; ++x)
                if (m.at(x, y) >= params.threshold) {
                    REQUIRE(box.has_value());
                    CHECK(x >= box->x0);
                    CHECK(x < box->x1);
                    CHECK(y >= box->y0);
                    CHECK(y < box->y1);
                }
    }
}

TEST_CASE("expand_bbox") {
    CHECK(roi::expand_bbox(BBox{3, 4, 8, 9}, 0.f, 20, 20) == BBox{3, 4, 8, 9});
    CHECK(roi::expand_bbox(BBox{10, 10, 20, 20}, 0.5f, 100, 100) == BBox{5, 5, 25, 25});
    CHECK(roi::expand_bbox(BBox{1, 1, 4, 4}, 3.f, 30, 30) == BBox{0, 0, 13, 13});

    SUBCASE("monotone in margin and always within bounds") {
        std::mt19937 rng(7);
        for (int trial = 0; trial < 50; ++trial) {
            int x0 = static_cast<int>(rng() % 30), y0 = static_cast<int>(rng() % 30);
            BBox b{x0, y0, x0 + 1 + static_cast<int>(rng() % 10), y0 + 1 + static_cast<int>(rng() % 10)};
            BBox prev = b;
            for (float margin : {0.1f, 0.4f, 0.9f, 2.f}) {
                BBox e = roi::expand_bbox(b, margin, 40, 40);
                CHECK(e.valid_within(40, 40));
                CHECK(e.x0 <= prev.x0);
                CHECK(e.y0 <= prev.y0);
                CHECK(e.x1 >= prev.x1);
                CHECK(e.y1 >= prev.y1);
                prev = e;
            }
        }
    }
}

TEST_CASE("crop_instance and paste_instance") {
    std::mt19937 rng(19);

    SUBCASE("identity when bbox covers the full image at native size") {
        Image img(16, 16);
        for (float& v : img.data) v = static_cast<float>(rng() % 1000) / 1000.f;
        ProbMap prob = oracles::random_prob_map(rng, 16, 16);
        auto [ip, pp] = roi::crop_instance(img, prob, BBox{0, 0, 16, 16}, 16);
        CHECK(ip.data == img.data);
        CHECK(pp.data == prob.data);
    }

    SUBCASE("constant maps survive crop and resize") {
        Image img(20, 20, 0.25f);
        ProbMap prob(20, 20, 0.6f);
        auto [ip, pp] = roi::crop_instance(img, prob, BBox{3, 5, 11, 17}, 32);
        for (float v : pp.data) CHECK(v == doctest::Approx(0.6f));
        for (float v : ip.data) CHECK(v == doctest::Approx(0.25f));
    }

    SUBCASE("smooth map round trip within interpolation tolerance") {
        ProbMap smooth(40, 40);
        for (int y = 0; y < 40; ++y)
            for (int x = 0; x < 40; ++x)
                smooth.at(x, y) =
                    0.5f + 0.4f * std::sin(0.2f * static_cast<float>(x)) *
                               std::cos(0.15f * static_cast<float>(y));
        Image img(40, 40, 0.f);
        BBox box{4, 6, 30, 28};
        auto [ip, pp] = roi::crop_instance(img, smooth, box, 64);
        ProbMap back = roi::paste_instance(ProbMap(40, 40), pp, box);
        for (int y = box.y0; y < box.y1; ++y)
            for (int x = box.x0; x < box.x1; ++x)
                CHECK(std::fabs(back.at(x, y) - smooth.at(x, y)) <= 0.02f);
    }

    SUBCASE("round trip is near-exact when patch grid divides the box grid") {
        // 64-pixel patch over a 22-wide box: 63 = 3 * 21, so source samples
        // land exactly on patch grid points in both directions.
        std::mt19937 rng2(77);
        ProbMap m = oracles::random_prob_map(rng2, 40, 40);
        Image img(40, 40, 0.f);
        BBox box{5, 9, 27, 31};
        auto [ip, pp] = roi::crop_instance(img, m, box, 64);
        ProbMap back = roi::paste_instance(ProbMap(40, 40), pp, box);
        for (int y = box.y0; y < box.y1; ++y)
            for (int x = box.x0; x < box.x1; ++x)
                CHECK(back.at(x, y) == doctest::Approx(m.at(x, y)).epsilon(1e-5));
    }

    SUBCASE("paste_instance support rule") {
        ProbMap ones(8, 8, 1.f);
        ProbMap full(20, 20, 0.9f);
        BBox box{2, 3, 10, 12};
        ProbMap out = roi::paste_instance(full, ones, box);
        for (int y = 0; y < 20; ++y)
            for (int x = 0; x < 20; ++x) {
                bool inside = x >= box.x0 && x < box.x1 && y >= box.y0 && y < box.y1;
                CHECK(out.at(x, y) == (inside ? 1.f : 0.f));
            }
    }

    SUBCASE("invalid bbox throws") {
        Image img(8, 8);
        ProbMap prob(8, 8);
        CHECK_THROWS_AS(roi::crop_instance(img, prob, BBox{0, 0, 9, 8}, 16), std::invalid_argument);
        CHECK_THROWS_AS(roi::paste_instance(prob, ProbMap(2, 2), BBox{7, 7, 9, 9}),
                        std::invalid_argument);
    }
}
