#include <doctest.h>

#include <cmath>
#include <set>

#include "plankton/error.hpp"
#include "plankton/imaging.hpp"
#include "support/synthetic.hpp"

using namespace plankton;

TEST_CASE("extract_mask thresholds on the peak channel") {
    RoiImage image = synthetic::blank(20, 20);
    synthetic::fill_rect(image, 5, 5, 10, 10, 255, 255, 255);

    ForegroundMask mask = extract_mask(image, 10);
    CHECK(mask.count() == 100);
    CHECK(mask.component_count == 1);
}

TEST_CASE("extract_mask throws NoForeground on an all-black image") {
    RoiImage image = synthetic::blank(8, 8);
    CHECK_THROWS_AS(extract_mask(image, 10), Error);
    try {
        extract_mask(image, 10);
    } catch (const Error& error) {
        CHECK(error.code() == ErrorCode::NoForeground);
    }
}

TEST_CASE("extract_mask keeps only the largest component") {
    RoiImage image = synthetic::blank(40, 20);
    synthetic::fill_rect(image, 2, 2, 10, 5, 200, 0, 0);   // 50 pixels
    synthetic::fill_rect(image, 25, 10, 5, 4, 0, 200, 0);  // 20 pixels

    ForegroundMask mask = extract_mask(image, 10);
    CHECK(mask.component_count == 2);
    CHECK(mask.count() == 50);
    CHECK(mask.at(3, 3));
    CHECK_FALSE(mask.at(26, 11));
}

TEST_CASE("extract_mask: a dim pixel at the threshold stays background") {
    RoiImage image = synthetic::blank(4, 4);
    image.at(1, 1)[1] = 10;  // exactly the threshold, must not pass '>'
    CHECK_THROWS_AS(extract_mask(image, 10), Error);
    image.at(1, 1)[1] = 11;
    ForegroundMask mask = extract_mask(image, 10);
    CHECK(mask.count() == 1);
}

TEST_CASE("trace_contour on a filled square yields the border pixel centers") {
    RoiImage image = synthetic::blank(14, 14);
    synthetic::fill_rect(image, 2, 2, 10, 10, 255, 255, 255);
    ForegroundMask mask = extract_mask(image, 10);

    Contour contour = trace_contour(mask);
    // 10x10 square: 10*10 - 8*8 = 36 border pixels.
    std::set<std::pair<int, int>> unique;
    for (const Point& p : contour.points) {
        unique.insert({static_cast<int>(p.x), static_cast<int>(p.y)});
    }
    CHECK(contour.points.size() == 36);
    CHECK(unique.size() == 36);

    REQUIRE(contour.hull.size() == 4);
    std::set<std::pair<int, int>> corners;
    for (const Point& p : contour.hull) {
        corners.insert({static_cast<int>(p.x), static_cast<int>(p.y)});
    }
    CHECK(corners == std::set<std::pair<int, int>>{{2, 2}, {11, 2}, {2, 11}, {11, 11}});

    CHECK(polygon_area(contour.points) == doctest::Approx(81.0));
    CHECK(polygon_perimeter(contour.points) == doctest::Approx(36.0));
}

TEST_CASE("trace_contour handles a single pixel") {
    RoiImage image = synthetic::blank(5, 5);
    image.at(2, 3)[0] = 200;
    ForegroundMask mask = extract_mask(image, 10);

    Contour contour = trace_contour(mask);
    REQUIRE(contour.points.size() == 1);
    CHECK(contour.points[0].x == 2);
    CHECK(contour.points[0].y == 3);
    CHECK(polygon_area(contour.points) == 0.0);
    CHECK(polygon_perimeter(contour.points) == 0.0);
}

TEST_CASE("trace_contour closes a one-pixel-wide line") {
    RoiImage image = synthetic::blank(10, 4);
    synthetic::fill_rect(image, 1, 2, 7, 1, 255, 255, 255);
    ForegroundMask mask = extract_mask(image, 10);

    Contour contour = trace_contour(mask);
    CHECK(polygon_area(contour.points) == doctest::Approx(0.0));
    // Out and back along the 7 pixels.
    CHECK(polygon_perimeter(contour.points) == doctest::Approx(12.0));
}

TEST_CASE("hull of an L-shape strictly contains the contour") {
    RoiImage image = synthetic::blank(30, 30);
    synthetic::fill_rect(image, 2, 2, 20, 8, 255, 255, 255);
    synthetic::fill_rect(image, 2, 2, 8, 20, 255, 255, 255);
    ForegroundMask mask = extract_mask(image, 10);

    Contour contour = trace_contour(mask);
    double contour_area = polygon_area(contour.points);
    double hull_area = polygon_area(contour.hull);
    CHECK(hull_area > contour_area);

    for (const Point& p : contour.points) {
        CHECK(hull_contains(contour.hull, p, 1e-7));
    }
}

TEST_CASE("hull containment holds for random blobs") {
    Rng rng(2024);
    for (int trial = 0; trial < 25; ++trial) {
        RoiImage image = synthetic::blank(48, 48);
        int blobs = 1 + static_cast<int>(rng.next_below(3));
        for (int b = 0; b < blobs; ++b) {
            int w = 3 + static_cast<int>(rng.next_below(20));
            int h = 3 + static_cast<int>(rng.next_below(20));
            int x = 2 + static_cast<int>(rng.next_below(20));
            int y = 2 + static_cast<int>(rng.next_below(20));
            synthetic::fill_rect(image, x, y, w, h, 255, 255, 255);
        }
        ForegroundMask mask = extract_mask(image, 10);
        Contour contour = trace_contour(mask);
        for (const Point& p : contour.points) {
            CHECK(hull_contains(contour.hull, p, 1e-7));
        }
        CHECK(polygon_area(contour.hull) >= polygon_area(contour.points) - 1e-9);
    }
}

TEST_CASE("resize_squash dimension contract and identity") {
    RoiImage wide = synthetic::blank(256, 64);
    synthetic::fill_rect(wide, 0, 0, 256, 64, 90, 120, 150);
    RoiImage squashed = resize_squash(wide, 128);
    CHECK(squashed.width == 128);
    CHECK(squashed.height == 128);

    RoiImage same = synthetic::blank(128, 128);
    synthetic::fill_rect(same, 10, 20, 40, 30, 200, 100, 50);
    RoiImage identity = resize_squash(same, 128);
    CHECK(identity.pixels == same.pixels);

    RoiImage dot = synthetic::blank(1, 1);
    dot.at(0, 0)[0] = 77;
    dot.at(0, 0)[1] = 78;
    dot.at(0, 0)[2] = 79;
    RoiImage constant = resize_squash(dot, 128);
    CHECK(constant.width == 128);
    for (int y = 0; y < 128; y += 17) {
        for (int x = 0; x < 128; x += 17) {
            CHECK(constant.at(x, y)[0] == 77);
            CHECK(constant.at(x, y)[2] == 79);
        }
    }
}

TEST_CASE("resize_squash keeps the mean of uniform images") {
    RoiImage uniform = synthetic::blank(100, 40);
    synthetic::fill_rect(uniform, 0, 0, 100, 40, 180, 180, 180);
    RoiImage out = resize_squash(uniform, 64);
    double mean = 0;
    for (std::uint8_t v : out.pixels) mean += v;
    mean /= static_cast<double>(out.pixels.size());
    CHECK(mean == doctest::Approx(180.0).epsilon(0.02));
}

TEST_CASE("resize_pad scales down preserving aspect and never upscales") {
    // The extreme-aspect case: 1280x50 content becomes 128x5.
    RoiImage strip = synthetic::blank(1280, 50);
    synthetic::fill_rect(strip, 0, 0, 1280, 50, 255, 255, 255);
    RoiImage padded = resize_pad(strip, 128);
    CHECK(padded.width == 128);
    CHECK(padded.height == 128);
    int content_rows = 0;
    for (int y = 0; y < 128; ++y) {
        bool any = false;
        for (int x = 0; x < 128; ++x) {
            if (padded.at(x, y)[0] > 0) any = true;
        }
        if (any) ++content_rows;
    }
    CHECK(content_rows == 5);

    // Small content is centered, not upscaled.
    RoiImage small = synthetic::blank(100, 60);
    synthetic::fill_rect(small, 0, 0, 100, 60, 200, 200, 200);
    RoiImage centered = resize_pad(small, 128);
    CHECK(centered.width == 128);
    int first_x = -1, last_x = -1, first_y = -1, last_y = -1;
    for (int y = 0; y < 128; ++y) {
        for (int x = 0; x < 128; ++x) {
            if (centered.at(x, y)[0] > 0) {
                if (first_x < 0 || x < first_x) first_x = x;
                if (x > last_x) last_x = x;
                if (first_y < 0) first_y = y;
                last_y = y;
            }
        }
    }
    CHECK(last_x - first_x + 1 == 100);  // unscaled
    CHECK(last_y - first_y + 1 == 60);
    CHECK(first_x == 14);  // (128-100)/2
    CHECK(first_y == 34);  // (128-60)/2

    // Identity case.
    RoiImage exact = synthetic::blank(128, 128);
    synthetic::fill_rect(exact, 5, 5, 100, 100, 130, 10, 10);
    RoiImage untouched = resize_pad(exact, 128);
    CHECK(untouched.pixels == exact.pixels);
}

TEST_CASE("augment with identity params is the identity") {
    RoiImage image = synthetic::blank(33, 21);
    synthetic::fill_rect(image, 3, 4, 12, 9, 210, 90, 30);
    synthetic::fill_rect(image, 20, 10, 6, 6, 10, 220, 130);

    AugmentParams identity;
    RoiImage out = augment(image, identity);
    CHECK(out.pixels == image.pixels);
}

TEST_CASE("augment rotation by 180 degrees maps (x,y) to (w-1-x, h-1-y)") {
    RoiImage image = synthetic::blank(2, 1);
    image.at(0, 0)[0] = 50;
    image.at(1, 0)[0] = 250;

    AugmentParams params;
    params.rotation_deg = 180;
    RoiImage out = augment(image, params);
    CHECK(out.at(0, 0)[0] == 250);
    CHECK(out.at(1, 0)[0] == 50);

    RoiImage bigger = synthetic::blank(7, 5);
    synthetic::fill_rect(bigger, 0, 0, 2, 2, 99, 0, 0);
    RoiImage rotated = augment(bigger, params);
    for (int y = 0; y < 5; ++y) {
        for (int x = 0; x < 7; ++x) {
            CHECK(rotated.at(x, y)[0] == bigger.at(6 - x, 4 - y)[0]);
        }
    }
}

TEST_CASE("horizontal flip is an involution") {
    RoiImage image = synthetic::blank(24, 16);
    synthetic::fill_rect(image, 2, 3, 7, 5, 180, 60, 200);
    image.at(20, 12)[1] = 255;

    AugmentParams flip;
    flip.flip_h = true;
    RoiImage once = augment(image, flip);
    CHECK(once.pixels != image.pixels);
    RoiImage twice = augment(once, flip);
    CHECK(twice.pixels == image.pixels);
}

TEST_CASE("augment fills uncovered pixels with black and is deterministic") {
    RoiImage image = synthetic::blank(20, 20);
    synthetic::fill_rect(image, 0, 0, 20, 20, 255, 255, 255);

    AugmentParams params;
    params.rotation_deg = 45;
    params.zoom = 1.0;
    RoiImage a = augment(image, params);
    RoiImage b = augment(image, params);
    CHECK(a.pixels == b.pixels);
    CHECK(a.at(0, 0)[0] == 0);  // corner leaves the rotated square
    CHECK(a.at(10, 10)[0] == 255);
}

TEST_CASE("augment rejects out-of-range params") {
    RoiImage image = synthetic::blank(4, 4);
    image.at(1, 1)[0] = 100;
    AugmentParams params;
    params.zoom = 1.5;
    CHECK_THROWS_AS(augment(image, params), Error);
    params.zoom = 1.0;
    params.shear_deg = 11;
    CHECK_THROWS_AS(augment(image, params), Error);
}

TEST_CASE("sample_augment_params respects the configured ranges") {
    AugmentRanges ranges;
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        AugmentParams params = sample_augment_params(ranges, rng);
        CHECK(params.rotation_deg >= -180);
        CHECK(params.rotation_deg <= 180);
        CHECK(params.zoom >= 0.8);
        CHECK(params.zoom <= 1.2);
        CHECK(params.shear_deg >= -10);
        CHECK(params.shear_deg <= 10);
    }
}
