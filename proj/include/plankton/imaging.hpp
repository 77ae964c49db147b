#pragma once

#include <cstdint>
#include <vector>

#include "plankton/image.hpp"
#include "plankton/rng.hpp"

namespace plankton {

struct Point {
    double x = 0;
    double y = 0;
};

struct ForegroundMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;  // 0/1 per pixel, row-major
    int component_count = 0;         // 8-connected components before largest-only reduction

    bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
    std::size_t count() const;
};

// Closed boundary polygon through pixel centers plus its convex hull.
// Hull vertices are strict corners (collinear points removed).
struct Contour {
    std::vector<Point> points;
    std::vector<Point> hull;
};

struct AugmentParams {
    double rotation_deg = 0;  // [-180, 180]
    bool flip_h = false;
    bool flip_v = false;
    double zoom = 1.0;       // [0.8, 1.2]
    double shear_deg = 0;    // [-10, 10]
};

// Sampling ranges for random augmentation draws.
struct AugmentRanges {
    double max_rotation_deg = 180.0;
    double zoom_lo = 0.8;
    double zoom_hi = 1.2;
    double max_shear_deg = 10.0;
    bool allow_flip_h = true;
    bool allow_flip_v = true;
};

// Foreground iff max(R,G,B) > threshold; keeps only the largest 8-connected
// component. Throws NoForeground when thresholding leaves nothing.
ForegroundMask extract_mask(const RoiImage& image, int threshold);

// Moore boundary following (8-connected) from the top-left-most foreground
// pixel; single-pixel masks yield a 1-point contour.
Contour trace_contour(const ForegroundMask& mask);

RoiImage resize_squash(const RoiImage& image, int side);
RoiImage resize_pad(const RoiImage& image, int side);

// One composed affine map: flip, rotate about center, shear, zoom about
// center. Bilinear sampling, black fill outside the source.
RoiImage augment(const RoiImage& image, const AugmentParams& params);

AugmentParams sample_augment_params(const AugmentRanges& ranges, Rng& rng);

// Polygon helpers shared with the feature extractor (pixel-center convention).
double polygon_area(const std::vector<Point>& polygon);       // shoelace, absolute
double polygon_perimeter(const std::vector<Point>& polygon);  // closed
std::vector<Point> convex_hull(std::vector<Point> points);
bool hull_contains(const std::vector<Point>& hull, const Point& p, double tolerance = 1e-9);

}  // namespace plankton
