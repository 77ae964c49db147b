#include "plankton/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

#include "plankton/error.hpp"

namespace plankton {

std::size_t ForegroundMask::count() const {
    std::size_t n = 0;
    for (auto b : bits) n += b;
    return n;
}

ForegroundMask extract_mask(const RoiImage& image, int threshold) {
    if (threshold < 0 || threshold > 255) {
        throw Error(ErrorCode::BadConfig, "threshold must be in [0, 255]");
    }
    const int w = image.width;
    const int h = image.height;
    std::vector<std::uint8_t> fg(static_cast<std::size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::uint8_t* px = image.at(x, y);
            int peak = std::max({px[0], px[1], px[2]});
            fg[static_cast<std::size_t>(y) * w + x] = peak > threshold ? 1 : 0;
        }
    }

    // Label 8-connected components, remember the largest.
    std::vector<std::int32_t> label(fg.size(), -1);
    int n_components = 0;
    int best_label = -1;
    std::size_t best_size = 0;
    std::deque<std::pair<int, int>> queue;
    for (int y0 = 0; y0 < h; ++y0) {
        for (int x0 = 0; x0 < w; ++x0) {
            std::size_t idx0 = static_cast<std::size_t>(y0) * w + x0;
            if (!fg[idx0] || label[idx0] >= 0) continue;
            int current = n_components++;
            std::size_t size = 0;
            label[idx0] = current;
            queue.emplace_back(x0, y0);
            while (!queue.empty()) {
                auto [x, y] = queue.front();
                queue.pop_front();
                ++size;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        int nx = x + dx, ny = y + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
                        if (fg[nidx] && label[nidx] < 0) {
                            label[nidx] = current;
                            queue.emplace_back(nx, ny);
                        }
                    }
                }
            }
            if (size > best_size) {
                best_size = size;
                best_label = current;
            }
        }
    }
    if (n_components == 0) {
        throw Error(ErrorCode::NoForeground, "no pixel brighter than threshold");
    }

    ForegroundMask mask;
    mask.width = w;
    mask.height = h;
    mask.component_count = n_components;
    mask.bits.assign(fg.size(), 0);
    for (std::size_t i = 0; i < fg.size(); ++i) {
        mask.bits[i] = (label[i] == best_label) ? 1 : 0;
    }
    return mask;
}

namespace {

// Moore neighborhood in clockwise order (screen coordinates, y down).
constexpr int kDx[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr int kDy[8] = {0, -1, -1, -1, 0, 1, 1, 1};

int direction_index(int dx, int dy) {
    for (int i = 0; i < 8; ++i) {
        if (kDx[i] == dx && kDy[i] == dy) return i;
    }
    return 0;
}

double cross(const Point& o, const Point& a, const Point& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace

Contour trace_contour(const ForegroundMask& mask) {
    const int w = mask.width;
    const int h = mask.height;
    int sx = -1, sy = -1;
    for (int y = 0; y < h && sx < 0; ++y) {
        for (int x = 0; x < w; ++x) {
            if (mask.at(x, y)) {
                sx = x;
                sy = y;
                break;
            }
        }
    }
    if (sx < 0) throw Error(ErrorCode::NoForeground, "empty mask");

    auto is_fg = [&](int x, int y) {
        return x >= 0 && y >= 0 && x < w && y < h && mask.at(x, y);
    };

    Contour contour;
    contour.points.push_back({static_cast<double>(sx), static_cast<double>(sy)});

    // Backtrack starts west of the start pixel, which is background by the
    // row-major scan order. The walk stops when its first move repeats
    // (same pixel entered with the same backtrack), which closes the
    // boundary even for one-pixel-wide appendages.
    int px = sx, py = sy;
    int bx = sx - 1, by = sy;
    bool isolated = true;
    for (int i = 0; i < 8; ++i) {
        if (is_fg(sx + kDx[i], sy + kDy[i])) {
            isolated = false;
            break;
        }
    }
    if (!isolated) {
        int first_px = -1, first_py = -1, first_bx = -1, first_by = -1;
        const std::size_t step_limit = 4 * mask.bits.size() + 8;
        for (std::size_t step = 0; step < step_limit; ++step) {
            int dir = direction_index(bx - px, by - py);
            int nx = px, ny = py, prev_x = bx, prev_y = by;
            bool found = false;
            for (int probe = 1; probe <= 8; ++probe) {
                int d = (dir + probe) % 8;
                int cx = px + kDx[d];
                int cy = py + kDy[d];
                if (is_fg(cx, cy)) {
                    nx = cx;
                    ny = cy;
                    found = true;
                    break;
                }
                prev_x = cx;
                prev_y = cy;
            }
            if (!found) break;  // unreachable once isolated is excluded
            if (step == 0) {
                first_px = nx;
                first_py = ny;
                first_bx = prev_x;
                first_by = prev_y;
            } else if (nx == first_px && ny == first_py && prev_x == first_bx &&
                       prev_y == first_by) {
                break;
            }
            px = nx;
            py = ny;
            bx = prev_x;
            by = prev_y;
            contour.points.push_back({static_cast<double>(px), static_cast<double>(py)});
        }
        // The walk re-enters the start before the first move repeats.
        if (contour.points.size() > 1) {
            const Point& last = contour.points.back();
            if (last.x == sx && last.y == sy) contour.points.pop_back();
        }
    }

    contour.hull = convex_hull(contour.points);
    return contour;
}

std::vector<Point> convex_hull(std::vector<Point> points) {
    std::sort(points.begin(), points.end(), [](const Point& a, const Point& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    points.erase(std::unique(points.begin(), points.end(),
                             [](const Point& a, const Point& b) {
                                 return a.x == b.x && a.y == b.y;
                             }),
                 points.end());
    const std::size_t n = points.size();
    if (n <= 2) return points;

    // Monotone chain; strict turns only, so collinear points drop out.
    std::vector<Point> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], points[i]) <= 0) --k;
        hull[k++] = points[i];
    }
    std::size_t lower = k + 1;
    for (std::size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], points[i]) <= 0) --k;
        hull[k++] = points[i];
    }
    hull.resize(k - 1);
    return hull;
}

bool hull_contains(const std::vector<Point>& hull, const Point& p, double tolerance) {
    if (hull.empty()) return false;
    if (hull.size() == 1) {
        return std::abs(hull[0].x - p.x) <= tolerance && std::abs(hull[0].y - p.y) <= tolerance;
    }
    if (hull.size() == 2) {
        double c = cross(hull[0], hull[1], p);
        double len = std::hypot(hull[1].x - hull[0].x, hull[1].y - hull[0].y);
        if (std::abs(c) > tolerance * std::max(1.0, len)) return false;
        double t = ((p.x - hull[0].x) * (hull[1].x - hull[0].x) +
                    (p.y - hull[0].y) * (hull[1].y - hull[0].y)) /
                   (len * len);
        return t >= -tolerance && t <= 1 + tolerance;
    }
    // Consistent orientation: every edge must see p on the same side.
    double ref = cross(hull[0], hull[1], hull[2]);
    double sign = ref >= 0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const Point& a = hull[i];
        const Point& b = hull[(i + 1) % hull.size()];
        if (sign * cross(a, b, p) < -tolerance) return false;
    }
    return true;
}

double polygon_area(const std::vector<Point>& polygon) {
    if (polygon.size() < 3) return 0.0;
    double twice = 0.0;
    for (std::size_t i = 0; i < polygon.size(); ++i) {
        const Point& a = polygon[i];
        const Point& b = polygon[(i + 1) % polygon.size()];
        twice += a.x * b.y - b.x * a.y;
    }
    return std::abs(twice) / 2.0;
}

double polygon_perimeter(const std::vector<Point>& polygon) {
    if (polygon.size() < 2) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < polygon.size(); ++i) {
        const Point& a = polygon[i];
        const Point& b = polygon[(i + 1) % polygon.size()];
        total += std::hypot(b.x - a.x, b.y - a.y);
    }
    return total;
}

namespace {

inline void bilinear_sample(const RoiImage& src, double x, double y, std::uint8_t* out) {
    if (x < -0.5 || y < -0.5 || x > src.width - 0.5 || y > src.height - 0.5) {
        out[0] = out[1] = out[2] = 0;
        return;
    }
    double cx = std::clamp(x, 0.0, static_cast<double>(src.width - 1));
    double cy = std::clamp(y, 0.0, static_cast<double>(src.height - 1));
    int x0 = static_cast<int>(std::floor(cx));
    int y0 = static_cast<int>(std::floor(cy));
    int x1 = std::min(x0 + 1, src.width - 1);
    int y1 = std::min(y0 + 1, src.height - 1);
    double fx = cx - x0;
    double fy = cy - y0;
    const std::uint8_t* p00 = src.at(x0, y0);
    const std::uint8_t* p10 = src.at(x1, y0);
    const std::uint8_t* p01 = src.at(x0, y1);
    const std::uint8_t* p11 = src.at(x1, y1);
    for (int c = 0; c < 3; ++c) {
        double top = p00[c] * (1 - fx) + p10[c] * fx;
        double bottom = p01[c] * (1 - fx) + p11[c] * fx;
        double v = top * (1 - fy) + bottom * fy;
        out[c] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
    }
}

RoiImage resample(const RoiImage& src, int out_w, int out_h) {
    RoiImage dst = RoiImage::filled(out_w, out_h);
    const double sx = static_cast<double>(src.width) / out_w;
    const double sy = static_cast<double>(src.height) / out_h;
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            // Center-aligned mapping; reduces to the identity when sizes match.
            double u = (x + 0.5) * sx - 0.5;
            double v = (y + 0.5) * sy - 0.5;
            bilinear_sample(src, u, v, dst.at(x, y));
        }
    }
    return dst;
}

}  // namespace

RoiImage resize_squash(const RoiImage& image, int side) {
    if (side < 1) throw Error(ErrorCode::BadConfig, "side must be >= 1");
    if (image.width == side && image.height == side) return image;
    return resample(image, side, side);
}

RoiImage resize_pad(const RoiImage& image, int side) {
    if (side < 1) throw Error(ErrorCode::BadConfig, "side must be >= 1");
    RoiImage content = image;
    int max_dim = std::max(image.width, image.height);
    if (max_dim > side) {
        double scale = static_cast<double>(side) / max_dim;
        int nw = std::max(1, static_cast<int>(std::lround(image.width * scale)));
        int nh = std::max(1, static_cast<int>(std::lround(image.height * scale)));
        if (image.width >= image.height) nw = side;
        if (image.height >= image.width) nh = side;
        content = resample(image, nw, nh);
    }
    if (content.width == side && content.height == side) return content;

    RoiImage canvas = RoiImage::filled(side, side);
    int x0 = (side - content.width) / 2;   // leftover pixel goes right/bottom
    int y0 = (side - content.height) / 2;
    for (int y = 0; y < content.height; ++y) {
        const std::uint8_t* src_row = content.at(0, y);
        std::uint8_t* dst_row = canvas.at(x0, y0 + y);
        std::copy(src_row, src_row + static_cast<std::size_t>(content.width) * 3, dst_row);
    }
    return canvas;
}

namespace {

struct Affine {
    // x' = a*x + b*y + c ; y' = d*x + e*y + f
    double a = 1, b = 0, c = 0, d = 0, e = 1, f = 0;

    static Affine identity() { return {}; }

    Affine then(const Affine& next) const {
        Affine out;
        out.a = next.a * a + next.b * d;
        out.b = next.a * b + next.b * e;
        out.c = next.a * c + next.b * f + next.c;
        out.d = next.d * a + next.e * d;
        out.e = next.d * b + next.e * e;
        out.f = next.d * c + next.e * f + next.f;
        return out;
    }

    Affine inverse() const {
        double det = a * e - b * d;
        Affine out;
        out.a = e / det;
        out.b = -b / det;
        out.d = -d / det;
        out.e = a / det;
        out.c = -(out.a * c + out.b * f);
        out.f = -(out.d * c + out.e * f);
        return out;
    }
};

}  // namespace

RoiImage augment(const RoiImage& image, const AugmentParams& params) {
    if (params.rotation_deg < -180 || params.rotation_deg > 180 || params.zoom < 0.8 ||
        params.zoom > 1.2 || params.shear_deg < -10 || params.shear_deg > 10) {
        throw Error(ErrorCode::BadConfig, "augment params out of range");
    }
    const double cx = (image.width - 1) / 2.0;
    const double cy = (image.height - 1) / 2.0;

    Affine map = Affine::identity();
    if (params.flip_h) map = map.then({-1, 0, 2 * cx, 0, 1, 0});
    if (params.flip_v) map = map.then({1, 0, 0, 0, -1, 2 * cy});

    const double theta = params.rotation_deg * std::numbers::pi / 180.0;
    const double ct = std::cos(theta), st = std::sin(theta);
    map = map.then({ct, -st, cx - ct * cx + st * cy, st, ct, cy - st * cx - ct * cy});

    const double shear = std::tan(params.shear_deg * std::numbers::pi / 180.0);
    map = map.then({1, shear, -shear * cy, 0, 1, 0});

    const double z = params.zoom;
    map = map.then({z, 0, cx * (1 - z), 0, z, cy * (1 - z)});

    const Affine inv = map.inverse();
    RoiImage out = RoiImage::filled(image.width, image.height);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            double sx = inv.a * x + inv.b * y + inv.c;
            double sy = inv.d * x + inv.e * y + inv.f;
            // Snap to the lattice so identity-parameter transforms are exact.
            if (std::abs(sx - std::round(sx)) < 1e-9) sx = std::round(sx);
            if (std::abs(sy - std::round(sy)) < 1e-9) sy = std::round(sy);
            bilinear_sample(image, sx, sy, out.at(x, y));
        }
    }
    return out;
}

AugmentParams sample_augment_params(const AugmentRanges& ranges, Rng& rng) {
    AugmentParams params;
    params.rotation_deg = rng.next_in(-ranges.max_rotation_deg, ranges.max_rotation_deg);
    params.flip_h = ranges.allow_flip_h && rng.next_bool();
    params.flip_v = ranges.allow_flip_v && rng.next_bool();
    params.zoom = rng.next_in(ranges.zoom_lo, ranges.zoom_hi);
    params.shear_deg = rng.next_in(-ranges.max_shear_deg, ranges.max_shear_deg);
    return params;
}

}  // namespace plankton
