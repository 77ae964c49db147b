#include "plankton/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include <json.hpp>

#include "plankton/csv.hpp"
#include "plankton/error.hpp"

using json = nlohmann::ordered_json;

namespace plankton {

double named_value(const NamedValues& values, const std::string& name) {
    for (const auto& [key, value] : values) {
        if (key == name) return value;
    }
    throw Error(ErrorCode::BadConfig, "no feature named " + name);
}

namespace {

constexpr double kPi = std::numbers::pi;

// Raw and central moments up to order 3 for a weighted pixel set.
struct Moments {
    double m[4][4] = {};   // m[p][q], p exponent of x, q of y
    double mu[4][4] = {};  // central
    double cx = 0, cy = 0;

    double total() const { return m[0][0]; }
};

template <typename WeightFn>
Moments compute_moments(const ForegroundMask& mask, WeightFn weight) {
    Moments mom;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.at(x, y)) continue;
            double w = weight(x, y);
            if (w == 0) continue;
            double xp[4] = {1, static_cast<double>(x), 0, 0};
            xp[2] = xp[1] * xp[1];
            xp[3] = xp[2] * xp[1];
            double yq[4] = {1, static_cast<double>(y), 0, 0};
            yq[2] = yq[1] * yq[1];
            yq[3] = yq[2] * yq[1];
            for (int p = 0; p <= 3; ++p) {
                for (int q = 0; q <= 3 - p; ++q) {
                    mom.m[p][q] += w * xp[p] * yq[q];
                }
            }
        }
    }
    if (mom.m[0][0] > 0) {
        mom.cx = mom.m[1][0] / mom.m[0][0];
        mom.cy = mom.m[0][1] / mom.m[0][0];
        for (int y = 0; y < mask.height; ++y) {
            for (int x = 0; x < mask.width; ++x) {
                if (!mask.at(x, y)) continue;
                double w = weight(x, y);
                if (w == 0) continue;
                double dx = x - mom.cx;
                double dy = y - mom.cy;
                double xp[4] = {1, dx, dx * dx, dx * dx * dx};
                double yq[4] = {1, dy, dy * dy, dy * dy * dy};
                for (int p = 0; p <= 3; ++p) {
                    for (int q = 0; q <= 3 - p; ++q) {
                        mom.mu[p][q] += w * xp[p] * yq[q];
                    }
                }
            }
        }
    }
    return mom;
}

std::array<double, 7> hu_invariants(const Moments& mom) {
    std::array<double, 7> hu{};
    double m00 = mom.mu[0][0];
    if (m00 <= 0) return hu;
    auto eta = [&](int p, int q) {
        return mom.mu[p][q] / std::pow(m00, 1.0 + (p + q) / 2.0);
    };
    double n20 = eta(2, 0), n02 = eta(0, 2), n11 = eta(1, 1);
    double n30 = eta(3, 0), n03 = eta(0, 3), n21 = eta(2, 1), n12 = eta(1, 2);
    double a = n30 + n12, b = n21 + n03;
    hu[0] = n20 + n02;
    hu[1] = (n20 - n02) * (n20 - n02) + 4 * n11 * n11;
    hu[2] = (n30 - 3 * n12) * (n30 - 3 * n12) + (3 * n21 - n03) * (3 * n21 - n03);
    hu[3] = a * a + b * b;
    hu[4] = (n30 - 3 * n12) * a * (a * a - 3 * b * b) + (3 * n21 - n03) * b * (3 * a * a - b * b);
    hu[5] = (n20 - n02) * (a * a - b * b) + 4 * n11 * a * b;
    hu[6] = (3 * n21 - n03) * a * (a * a - 3 * b * b) - (n30 - 3 * n12) * b * (3 * a * a - b * b);
    return hu;
}

struct BoundingBox {
    int min_x = 0, min_y = 0, max_x = -1, max_y = -1;
    int width() const { return max_x - min_x + 1; }
    int height() const { return max_y - min_y + 1; }
};

BoundingBox mask_bbox(const ForegroundMask& mask) {
    BoundingBox box;
    box.min_x = mask.width;
    box.min_y = mask.height;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.at(x, y)) continue;
            box.min_x = std::min(box.min_x, x);
            box.min_y = std::min(box.min_y, y);
            box.max_x = std::max(box.max_x, x);
            box.max_y = std::max(box.max_y, y);
        }
    }
    return box;
}

struct RotatedRect {
    double width = 0;
    double height = 0;
    double angle_deg = 0;
};

// Minimum-area enclosing rectangle of the hull: one side is always flush
// with a hull edge, so scanning edge directions suffices.
RotatedRect min_area_rect(const std::vector<Point>& hull) {
    RotatedRect best;
    if (hull.size() < 2) return best;
    if (hull.size() == 2) {
        double dx = hull[1].x - hull[0].x;
        double dy = hull[1].y - hull[0].y;
        best.width = std::hypot(dx, dy);
        best.height = 0;
        best.angle_deg = std::atan2(dy, dx) * 180.0 / kPi;
        return best;
    }
    double best_area = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const Point& a = hull[i];
        const Point& b = hull[(i + 1) % hull.size()];
        double ux = b.x - a.x, uy = b.y - a.y;
        double len = std::hypot(ux, uy);
        if (len == 0) continue;
        ux /= len;
        uy /= len;
        double lo_u = std::numeric_limits<double>::infinity(), hi_u = -lo_u;
        double lo_v = lo_u, hi_v = -lo_u;
        for (const Point& p : hull) {
            double u = p.x * ux + p.y * uy;
            double v = -p.x * uy + p.y * ux;
            lo_u = std::min(lo_u, u);
            hi_u = std::max(hi_u, u);
            lo_v = std::min(lo_v, v);
            hi_v = std::max(hi_v, v);
        }
        double w = hi_u - lo_u, h = hi_v - lo_v;
        if (w * h < best_area) {
            best_area = w * h;
            best.width = w;
            best.height = h;
            double angle = std::atan2(uy, ux) * 180.0 / kPi;
            if (angle > 90.0) angle -= 180.0;
            if (angle <= -90.0) angle += 180.0;
            best.angle_deg = angle;
        }
    }
    return best;
}

bool contour_degenerate(const Contour& contour) {
    return polygon_area(contour.points) <= 0.0;
}

}  // namespace

EllipseFit fit_ellipse(const ForegroundMask& mask) {
    Moments mom = compute_moments(mask, [](int, int) { return 1.0; });
    EllipseFit fit;
    if (mom.total() <= 0) return fit;
    double u20 = mom.mu[2][0] / mom.total();
    double u02 = mom.mu[0][2] / mom.total();
    double u11 = mom.mu[1][1] / mom.total();
    double common = std::sqrt((u20 - u02) * (u20 - u02) + 4 * u11 * u11);
    double l1 = (u20 + u02 + common) / 2.0;
    double l2 = (u20 + u02 - common) / 2.0;
    fit.major_len = 4.0 * std::sqrt(std::max(0.0, l1));
    fit.minor_len = 4.0 * std::sqrt(std::max(0.0, l2));
    fit.orientation_deg = 0.5 * std::atan2(2 * u11, u20 - u02) * 180.0 / kPi;
    return fit;
}

NamedValues shape_features(const ForegroundMask& mask, const Contour& contour, double scale) {
    NamedValues out;
    const bool degenerate = contour_degenerate(contour);
    EllipseFit fit = degenerate ? EllipseFit{} : fit_ellipse(mask);
    BoundingBox box = mask_bbox(mask);

    double aspect_ratio = 0, eccentricity = 0, solidity = 0, area = 0, volume = 0;
    if (!degenerate) {
        aspect_ratio = static_cast<double>(box.width()) / box.height();
        eccentricity = fit.major_len > 0 ? fit.minor_len / fit.major_len : 0.0;
        double hull_area = polygon_area(contour.hull);
        solidity = hull_area > 0 ? polygon_area(contour.points) / hull_area : 0.0;
        area = static_cast<double>(mask.count()) * scale * scale;
        double a = fit.major_len * scale / 2.0;
        double b = fit.minor_len * scale / 2.0;
        volume = (4.0 / 3.0) * kPi * a * b * b;
    }
    out.emplace_back("aspect_ratio", aspect_ratio);
    out.emplace_back("eccentricity", eccentricity);
    out.emplace_back("major_axis_length", degenerate ? 0.0 : fit.major_len * scale);
    out.emplace_back("minor_axis_length", degenerate ? 0.0 : fit.minor_len * scale);
    out.emplace_back("orientation", degenerate ? 0.0 : fit.orientation_deg);
    out.emplace_back("solidity", solidity);
    out.emplace_back("area", area);
    out.emplace_back("estimated_volume", volume);
    return out;
}

NamedValues extra_shape_features(const ForegroundMask& mask, const Contour& contour, double scale) {
    NamedValues out;
    const bool degenerate = contour_degenerate(contour);
    BoundingBox box = mask_bbox(mask);
    Moments mom = compute_moments(mask, [](int, int) { return 1.0; });

    double contour_area = polygon_area(contour.points) * scale * scale;
    double contour_perimeter = polygon_perimeter(contour.points) * scale;
    double hull_area = polygon_area(contour.hull) * scale * scale;
    double hull_perimeter = polygon_perimeter(contour.hull) * scale;
    double rect_width = box.width() * scale;
    double rect_height = box.height() * scale;
    double rect_area = rect_width * rect_height;

    double extent = 0, equivalent_diameter = 0, compactness = 0, roundness = 0, convexity = 0;
    if (!degenerate && contour_area > 0) {
        extent = contour_area / rect_area;
        equivalent_diameter = std::sqrt(4.0 * contour_area / kPi);
        compactness = contour_perimeter * contour_perimeter / (4.0 * kPi * contour_area);
        if (hull_perimeter > 0) {
            roundness = 4.0 * kPi * contour_area / (hull_perimeter * hull_perimeter);
            convexity = hull_perimeter / contour_perimeter;
        }
    }
    RotatedRect rot = degenerate ? RotatedRect{} : min_area_rect(contour.hull);

    out.emplace_back("extent", extent);
    out.emplace_back("equivalent_diameter", equivalent_diameter);
    out.emplace_back("contour_area", degenerate ? 0.0 : contour_area);
    out.emplace_back("contour_perimeter", degenerate ? 0.0 : contour_perimeter);
    out.emplace_back("hull_area", degenerate ? 0.0 : hull_area);
    out.emplace_back("hull_perimeter", degenerate ? 0.0 : hull_perimeter);
    out.emplace_back("compactness", compactness);
    out.emplace_back("roundness", roundness);
    out.emplace_back("convexity", convexity);
    out.emplace_back("w_rot", rot.width * scale);
    out.emplace_back("h_rot", rot.height * scale);
    out.emplace_back("angle_rot", rot.angle_deg);
    out.emplace_back("rect_width", rect_width);
    out.emplace_back("rect_height", rect_height);
    out.emplace_back("rect_area", rect_area);

    static const char* kRawNames[10] = {"m00", "m10", "m01", "m20", "m11",
                                        "m02", "m30", "m21", "m12", "m03"};
    static const int kRawPq[10][2] = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1},
                                      {0, 2}, {3, 0}, {2, 1}, {1, 2}, {0, 3}};
    for (int i = 0; i < 10; ++i) {
        out.emplace_back(std::string("moment_") + kRawNames[i], mom.m[kRawPq[i][0]][kRawPq[i][1]]);
    }
    static const char* kCentralNames[7] = {"mu20", "mu11", "mu02", "mu30", "mu21", "mu12", "mu03"};
    static const int kCentralPq[7][2] = {{2, 0}, {1, 1}, {0, 2}, {3, 0}, {2, 1}, {1, 2}, {0, 3}};
    for (int i = 0; i < 7; ++i) {
        out.emplace_back(std::string("moment_") + kCentralNames[i],
                         mom.mu[kCentralPq[i][0]][kCentralPq[i][1]]);
    }
    return out;
}

namespace {

struct ChannelStats {
    double mean = 0, p25 = 0, p50 = 0, p75 = 0, stddev = 0;
    double mass_displace = 0;
    std::array<double, 7> hu{};
};

double percentile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) return 0.0;
    double rank = p / 100.0 * static_cast<double>(sorted.size() - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(rank));
    std::size_t hi = static_cast<std::size_t>(std::ceil(rank));
    if (lo == hi) return sorted[lo];
    double frac = rank - static_cast<double>(lo);
    return sorted[lo] * (1 - frac) + sorted[hi] * frac;
}

template <typename IntensityFn>
ChannelStats channel_stats(const ForegroundMask& mask, IntensityFn intensity) {
    ChannelStats stats;
    std::vector<double> values;
    values.reserve(mask.count());
    double best = -1;
    int best_x = 0, best_y = 0;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.at(x, y)) continue;
            double v = intensity(x, y);
            values.push_back(v);
            if (v > best) {  // ties keep the smallest row-major index
                best = v;
                best_x = x;
                best_y = y;
            }
        }
    }
    if (values.empty()) return stats;

    double sum = 0;
    for (double v : values) sum += v;
    stats.mean = sum / static_cast<double>(values.size());
    double var = 0;
    for (double v : values) var += (v - stats.mean) * (v - stats.mean);
    stats.stddev = std::sqrt(var / static_cast<double>(values.size()));

    std::sort(values.begin(), values.end());
    stats.p25 = percentile_sorted(values, 25);
    stats.p50 = percentile_sorted(values, 50);
    stats.p75 = percentile_sorted(values, 75);

    Moments mom = compute_moments(mask, intensity);
    if (mom.total() > 0) {
        stats.mass_displace = std::hypot(best_x - mom.cx, best_y - mom.cy);
    }
    stats.hu = hu_invariants(mom);
    return stats;
}

}  // namespace

NamedValues intensity_features(const RoiImage& image, const ForegroundMask& mask, double scale) {
    if (image.width != mask.width || image.height != mask.height) {
        throw Error(ErrorCode::ShapeMismatch, "image and mask dimensions differ");
    }
    if (mask.count() == 0) throw Error(ErrorCode::NoForeground, "empty mask");

    EllipseFit fit = fit_ellipse(mask);
    const double diagonal = std::hypot(image.width, image.height);

    static const char* kChannels[4] = {"gray", "red", "green", "blue"};
    NamedValues out;
    for (int channel = 0; channel < 4; ++channel) {
        auto intensity = [&image, channel](int x, int y) -> double {
            const std::uint8_t* px = image.at(x, y);
            if (channel == 0) return 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
            return px[channel - 1];
        };
        ChannelStats stats = channel_stats(mask, intensity);
        const std::string tag = kChannels[channel];
        out.emplace_back("intensity_mean_" + tag, stats.mean);
        out.emplace_back("intensity_25_percentile_" + tag, stats.p25);
        out.emplace_back("intensity_50_percentile_" + tag, stats.p50);
        out.emplace_back("intensity_75_percentile_" + tag, stats.p75);
        out.emplace_back("intensity_std_" + tag, stats.stddev);
        out.emplace_back("intensity_mass_displace_" + tag, stats.mass_displace * scale);
        out.emplace_back("intensity_mass_displace_in_images_" + tag,
                         diagonal > 0 ? stats.mass_displace / diagonal : 0.0);
        out.emplace_back("intensity_mass_displace_in_minors_" + tag,
                         fit.minor_len > 0 ? stats.mass_displace / fit.minor_len : 0.0);
        for (int i = 0; i < 7; ++i) {
            out.emplace_back("intensity_hu" + std::to_string(i + 1) + "_" + tag, stats.hu[i]);
        }
    }
    return out;
}

const std::vector<std::string>& canonical_feature_names() {
    static const std::vector<std::string> names = [] {
        // Derive the list from the ops themselves on a tiny non-degenerate
        // sample so order can never drift from the implementation.
        RoiImage probe = RoiImage::filled(4, 4, 0);
        for (int y = 1; y <= 2; ++y) {
            for (int x = 1; x <= 2; ++x) {
                probe.at(x, y)[0] = probe.at(x, y)[1] = probe.at(x, y)[2] = 200;
            }
        }
        ForegroundMask mask = extract_mask(probe, 10);
        Contour contour = trace_contour(mask);
        std::vector<std::string> list;
        for (const auto& [name, value] : shape_features(mask, contour, 1.0)) list.push_back(name);
        for (const auto& [name, value] : extra_shape_features(mask, contour, 1.0))
            list.push_back(name);
        for (const auto& [name, value] : intensity_features(probe, mask, 1.0))
            list.push_back(name);
        return list;
    }();
    return names;
}

FeatureExtraction extract_features(const RoiImage& image, int threshold, double scale) {
    ForegroundMask mask = extract_mask(image, threshold);
    Contour contour = trace_contour(mask);

    FeatureExtraction result;
    NamedValues shape = shape_features(mask, contour, scale);
    NamedValues extra = extra_shape_features(mask, contour, scale);
    NamedValues intensity = intensity_features(image, mask, scale);
    result.values.reserve(shape.size() + extra.size() + intensity.size());
    for (const auto& [name, value] : shape) result.values.push_back(value);
    for (const auto& [name, value] : extra) result.values.push_back(value);
    for (const auto& [name, value] : intensity) result.values.push_back(value);
    result.degenerate =
        contour_degenerate(contour) || named_value(shape, "minor_axis_length") <= 0.0;

    for (double v : result.values) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::ShapeMismatch, "non-finite feature value");
        }
    }
    return result;
}

int FeatureMatrix::row_of(const std::string& id) const {
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] == id) return static_cast<int>(i);
    }
    return -1;
}

void save_feature_matrix(const FeatureMatrix& matrix, const std::string& path) {
    csv::Table table;
    table.header.push_back("id");
    table.header.push_back("label");
    table.header.insert(table.header.end(), matrix.names.begin(), matrix.names.end());
    table.rows.reserve(matrix.size());
    for (std::size_t i = 0; i < matrix.size(); ++i) {
        std::vector<std::string> row;
        row.reserve(matrix.names.size() + 2);
        row.push_back(matrix.ids[i]);
        row.push_back(matrix.labels[i]);
        for (double v : matrix.rows[i]) row.push_back(csv::format_value(v));
        table.rows.push_back(std::move(row));
    }
    csv::write_file(path, table);
}

FeatureMatrix load_feature_matrix(const std::string& path) {
    csv::Table table = csv::read_file(path);
    if (table.header.size() < 3 || table.header[0] != "id" || table.header[1] != "label") {
        throw Error(ErrorCode::IoFailure, path + ": expected header id,label,<features>");
    }
    FeatureMatrix matrix;
    matrix.names.assign(table.header.begin() + 2, table.header.end());
    for (const auto& row : table.rows) {
        matrix.ids.push_back(row[0]);
        matrix.labels.push_back(row[1]);
        std::vector<double> values;
        values.reserve(matrix.names.size());
        for (std::size_t i = 2; i < row.size(); ++i) values.push_back(std::stod(row[i]));
        matrix.rows.push_back(std::move(values));
    }
    return matrix;
}

void Standardizer::fit(const std::vector<std::vector<double>>& rows, const std::string& split_tag,
                       double epsilon) {
    if (rows.size() < 2) {
        throw Error(ErrorCode::TooFewSamples, "standardizer needs at least 2 samples");
    }
    const std::size_t n_features = rows.front().size();
    for (const auto& row : rows) {
        if (row.size() != n_features) {
            throw Error(ErrorCode::ShapeMismatch, "ragged feature matrix");
        }
    }
    means_.assign(n_features, 0.0);
    stds_.assign(n_features, 0.0);
    constant_.assign(n_features, 0);
    epsilon_ = epsilon;
    const double n = static_cast<double>(rows.size());
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < n_features; ++j) means_[j] += row[j];
    }
    for (std::size_t j = 0; j < n_features; ++j) means_[j] /= n;
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < n_features; ++j) {
            double d = row[j] - means_[j];
            stds_[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < n_features; ++j) {
        stds_[j] = std::sqrt(stds_[j] / n);  // population std
        if (stds_[j] < epsilon_) constant_[j] = 1;
    }
    fit_split_ = split_tag;
    fitted_ = true;
}

std::vector<double> Standardizer::transform_row(const std::vector<double>& row) const {
    if (!fitted_) throw Error(ErrorCode::NotFitted, "standardizer not fitted");
    if (row.size() != means_.size()) {
        throw Error(ErrorCode::ShapeMismatch, "feature width differs from fit");
    }
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) {
        out[j] = constant_[j] ? 0.0 : (row[j] - means_[j]) / stds_[j];
    }
    return out;
}

std::vector<std::vector<double>> Standardizer::transform(
    const std::vector<std::vector<double>>& rows) const {
    std::vector<std::vector<double>> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(transform_row(row));
    return out;
}

void Standardizer::save(const std::string& path) const {
    if (!fitted_) throw Error(ErrorCode::NotFitted, "standardizer not fitted");
    json doc;
    doc["means"] = means_;
    doc["stds"] = stds_;
    doc["epsilon"] = epsilon_;
    doc["fit_split"] = fit_split_;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);
    out << doc.dump(2) << '\n';
}

Standardizer Standardizer::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
    json doc = json::parse(in);
    Standardizer s;
    s.means_ = doc.at("means").get<std::vector<double>>();
    s.stds_ = doc.at("stds").get<std::vector<double>>();
    s.epsilon_ = doc.at("epsilon").get<double>();
    s.fit_split_ = doc.at("fit_split").get<std::string>();
    s.constant_.assign(s.means_.size(), 0);
    for (std::size_t j = 0; j < s.stds_.size(); ++j) {
        if (s.stds_[j] < s.epsilon_) s.constant_[j] = 1;
    }
    s.fitted_ = true;
    return s;
}

}  // namespace plankton
