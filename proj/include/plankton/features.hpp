#pragma once

#include <string>
#include <utility>
#include <vector>

#include "plankton/image.hpp"
#include "plankton/imaging.hpp"

namespace plankton {

using NamedValues = std::vector<std::pair<std::string, double>>;

double named_value(const NamedValues& values, const std::string& name);

// Second-central-moment ellipse of the mask. Axis lengths are full lengths
// (4 * sqrt of the covariance eigenvalues), orientation in (-90, 90] degrees
// measured from +x toward +y.
struct EllipseFit {
    double major_len = 0;
    double minor_len = 0;
    double orientation_deg = 0;
};

EllipseFit fit_ellipse(const ForegroundMask& mask);

// Geometry conventions: the boundary polygon runs through pixel centers, so
// a w x h filled rectangle has contour_area (w-1)*(h-1); bounding-rectangle
// width/height/area count whole pixels. `scale` is mm per pixel; lengths
// scale linearly, areas quadratically, volume cubically. Mask moments stay
// in pixel units.
NamedValues shape_features(const ForegroundMask& mask, const Contour& contour, double scale);
NamedValues extra_shape_features(const ForegroundMask& mask, const Contour& contour, double scale);

// Per channel (grayscale Rec.601, R, G, B), over foreground pixels only:
// mean, quartiles, std, peak-to-centroid displacement (raw, / image
// diagonal, / minor axis), and the 7 Hu invariants of masked intensity.
NamedValues intensity_features(const RoiImage& image, const ForegroundMask& mask, double scale);

const std::vector<std::string>& canonical_feature_names();

struct FeatureExtraction {
    std::vector<double> values;  // canonical order
    bool degenerate = false;     // zero-area contour or zero minor axis
};

FeatureExtraction extract_features(const RoiImage& image, int threshold, double scale);

struct FeatureMatrix {
    std::vector<std::string> ids;
    std::vector<std::string> labels;
    std::vector<std::string> names;
    std::vector<std::vector<double>> rows;

    std::size_t size() const { return ids.size(); }
    int row_of(const std::string& id) const;  // -1 if absent
};

void save_feature_matrix(const FeatureMatrix& matrix, const std::string& path);
FeatureMatrix load_feature_matrix(const std::string& path);

// Fit on the training split only; transform refuses until fitted and records
// which split it was fit on.
class Standardizer {
public:
    void fit(const std::vector<std::vector<double>>& rows, const std::string& split_tag,
             double epsilon = 1e-12);

    std::vector<double> transform_row(const std::vector<double>& row) const;
    std::vector<std::vector<double>> transform(const std::vector<std::vector<double>>& rows) const;

    bool fitted() const { return fitted_; }
    const std::string& fit_split() const { return fit_split_; }
    const std::vector<double>& means() const { return means_; }
    const std::vector<double>& stds() const { return stds_; }
    double epsilon() const { return epsilon_; }
    bool is_constant(std::size_t feature) const { return constant_[feature] != 0; }

    void save(const std::string& path) const;
    static Standardizer load(const std::string& path);

private:
    std::vector<double> means_;
    std::vector<double> stds_;
    std::vector<std::uint8_t> constant_;
    double epsilon_ = 1e-12;
    std::string fit_split_;
    bool fitted_ = false;
};

}  // namespace plankton
