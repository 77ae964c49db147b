#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace plankton {

// Per-sample class probability distributions from any model, internal or
// imported. Column order is the lexicographic class catalog. `labels` may be
// empty when truth is unknown.
struct ConfidenceMatrix {
    std::vector<std::string> ids;
    std::vector<std::string> class_names;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> labels;

    std::size_t size() const { return ids.size(); }
    bool has_labels() const { return !labels.empty(); }

    // Row-sum and range check; throws when a row strays beyond `tolerance`.
    void validate(double tolerance = 1e-6) const;

    // Sort samples by id, keeping rows and labels aligned.
    void sort_by_id();
};

// Argmax with ties broken by the lowest class index.
std::size_t argmax_index(const std::vector<double>& row);

// Class indices of the k largest confidences; ties at the boundary go to the
// lowest class index.
std::vector<std::size_t> top_k_indices(const std::vector<double>& row, std::size_t k);

// CSV wire format: header `id,true_label,<class names>`, one probability row
// per sample. This is the interoperability point for imported confidences.
void save_confidences(const ConfidenceMatrix& matrix, const std::string& path);
ConfidenceMatrix load_confidences(const std::string& path);

}  // namespace plankton
