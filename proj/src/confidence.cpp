#include "plankton/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "plankton/csv.hpp"
#include "plankton/error.hpp"

namespace plankton {

void ConfidenceMatrix::validate(double tolerance) const {
    if (ids.size() != rows.size()) {
        throw Error(ErrorCode::ShapeMismatch, "id and row counts differ");
    }
    if (!labels.empty() && labels.size() != ids.size()) {
        throw Error(ErrorCode::ShapeMismatch, "label and row counts differ");
    }
    for (const auto& row : rows) {
        if (row.size() != class_names.size()) {
            throw Error(ErrorCode::ShapeMismatch, "row width differs from class count");
        }
        double sum = 0;
        for (double p : row) {
            if (p < -tolerance || p > 1 + tolerance || !std::isfinite(p)) {
                throw Error(ErrorCode::ShapeMismatch, "confidence outside [0, 1]");
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > tolerance) {
            throw Error(ErrorCode::ShapeMismatch, "confidence row does not sum to 1");
        }
    }
}

void ConfidenceMatrix::sort_by_id() {
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [this](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
    ConfidenceMatrix sorted;
    sorted.class_names = class_names;
    sorted.ids.reserve(ids.size());
    sorted.rows.reserve(rows.size());
    for (std::size_t i : order) {
        sorted.ids.push_back(std::move(ids[i]));
        sorted.rows.push_back(std::move(rows[i]));
        if (!labels.empty()) sorted.labels.push_back(std::move(labels[i]));
    }
    *this = std::move(sorted);
}

std::size_t argmax_index(const std::vector<double>& row) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < row.size(); ++i) {
        if (row[i] > row[best]) best = i;
    }
    return best;
}

std::vector<std::size_t> top_k_indices(const std::vector<double>& row, std::size_t k) {
    std::vector<std::size_t> order(row.size());
    std::iota(order.begin(), order.end(), 0);
    // Stable under ties: higher confidence first, lower index wins ties.
    std::sort(order.begin(), order.end(), [&row](std::size_t a, std::size_t b) {
        if (row[a] != row[b]) return row[a] > row[b];
        return a < b;
    });
    order.resize(std::min(k, order.size()));
    return order;
}

void save_confidences(const ConfidenceMatrix& matrix, const std::string& path) {
    csv::Table table;
    table.header.push_back("id");
    table.header.push_back("true_label");
    table.header.insert(table.header.end(), matrix.class_names.begin(), matrix.class_names.end());
    for (std::size_t i = 0; i < matrix.size(); ++i) {
        std::vector<std::string> row;
        row.reserve(matrix.class_names.size() + 2);
        row.push_back(matrix.ids[i]);
        row.push_back(matrix.has_labels() ? matrix.labels[i] : "");
        for (double p : matrix.rows[i]) row.push_back(csv::format_value(p));
        table.rows.push_back(std::move(row));
    }
    csv::write_file(path, table);
}

ConfidenceMatrix load_confidences(const std::string& path) {
    csv::Table table = csv::read_file(path);
    if (table.header.size() < 3 || table.header[0] != "id" || table.header[1] != "true_label") {
        throw Error(ErrorCode::IoFailure, path + ": expected header id,true_label,<classes>");
    }
    ConfidenceMatrix matrix;
    matrix.class_names.assign(table.header.begin() + 2, table.header.end());
    bool any_label = false;
    for (const auto& row : table.rows) {
        matrix.ids.push_back(row[0]);
        matrix.labels.push_back(row[1]);
        if (!row[1].empty()) any_label = true;
        std::vector<double> probs;
        probs.reserve(matrix.class_names.size());
        for (std::size_t i = 2; i < row.size(); ++i) probs.push_back(std::stod(row[i]));
        matrix.rows.push_back(std::move(probs));
    }
    if (!any_label) matrix.labels.clear();
    return matrix;
}

}  // namespace plankton
