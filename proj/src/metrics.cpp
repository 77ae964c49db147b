#include "plankton/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "plankton/csv.hpp"
#include "plankton/error.hpp"

using json = nlohmann::ordered_json;

namespace plankton::metrics {

namespace {

MetricsReport evaluate_rows(const std::vector<std::vector<double>>& rows,
                            const std::vector<std::size_t>& truth,
                            const std::vector<std::string>& class_names,
                            const std::vector<std::size_t>& k_list,
                            const std::vector<std::string>& exclusions) {
    const std::size_t n_classes = class_names.size();
    if (rows.empty()) {
        throw Error(ErrorCode::EmptyEvaluation, "no samples left to evaluate");
    }
    for (std::size_t k : k_list) {
        if (k < 1 || k > n_classes) {
            throw Error(ErrorCode::BadConfig, "top-k value outside [1, n_classes]");
        }
    }

    MetricsReport report;
    report.class_names = class_names;
    report.exclusions = exclusions;
    report.n_samples = rows.size();
    report.confusion.assign(n_classes, std::vector<std::size_t>(n_classes, 0));

    for (std::size_t i = 0; i < rows.size(); ++i) {
        report.confusion[truth[i]][argmax_index(rows[i])] += 1;
    }

    std::size_t trace = 0;
    double f1_sum = 0, recall_sum = 0;
    std::size_t supported_classes = 0;
    for (std::size_t c = 0; c < n_classes; ++c) {
        PerClass entry;
        entry.name = class_names[c];
        std::size_t tp = report.confusion[c][c];
        std::size_t fn = 0, fp = 0;
        for (std::size_t j = 0; j < n_classes; ++j) {
            if (j != c) {
                fn += report.confusion[c][j];
                fp += report.confusion[j][c];
            }
        }
        entry.support = tp + fn;
        entry.recall = entry.support > 0 ? static_cast<double>(tp) / entry.support : 0.0;
        entry.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
        entry.f1 = (entry.precision + entry.recall) > 0
                       ? 2 * entry.recall * entry.precision / (entry.recall + entry.precision)
                       : 0.0;
        trace += tp;
        if (entry.support > 0) {
            f1_sum += entry.f1;
            recall_sum += entry.recall;
            ++supported_classes;
        }
        report.per_class.push_back(std::move(entry));
    }
    report.accuracy = static_cast<double>(trace) / static_cast<double>(rows.size());
    report.macro_f1 = supported_classes ? f1_sum / supported_classes : 0.0;
    report.macro_recall = supported_classes ? recall_sum / supported_classes : 0.0;

    for (std::size_t k : k_list) {
        TopK top;
        top.k = k;
        std::size_t hits = 0;
        std::vector<std::size_t> class_hits(n_classes, 0);
        std::vector<std::size_t> class_support(n_classes, 0);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            class_support[truth[i]] += 1;
            auto ranked = top_k_indices(rows[i], k);
            if (std::find(ranked.begin(), ranked.end(), truth[i]) != ranked.end()) {
                ++hits;
                class_hits[truth[i]] += 1;
            }
        }
        top.accuracy = static_cast<double>(hits) / static_cast<double>(rows.size());
        double recall_total = 0;
        std::size_t supported = 0;
        for (std::size_t c = 0; c < n_classes; ++c) {
            if (class_support[c] == 0) continue;
            recall_total += static_cast<double>(class_hits[c]) / class_support[c];
            ++supported;
        }
        top.macro_recall = supported ? recall_total / supported : 0.0;
        report.top_k.push_back(top);
    }
    return report;
}

}  // namespace

MetricsReport evaluate(const ConfidenceMatrix& confidences, const std::vector<std::size_t>& k_list,
                       const std::vector<std::string>& exclude) {
    if (!confidences.has_labels()) {
        throw Error(ErrorCode::MisalignedIds, "confidence matrix carries no true labels");
    }
    const std::set<std::string> excluded(exclude.begin(), exclude.end());

    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> truth;
    for (std::size_t i = 0; i < confidences.size(); ++i) {
        const std::string& label = confidences.labels[i];
        if (label.empty()) {
            throw Error(ErrorCode::MisalignedIds, "sample without label: " + confidences.ids[i]);
        }
        if (excluded.count(label)) continue;
        auto it = std::find(confidences.class_names.begin(), confidences.class_names.end(), label);
        if (it == confidences.class_names.end()) {
            throw Error(ErrorCode::UnknownLabel, "label not in catalog: " + label);
        }
        truth.push_back(static_cast<std::size_t>(it - confidences.class_names.begin()));
        rows.push_back(confidences.rows[i]);
    }
    return evaluate_rows(rows, truth, confidences.class_names, k_list, exclude);
}

MetricsReport evaluate(const ConfidenceMatrix& confidences,
                       const std::map<std::string, std::string>& labels_by_id,
                       const std::vector<std::size_t>& k_list,
                       const std::vector<std::string>& exclude) {
    ConfidenceMatrix labeled = confidences;
    labeled.labels.clear();
    for (const auto& id : labeled.ids) {
        auto it = labels_by_id.find(id);
        if (it == labels_by_id.end()) {
            throw Error(ErrorCode::MisalignedIds, "no label for sample " + id);
        }
        labeled.labels.push_back(it->second);
    }
    return evaluate(labeled, k_list, exclude);
}

std::vector<std::vector<std::size_t>> confusion_matrix(
    const std::vector<std::string>& predictions, const std::vector<std::string>& labels,
    const std::vector<std::string>& catalog) {
    if (predictions.size() != labels.size()) {
        throw Error(ErrorCode::MisalignedIds, "prediction and label counts differ");
    }
    auto index_of = [&catalog](const std::string& name) {
        auto it = std::find(catalog.begin(), catalog.end(), name);
        if (it == catalog.end()) {
            throw Error(ErrorCode::UnknownLabel, "label not in catalog: " + name);
        }
        return static_cast<std::size_t>(it - catalog.begin());
    };
    std::vector<std::vector<std::size_t>> counts(catalog.size(),
                                                 std::vector<std::size_t>(catalog.size(), 0));
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        counts[index_of(labels[i])][index_of(predictions[i])] += 1;
    }
    return counts;
}

namespace {

json report_to_json(const MetricsReport& report) {
    json doc;
    doc["n_samples"] = report.n_samples;
    doc["accuracy"] = report.accuracy;
    doc["macro_f1"] = report.macro_f1;
    doc["macro_recall"] = report.macro_recall;
    doc["exclusions"] = report.exclusions;
    json per_class = json::array();
    for (const auto& entry : report.per_class) {
        per_class.push_back({{"class", entry.name},
                             {"precision", entry.precision},
                             {"recall", entry.recall},
                             {"f1", entry.f1},
                             {"support", entry.support}});
    }
    doc["per_class"] = std::move(per_class);
    json top_k = json::array();
    for (const auto& entry : report.top_k) {
        top_k.push_back(
            {{"k", entry.k}, {"accuracy", entry.accuracy}, {"macro_recall", entry.macro_recall}});
    }
    doc["top_k"] = std::move(top_k);
    doc["class_names"] = report.class_names;
    doc["confusion"] = report.confusion;
    return doc;
}

}  // namespace

void save_report_json(const MetricsReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);
    out << report_to_json(report).dump(2) << '\n';
}

MetricsReport load_report_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
    json doc = json::parse(in);
    MetricsReport report;
    report.n_samples = doc.at("n_samples").get<std::size_t>();
    report.accuracy = doc.at("accuracy").get<double>();
    report.macro_f1 = doc.at("macro_f1").get<double>();
    report.macro_recall = doc.at("macro_recall").get<double>();
    report.exclusions = doc.at("exclusions").get<std::vector<std::string>>();
    for (const auto& entry : doc.at("per_class")) {
        PerClass pc;
        pc.name = entry.at("class").get<std::string>();
        pc.precision = entry.at("precision").get<double>();
        pc.recall = entry.at("recall").get<double>();
        pc.f1 = entry.at("f1").get<double>();
        pc.support = entry.at("support").get<std::size_t>();
        report.per_class.push_back(std::move(pc));
    }
    for (const auto& entry : doc.at("top_k")) {
        TopK tk;
        tk.k = entry.at("k").get<std::size_t>();
        tk.accuracy = entry.at("accuracy").get<double>();
        tk.macro_recall = entry.at("macro_recall").get<double>();
        report.top_k.push_back(tk);
    }
    report.class_names = doc.at("class_names").get<std::vector<std::string>>();
    report.confusion = doc.at("confusion").get<std::vector<std::vector<std::size_t>>>();
    return report;
}

void save_report_csv(const MetricsReport& report, const std::string& path) {
    csv::Table table;
    table.header = {"class", "precision", "recall", "f1", "support"};
    for (const auto& entry : report.per_class) {
        table.rows.push_back({entry.name, csv::format_value(entry.precision),
                              csv::format_value(entry.recall), csv::format_value(entry.f1),
                              std::to_string(entry.support)});
    }
    csv::write_file(path, table);
}

void write_f1_chart_svg(const MetricsReport& report, const std::string& path) {
    const int bar_height = 14;
    const int gap = 4;
    const int label_width = 220;
    const int plot_width = 420;
    const int top = 32;
    const int height = top + static_cast<int>(report.per_class.size()) * (bar_height + gap) + 16;
    const int width = label_width + plot_width + 80;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "  <text x=\"" << label_width << "\" y=\"18\" font-size=\"13\">Per-class F1"
        << (report.exclusions.empty() ? "" : " (with exclusions)") << "</text>\n";
    int y = top;
    for (const auto& entry : report.per_class) {
        const int bar = static_cast<int>(std::lround(entry.f1 * plot_width));
        out << "  <text x=\"" << (label_width - 6) << "\" y=\"" << (y + bar_height - 3)
            << "\" text-anchor=\"end\">" << entry.name << "</text>\n";
        out << "  <rect x=\"" << label_width << "\" y=\"" << y << "\" width=\"" << bar
            << "\" height=\"" << bar_height << "\" fill=\"#4878a8\"/>\n";
        out << "  <text x=\"" << (label_width + bar + 4) << "\" y=\"" << (y + bar_height - 3)
            << "\">" << csv::format_value(entry.f1) << "</text>\n";
        y += bar_height + gap;
    }
    out << "</svg>\n";
}

}  // namespace plankton::metrics
