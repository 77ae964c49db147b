#pragma once

#include <map>
#include <string>
#include <vector>

#include "plankton/confidence.hpp"

namespace plankton::metrics {

struct PerClass {
    std::string name;
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    std::size_t support = 0;
};

struct TopK {
    std::size_t k = 1;
    double accuracy = 0;
    double macro_recall = 0;
};

struct MetricsReport {
    double accuracy = 0;
    double macro_f1 = 0;     // mean over classes with support > 0
    double macro_recall = 0;
    std::vector<PerClass> per_class;             // one entry per catalog class
    std::vector<TopK> top_k;
    std::vector<std::vector<std::size_t>> confusion;  // rows truth, cols prediction
    std::vector<std::string> class_names;
    std::vector<std::string> exclusions;
    std::size_t n_samples = 0;
};

// Prediction is the argmax (ties to the lowest class index). `exclude` drops
// samples whose true label falls in the excluded set before anything is
// counted. Labels come embedded in the confidence matrix.
MetricsReport evaluate(const ConfidenceMatrix& confidences, const std::vector<std::size_t>& k_list,
                       const std::vector<std::string>& exclude);

// Same, with truth supplied separately and aligned by sample id.
MetricsReport evaluate(const ConfidenceMatrix& confidences,
                       const std::map<std::string, std::string>& labels_by_id,
                       const std::vector<std::size_t>& k_list,
                       const std::vector<std::string>& exclude);

std::vector<std::vector<std::size_t>> confusion_matrix(
    const std::vector<std::string>& predictions, const std::vector<std::string>& labels,
    const std::vector<std::string>& catalog);

void save_report_json(const MetricsReport& report, const std::string& path);
void save_report_csv(const MetricsReport& report, const std::string& path);
MetricsReport load_report_json(const std::string& path);

// Static per-class F1 bar chart.
void write_f1_chart_svg(const MetricsReport& report, const std::string& path);

}  // namespace plankton::metrics
