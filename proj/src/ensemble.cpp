#include "plankton/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "plankton/error.hpp"
#include "plankton/metrics.hpp"

using json = nlohmann::ordered_json;

namespace plankton::ensemble {

std::uint64_t hash_ids(const std::vector<std::string>& sorted_ids) {
    std::uint64_t hash = 1469598103934665603ull;  // FNV-1a
    auto mix = [&hash](unsigned char byte) {
        hash ^= byte;
        hash *= 1099511628211ull;
    };
    for (const auto& id : sorted_ids) {
        for (unsigned char c : id) mix(c);
        mix('\n');
    }
    return hash;
}

AlignedMembers align_members(const std::vector<ConfidenceMatrix>& members) {
    if (members.empty()) {
        throw Error(ErrorCode::MisalignedMembers, "ensemble needs at least one member");
    }
    const auto& class_names = members.front().class_names;
    const std::size_t n_classes = class_names.size();

    std::vector<std::string> ids = members.front().ids;
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
        throw Error(ErrorCode::MisalignedMembers, "duplicate sample ids in member");
    }

    AlignedMembers aligned;
    aligned.ids = ids;
    aligned.class_names = class_names;
    aligned.labels.assign(ids.size(), "");
    bool labels_seen = false;

    for (std::size_t m = 0; m < members.size(); ++m) {
        const ConfidenceMatrix& member = members[m];
        if (member.class_names != class_names) {
            throw Error(ErrorCode::MisalignedMembers,
                        "member " + std::to_string(m) + " has a different class order");
        }
        if (member.ids.size() != ids.size()) {
            throw Error(ErrorCode::MisalignedMembers,
                        "member " + std::to_string(m) + " has a different sample count");
        }
        std::map<std::string, std::size_t> row_of;
        for (std::size_t i = 0; i < member.ids.size(); ++i) row_of[member.ids[i]] = i;

        nn::Matrix block(ids.size(), n_classes);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            auto it = row_of.find(ids[i]);
            if (it == row_of.end()) {
                throw Error(ErrorCode::MisalignedMembers,
                            "member " + std::to_string(m) + " lacks sample " + ids[i]);
            }
            const auto& row = member.rows[it->second];
            if (row.size() != n_classes) {
                throw Error(ErrorCode::MisalignedMembers, "row width mismatch");
            }
            std::copy(row.begin(), row.end(), block.row(i));
            if (member.has_labels()) {
                const std::string& label = member.labels[it->second];
                if (!label.empty()) {
                    if (aligned.labels[i].empty()) {
                        aligned.labels[i] = label;
                        labels_seen = true;
                    } else if (aligned.labels[i] != label) {
                        throw Error(ErrorCode::MisalignedMembers,
                                    "members disagree on the label of " + ids[i]);
                    }
                }
            }
        }
        aligned.member_rows.push_back(std::move(block));
    }
    if (!labels_seen) aligned.labels.clear();
    return aligned;
}

ConfidenceMatrix average(const std::vector<ConfidenceMatrix>& members) {
    AlignedMembers aligned = align_members(members);
    const std::size_t n = aligned.ids.size();
    const std::size_t n_classes = aligned.class_names.size();
    const double k = static_cast<double>(aligned.member_rows.size());

    ConfidenceMatrix out;
    out.ids = aligned.ids;
    out.class_names = aligned.class_names;
    out.labels = aligned.labels;
    out.rows.assign(n, std::vector<double>(n_classes, 0.0));
    for (const nn::Matrix& block : aligned.member_rows) {
        for (std::size_t i = 0; i < n; ++i) {
            const double* src = block.row(i);
            auto& dst = out.rows[i];
            for (std::size_t c = 0; c < n_classes; ++c) dst[c] += src[c];
        }
    }
    for (auto& row : out.rows) {
        for (double& p : row) p /= k;
    }
    return out;
}

namespace {

// Meta-feature design matrix: concatenated member confidences plus a
// trailing constant-1 bias column.
nn::Matrix build_meta_features(const AlignedMembers& aligned) {
    const std::size_t n = aligned.ids.size();
    const std::size_t n_classes = aligned.class_names.size();
    const std::size_t width = aligned.member_rows.size() * n_classes + 1;
    nn::Matrix x(n, width);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = x.row(i);
        std::size_t offset = 0;
        for (const nn::Matrix& block : aligned.member_rows) {
            const double* src = block.row(i);
            std::copy(src, src + n_classes, row + offset);
            offset += n_classes;
        }
        row[width - 1] = 1.0;
    }
    return x;
}

void softmax_in_place(std::vector<double>& row) {
    double peak = row[0];
    for (double v : row) peak = std::max(peak, v);
    double sum = 0;
    for (double& v : row) {
        v = std::exp(v - peak);
        sum += v;
    }
    for (double& v : row) v /= sum;
}

}  // namespace

StackModel fit_stack(const std::vector<ConfidenceMatrix>& members, double lambda, int iterations,
                     std::uint64_t seed, const std::string& fit_split) {
    (void)seed;  // zero-initialized weights make the fit seed-independent
    AlignedMembers aligned = align_members(members);
    if (aligned.labels.empty()) {
        throw Error(ErrorCode::DegenerateLabels, "stacking needs true labels on the fit split");
    }
    std::set<std::string> distinct(aligned.labels.begin(), aligned.labels.end());
    if (distinct.size() < 2) {
        throw Error(ErrorCode::DegenerateLabels, "fit split carries a single class");
    }

    const std::size_t n_classes = aligned.class_names.size();
    std::vector<std::size_t> y(aligned.ids.size());
    for (std::size_t i = 0; i < aligned.labels.size(); ++i) {
        auto it = std::find(aligned.class_names.begin(), aligned.class_names.end(),
                            aligned.labels[i]);
        if (it == aligned.class_names.end()) {
            throw Error(ErrorCode::UnknownLabel, "label not in catalog: " + aligned.labels[i]);
        }
        y[i] = static_cast<std::size_t>(it - aligned.class_names.begin());
    }

    nn::Matrix x = build_meta_features(aligned);
    const std::size_t n = x.rows;
    const std::size_t d = x.cols;

    StackModel model;
    model.n_members = aligned.member_rows.size();
    model.n_classes = n_classes;
    model.class_names = aligned.class_names;
    model.lambda = lambda;
    model.iterations = iterations;
    model.fit_split = fit_split;
    model.fit_ids_hash = hash_ids(aligned.ids);
    model.weights = nn::Matrix(d, n_classes);

    // Fixed step from a smoothness bound of the penalized objective.
    double max_row_sq = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = x.row(i);
        double sq = 0;
        for (std::size_t j = 0; j < d; ++j) sq += row[j] * row[j];
        max_row_sq = std::max(max_row_sq, sq);
    }
    const double step = 1.0 / (0.5 * max_row_sq + lambda);

    nn::Matrix grad(d, n_classes);
    std::vector<double> logits(n_classes);
    for (int iter = 0; iter < iterations; ++iter) {
        std::fill(grad.data.begin(), grad.data.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = x.row(i);
            for (std::size_t c = 0; c < n_classes; ++c) {
                double acc = 0;
                for (std::size_t j = 0; j < d; ++j) acc += row[j] * model.weights.at(j, c);
                logits[c] = acc;
            }
            softmax_in_place(logits);
            logits[y[i]] -= 1.0;
            for (std::size_t j = 0; j < d; ++j) {
                if (row[j] == 0) continue;
                double* grow = grad.row(j);
                for (std::size_t c = 0; c < n_classes; ++c) grow[c] += row[j] * logits[c];
            }
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t idx = 0; idx < grad.data.size(); ++idx) {
            double g = grad.data[idx] * inv_n + lambda * model.weights.data[idx];
            model.weights.data[idx] -= step * g;
        }
    }
    return model;
}

ConfidenceMatrix apply_stack(const StackModel& model,
                             const std::vector<ConfidenceMatrix>& members) {
    AlignedMembers aligned = align_members(members);
    if (aligned.member_rows.size() != model.n_members) {
        throw Error(ErrorCode::MisalignedMembers, "member count differs from fit time");
    }
    if (aligned.class_names != model.class_names) {
        throw Error(ErrorCode::MisalignedMembers, "class order differs from fit time");
    }
    nn::Matrix x = build_meta_features(aligned);

    ConfidenceMatrix out;
    out.ids = aligned.ids;
    out.labels = aligned.labels;
    out.class_names = aligned.class_names;
    out.rows.reserve(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* row = x.row(i);
        std::vector<double> logits(model.n_classes, 0.0);
        for (std::size_t c = 0; c < model.n_classes; ++c) {
            double acc = 0;
            for (std::size_t j = 0; j < x.cols; ++j) acc += row[j] * model.weights.at(j, c);
            logits[c] = acc;
        }
        softmax_in_place(logits);
        out.rows.push_back(std::move(logits));
    }
    return out;
}

ConfidenceMatrix evaluate_stack(const StackModel& model,
                                const std::vector<ConfidenceMatrix>& members) {
    AlignedMembers aligned = align_members(members);
    if (hash_ids(aligned.ids) == model.fit_ids_hash) {
        throw Error(ErrorCode::EvalOnFitSplit,
                    "refusing to evaluate the stack on the split it was fit on (" +
                        model.fit_split + ")");
    }
    return apply_stack(model, members);
}

std::vector<std::size_t> select_best_n(const std::vector<ConfidenceMatrix>& members,
                                       const std::vector<std::string>& member_ids,
                                       std::size_t n) {
    if (n > members.size()) {
        throw Error(ErrorCode::BadConfig, "best-n larger than member count");
    }
    if (member_ids.size() != members.size()) {
        throw Error(ErrorCode::BadConfig, "one id per member required");
    }
    struct Ranked {
        double f1;
        std::string id;
        std::size_t index;
    };
    std::vector<Ranked> ranked;
    for (std::size_t i = 0; i < members.size(); ++i) {
        metrics::MetricsReport report = metrics::evaluate(members[i], {1}, {});
        ranked.push_back({report.macro_f1, member_ids[i], i});
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        if (a.f1 != b.f1) return a.f1 > b.f1;
        return a.id < b.id;
    });
    std::vector<std::size_t> picked;
    for (std::size_t i = 0; i < n; ++i) picked.push_back(ranked[i].index);
    return picked;
}

void save_stack(const StackModel& model, const std::string& path) {
    json doc;
    doc["n_members"] = model.n_members;
    doc["n_classes"] = model.n_classes;
    doc["class_names"] = model.class_names;
    doc["lambda"] = model.lambda;
    doc["iterations"] = model.iterations;
    doc["fit_split"] = model.fit_split;
    doc["fit_ids_hash"] = model.fit_ids_hash;
    doc["weights"] = model.weights.data;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);
    out << doc.dump() << '\n';
}

StackModel load_stack(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
    json doc = json::parse(in);
    StackModel model;
    model.n_members = doc.at("n_members").get<std::size_t>();
    model.n_classes = doc.at("n_classes").get<std::size_t>();
    model.class_names = doc.at("class_names").get<std::vector<std::string>>();
    model.lambda = doc.at("lambda").get<double>();
    model.iterations = doc.at("iterations").get<int>();
    model.fit_split = doc.at("fit_split").get<std::string>();
    model.fit_ids_hash = doc.at("fit_ids_hash").get<std::uint64_t>();
    model.weights = nn::Matrix(model.n_members * model.n_classes + 1, model.n_classes);
    model.weights.data = doc.at("weights").get<std::vector<double>>();
    if (model.weights.data.size() != model.weights.rows * model.weights.cols) {
        throw Error(ErrorCode::IoFailure, path + ": stack weight shape mismatch");
    }
    return model;
}

}  // namespace plankton::ensemble
