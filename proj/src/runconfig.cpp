#include "plankton/runconfig.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "plankton/error.hpp"

using json = nlohmann::ordered_json;

namespace plankton {

void RunConfig::validate() const {
    double ratio_sum = ratios[0] + ratios[1] + ratios[2];
    if (std::abs(ratio_sum - 1.0) > 1e-9 || ratios[0] < 0 || ratios[1] < 0 || ratios[2] < 0) {
        throw Error(ErrorCode::BadConfig, "split ratios must be non-negative and sum to 1");
    }
    if (threshold < 0 || threshold > 255) {
        throw Error(ErrorCode::BadConfig, "threshold must lie in [0, 255]");
    }
    if (resize != "squash" && resize != "pad") {
        throw Error(ErrorCode::BadConfig, "resize must be 'squash' or 'pad'");
    }
    if (side < 1) throw Error(ErrorCode::BadConfig, "side must be >= 1");
    if (scale_mm_per_px <= 0) throw Error(ErrorCode::BadConfig, "scale must be > 0");
    if (hidden_dims.empty()) throw Error(ErrorCode::BadConfig, "at least one hidden layer");
    if (activations.size() != hidden_dims.size() || dropout_rates.size() != hidden_dims.size()) {
        throw Error(ErrorCode::BadConfig, "one activation and dropout rate per hidden layer");
    }
    for (const auto& name : activations) nn::activation_from_name(name);
    for (double rate : dropout_rates) {
        if (rate < 0 || rate >= 1) throw Error(ErrorCode::BadConfig, "dropout outside [0, 1)");
    }
    for (const auto& dims : grid_hidden_dims) {
        if (dims.empty()) throw Error(ErrorCode::BadConfig, "grid layout without hidden layers");
        for (std::size_t width : dims) {
            if (width < 1) throw Error(ErrorCode::BadConfig, "grid layer width must be >= 1");
        }
    }
    for (double rate : grid_learning_rates) {
        if (rate <= 0) throw Error(ErrorCode::BadConfig, "grid learning rate must be > 0");
    }
    if (ensemble_method != "average" && ensemble_method != "stack") {
        throw Error(ErrorCode::BadConfig, "ensemble method must be 'average' or 'stack'");
    }
    if (best_n < 1) throw Error(ErrorCode::BadConfig, "best_n must be >= 1");
    if (stack_lambda < 0) throw Error(ErrorCode::BadConfig, "stack lambda must be >= 0");
    if (stack_iterations < 1) throw Error(ErrorCode::BadConfig, "stack iterations must be >= 1");
    if (top_k.empty()) throw Error(ErrorCode::BadConfig, "top_k list must not be empty");
    training.validate();
}

namespace {

json config_to_json(const RunConfig& c) {
    json doc;
    doc["paths"] = {{"corpus_root", c.corpus_root}, {"work_dir", c.work_dir}};
    doc["split"] = {{"seed", c.split_seed}, {"ratios", c.ratios}};
    doc["imaging"] = {{"threshold", c.threshold}, {"resize", c.resize}, {"side", c.side}};
    doc["augment"] = {{"max_rotation_deg", c.augment.max_rotation_deg},
                      {"zoom_lo", c.augment.zoom_lo},
                      {"zoom_hi", c.augment.zoom_hi},
                      {"max_shear_deg", c.augment.max_shear_deg},
                      {"allow_flip_h", c.augment.allow_flip_h},
                      {"allow_flip_v", c.augment.allow_flip_v}};
    doc["features"] = {{"scale_mm_per_px", c.scale_mm_per_px}};
    doc["training"] = {{"learning_rate", c.training.learning_rate},
                       {"beta1", c.training.beta1},
                       {"beta2", c.training.beta2},
                       {"adam_epsilon", c.training.adam_epsilon},
                       {"epochs", c.training.epochs},
                       {"patience", c.training.patience},
                       {"batch_size", c.training.batch_size},
                       {"seed", c.training.seed},
                       {"class_weighting", c.training.class_weighting},
                       {"finetune_epochs", c.training.finetune_epochs},
                       {"finetune_lr", c.training.finetune_lr},
                       {"hidden_dims", c.hidden_dims},
                       {"activations", c.activations},
                       {"dropout_rates", c.dropout_rates}};
    doc["ensemble"] = {{"method", c.ensemble_method},
                       {"best_n", c.best_n},
                       {"lambda", c.stack_lambda},
                       {"iterations", c.stack_iterations}};
    doc["metrics"] = {{"top_k", c.top_k}, {"exclude", c.exclude}};
    if (!c.grid_hidden_dims.empty() || !c.grid_learning_rates.empty()) {
        doc["grid"] = {{"hidden_dims", c.grid_hidden_dims},
                       {"learning_rates", c.grid_learning_rates}};
    }
    return doc;
}

template <typename T>
void maybe_get(const json& doc, const char* key, T& target) {
    if (doc.contains(key)) target = doc.at(key).get<T>();
}

}  // namespace

std::string RunConfig::to_json_string() const { return config_to_json(*this).dump(2); }

std::string RunConfig::hash() const {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : to_json_string()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunConfig RunConfig::from_json_string(const std::string& text) {
    json doc = json::parse(text);
    RunConfig c;
    if (doc.contains("paths")) {
        maybe_get(doc["paths"], "corpus_root", c.corpus_root);
        maybe_get(doc["paths"], "work_dir", c.work_dir);
    }
    if (doc.contains("split")) {
        maybe_get(doc["split"], "seed", c.split_seed);
        if (doc["split"].contains("ratios")) {
            auto r = doc["split"]["ratios"].get<std::vector<double>>();
            if (r.size() != 3) throw Error(ErrorCode::BadConfig, "ratios must have 3 entries");
            std::copy(r.begin(), r.end(), c.ratios.begin());
        }
    }
    if (doc.contains("imaging")) {
        maybe_get(doc["imaging"], "threshold", c.threshold);
        maybe_get(doc["imaging"], "resize", c.resize);
        maybe_get(doc["imaging"], "side", c.side);
    }
    if (doc.contains("augment")) {
        const json& a = doc["augment"];
        maybe_get(a, "max_rotation_deg", c.augment.max_rotation_deg);
        maybe_get(a, "zoom_lo", c.augment.zoom_lo);
        maybe_get(a, "zoom_hi", c.augment.zoom_hi);
        maybe_get(a, "max_shear_deg", c.augment.max_shear_deg);
        maybe_get(a, "allow_flip_h", c.augment.allow_flip_h);
        maybe_get(a, "allow_flip_v", c.augment.allow_flip_v);
    }
    if (doc.contains("features")) {
        maybe_get(doc["features"], "scale_mm_per_px", c.scale_mm_per_px);
    }
    if (doc.contains("training")) {
        const json& t = doc["training"];
        maybe_get(t, "learning_rate", c.training.learning_rate);
        maybe_get(t, "beta1", c.training.beta1);
        maybe_get(t, "beta2", c.training.beta2);
        maybe_get(t, "adam_epsilon", c.training.adam_epsilon);
        maybe_get(t, "epochs", c.training.epochs);
        maybe_get(t, "patience", c.training.patience);
        maybe_get(t, "batch_size", c.training.batch_size);
        maybe_get(t, "seed", c.training.seed);
        maybe_get(t, "class_weighting", c.training.class_weighting);
        maybe_get(t, "finetune_epochs", c.training.finetune_epochs);
        maybe_get(t, "finetune_lr", c.training.finetune_lr);
        maybe_get(t, "hidden_dims", c.hidden_dims);
        maybe_get(t, "activations", c.activations);
        maybe_get(t, "dropout_rates", c.dropout_rates);
    }
    if (doc.contains("ensemble")) {
        const json& e = doc["ensemble"];
        maybe_get(e, "method", c.ensemble_method);
        maybe_get(e, "best_n", c.best_n);
        maybe_get(e, "lambda", c.stack_lambda);
        maybe_get(e, "iterations", c.stack_iterations);
    }
    if (doc.contains("metrics")) {
        maybe_get(doc["metrics"], "top_k", c.top_k);
        maybe_get(doc["metrics"], "exclude", c.exclude);
    }
    if (doc.contains("grid")) {
        maybe_get(doc["grid"], "hidden_dims", c.grid_hidden_dims);
        maybe_get(doc["grid"], "learning_rates", c.grid_learning_rates);
    }
    c.validate();
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::BadConfig, "cannot open config " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_json_string(buffer.str());
}

}  // namespace plankton
