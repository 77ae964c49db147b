#include "plankton/commands.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include <json.hpp>

#include "plankton/corpus.hpp"
#include "plankton/csv.hpp"
#include "plankton/ensemble.hpp"
#include "plankton/error.hpp"
#include "plankton/features.hpp"
#include "plankton/metrics.hpp"
#include "plankton/neural.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace plankton::cli {

namespace {

// Removes declared outputs unless the command ran to completion.
class OutputGuard {
public:
    void declare(const std::string& path) { paths_.push_back(path); }
    void commit() { committed_ = true; }
    ~OutputGuard() {
        if (committed_) return;
        for (const auto& path : paths_) {
            std::error_code ec;
            fs::remove(path, ec);
            fs::remove(path + ".provenance.json", ec);
        }
    }

private:
    std::vector<std::string> paths_;
    bool committed_ = false;
};

void write_provenance(const std::string& artifact_path, const RunConfig& config) {
    json doc;
    doc["config_hash"] = config.hash();
    doc["config"] = json::parse(config.to_json_string());
    std::ofstream out(artifact_path + ".provenance.json", std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write provenance for " + artifact_path);
    out << doc.dump(2) << '\n';
}

std::string work_path(const RunConfig& config, const std::string& relative) {
    return (fs::path(config.work_dir) / relative).string();
}

void ensure_dir(const std::string& path) { fs::create_directories(path); }

std::string label_of_id(const std::string& id) {
    auto slash = id.find('/');
    if (slash == std::string::npos) {
        throw Error(ErrorCode::BadConfig, "sample id without class folder: " + id);
    }
    return id.substr(0, slash);
}

struct SplitData {
    nn::Matrix features;
    std::vector<std::size_t> labels;
    std::vector<std::string> ids;
    std::vector<std::string> label_names;
};

SplitData gather_split(const FeatureMatrix& matrix, const Standardizer& standardizer,
                       const std::vector<std::string>& split_ids, const ClassCatalog& catalog) {
    std::map<std::string, std::size_t> row_of;
    for (std::size_t i = 0; i < matrix.ids.size(); ++i) row_of[matrix.ids[i]] = i;

    SplitData data;
    std::vector<std::string> present;
    for (const auto& id : split_ids) {
        if (row_of.count(id)) present.push_back(id);
    }
    data.features = nn::Matrix(present.size(), matrix.names.size());
    for (std::size_t i = 0; i < present.size(); ++i) {
        const std::size_t row = row_of[present[i]];
        std::vector<double> transformed = standardizer.transform_row(matrix.rows[row]);
        std::copy(transformed.begin(), transformed.end(), data.features.row(i));
        data.ids.push_back(present[i]);
        data.label_names.push_back(matrix.labels[row]);
        int index = catalog.index_of(matrix.labels[row]);
        if (index < 0) throw Error(ErrorCode::UnknownLabel, matrix.labels[row]);
        data.labels.push_back(static_cast<std::size_t>(index));
    }
    return data;
}

ClassCatalog catalog_from_manifest(const SplitManifest& manifest) {
    ClassCatalog catalog;
    catalog.names = manifest.classes;
    catalog.counts.assign(manifest.classes.size(), 0);
    for (const auto* split : {&manifest.train, &manifest.val, &manifest.test}) {
        for (const auto& id : *split) {
            int index = catalog.index_of(label_of_id(id));
            if (index >= 0) catalog.counts[static_cast<std::size_t>(index)] += 1;
        }
    }
    return catalog;
}

std::string seed_tag(std::uint64_t seed) { return "mlp_seed" + std::to_string(seed); }

}  // namespace

std::string cmd_split(const RunConfig& config) {
    config.validate();
    ensure_dir(config.work_dir);
    const std::string path = work_path(config, "manifest.json");
    OutputGuard guard;
    guard.declare(path);

    ScanResult scan = scan_corpus(config.corpus_root);
    for (const auto& warning : scan.warnings) std::cerr << "warning: " << warning << '\n';
    SplitManifest manifest =
        make_split(scan.catalog, scan.records, config.split_seed, config.ratios);
    save_manifest(manifest, path);
    write_provenance(path, config);
    guard.commit();
    return path;
}

std::string cmd_extract(const RunConfig& config, int jobs) {
    config.validate();
    SplitManifest manifest = load_manifest(work_path(config, "manifest.json"));

    std::vector<std::string> all_ids;
    all_ids.reserve(manifest.train.size() + manifest.val.size() + manifest.test.size());
    for (const auto* split : {&manifest.train, &manifest.val, &manifest.test}) {
        all_ids.insert(all_ids.end(), split->begin(), split->end());
    }
    std::sort(all_ids.begin(), all_ids.end());

    const auto& names = canonical_feature_names();
    std::vector<std::vector<double>> rows(all_ids.size());
    std::vector<std::string> failures(all_ids.size());

    const int worker_count = std::max(1, jobs);
    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        while (true) {
            std::size_t i = cursor.fetch_add(1);
            if (i >= all_ids.size()) break;
            const std::string full = (fs::path(config.corpus_root) / all_ids[i]).string();
            try {
                RoiImage image = decode_image(full);
                FeatureExtraction extraction =
                    extract_features(image, config.threshold, config.scale_mm_per_px);
                rows[i] = std::move(extraction.values);
            } catch (const Error& error) {
                failures[i] = error.what();
            }
        }
    };
    if (worker_count == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < worker_count; ++t) pool.emplace_back(worker);
        for (auto& thread : pool) thread.join();
    }

    FeatureMatrix matrix;
    matrix.names = names;
    for (std::size_t i = 0; i < all_ids.size(); ++i) {
        if (!failures[i].empty()) {
            std::cerr << "warning: skipping " << all_ids[i] << " (" << failures[i] << ")\n";
            continue;
        }
        matrix.ids.push_back(all_ids[i]);
        matrix.labels.push_back(label_of_id(all_ids[i]));
        matrix.rows.push_back(std::move(rows[i]));
    }
    if (matrix.ids.empty()) throw Error(ErrorCode::EmptyCorpus, "no sample produced features");

    std::set<std::string> train_ids(manifest.train.begin(), manifest.train.end());
    std::vector<std::vector<double>> train_rows;
    for (std::size_t i = 0; i < matrix.ids.size(); ++i) {
        if (train_ids.count(matrix.ids[i])) train_rows.push_back(matrix.rows[i]);
    }
    Standardizer standardizer;
    standardizer.fit(train_rows, "train");

    const std::string csv_path = work_path(config, "features.csv");
    const std::string std_path = work_path(config, "features.standardizer.json");
    OutputGuard guard;
    guard.declare(csv_path);
    guard.declare(std_path);
    save_feature_matrix(matrix, csv_path);
    standardizer.save(std_path);
    write_provenance(csv_path, config);
    write_provenance(std_path, config);
    guard.commit();
    return csv_path;
}

namespace {

// Cross product of grid layouts and learning rates. Activations and dropout
// follow the configured per-layer lists, cycled to each candidate's depth.
std::vector<nn::GridCandidate> build_grid(const RunConfig& config) {
    std::vector<nn::Activation> base_acts;
    for (const auto& name : config.activations) {
        base_acts.push_back(nn::activation_from_name(name));
    }
    std::vector<double> rates = config.grid_learning_rates;
    if (rates.empty()) rates.push_back(config.training.learning_rate);
    std::vector<std::vector<std::size_t>> layouts = config.grid_hidden_dims;
    if (layouts.empty()) layouts.push_back(config.hidden_dims);

    std::vector<nn::GridCandidate> candidates;
    for (const auto& layout : layouts) {
        nn::GridCandidate candidate;
        candidate.hidden_dims = layout;
        for (std::size_t l = 0; l < layout.size(); ++l) {
            candidate.activations.push_back(base_acts[l % base_acts.size()]);
            candidate.dropout_rates.push_back(
                config.dropout_rates[l % config.dropout_rates.size()]);
        }
        for (double rate : rates) {
            candidate.learning_rate = rate;
            candidates.push_back(candidate);
        }
    }
    return candidates;
}

}  // namespace

std::vector<std::string> cmd_train(const RunConfig& config_in,
                                   const std::vector<std::uint64_t>& seeds_in, int jobs,
                                   bool use_grid) {
    RunConfig config = config_in;
    config.validate();
    SplitManifest manifest = load_manifest(work_path(config, "manifest.json"));
    FeatureMatrix matrix = load_feature_matrix(work_path(config, "features.csv"));
    Standardizer standardizer = Standardizer::load(work_path(config, "features.standardizer.json"));
    ClassCatalog catalog = catalog_from_manifest(manifest);

    SplitData train_data = gather_split(matrix, standardizer, manifest.train, catalog);
    SplitData val_data = gather_split(matrix, standardizer, manifest.val, catalog);
    SplitData test_data = gather_split(matrix, standardizer, manifest.test, catalog);

    std::vector<std::uint64_t> seeds = seeds_in;
    if (seeds.empty()) seeds.push_back(config.training.seed);

    if (use_grid) {
        std::vector<nn::GridCandidate> candidates = build_grid(config);
        nn::GridOutcome outcome =
            nn::grid_search(candidates, train_data.features, train_data.labels,
                            val_data.features, val_data.labels, catalog.size(), config.training);
        const nn::GridCandidate& winner = candidates[outcome.best_index];
        config.hidden_dims = winner.hidden_dims;
        config.activations.clear();
        config.dropout_rates = winner.dropout_rates;
        for (nn::Activation a : winner.activations) {
            config.activations.push_back(nn::activation_name(a));
        }
        config.training.learning_rate = winner.learning_rate;
        std::cout << "grid: candidate " << outcome.best_index << " of " << candidates.size()
                  << " wins (val loss " << outcome.val_losses[outcome.best_index] << ")\n";
    }

    std::vector<std::size_t> dims;
    dims.push_back(matrix.names.size());
    dims.insert(dims.end(), config.hidden_dims.begin(), config.hidden_dims.end());
    dims.push_back(catalog.size());
    std::vector<nn::Activation> activations;
    for (const auto& name : config.activations) {
        activations.push_back(nn::activation_from_name(name));
    }

    ensure_dir(work_path(config, "models"));
    ensure_dir(work_path(config, "confidences"));

    std::vector<std::string> model_paths(seeds.size());
    OutputGuard guard;
    for (std::uint64_t seed : seeds) {
        guard.declare(work_path(config, "models/" + seed_tag(seed) + ".json"));
        guard.declare(work_path(config, "confidences/" + seed_tag(seed) + "_val.csv"));
        guard.declare(work_path(config, "confidences/" + seed_tag(seed) + "_test.csv"));
    }

    std::atomic<std::size_t> cursor{0};
    std::atomic<bool> failed{false};
    std::string failure_message;
    std::mutex failure_mutex;

    auto worker = [&]() {
        while (!failed.load()) {
            std::size_t i = cursor.fetch_add(1);
            if (i >= seeds.size()) break;
            const std::uint64_t seed = seeds[i];
            try {
                nn::TrainingConfig train_config = config.training;
                train_config.seed = seed;
                nn::MlpModel model =
                    nn::init_glorot(dims, activations, config.dropout_rates, seed);
                model.class_names = catalog.names;
                model.standardizer_ref = "features.standardizer.json";

                nn::TrainHistory history;
                nn::MlpModel best =
                    nn::train(model, train_data.features, train_data.labels, val_data.features,
                              val_data.labels, train_config, &history);

                const std::string model_path =
                    work_path(config, "models/" + seed_tag(seed) + ".json");
                nn::save_model(best, train_config, model_path);
                write_provenance(model_path, config);

                ConfidenceMatrix val_conf = nn::predict(best, val_data.features, val_data.ids,
                                                        val_data.label_names);
                ConfidenceMatrix test_conf = nn::predict(best, test_data.features, test_data.ids,
                                                         test_data.label_names);
                const std::string val_path =
                    work_path(config, "confidences/" + seed_tag(seed) + "_val.csv");
                const std::string test_path =
                    work_path(config, "confidences/" + seed_tag(seed) + "_test.csv");
                save_confidences(val_conf, val_path);
                save_confidences(test_conf, test_path);
                write_provenance(val_path, config);
                write_provenance(test_path, config);

                std::cout << seed_tag(seed) << ": best val loss "
                          << history.best_val_loss << " at epoch " << (history.best_epoch + 1)
                          << " of " << history.epochs.size() << '\n';
                model_paths[i] = model_path;
            } catch (const std::exception& error) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                failed.store(true);
                failure_message = error.what();
            }
        }
    };

    const int worker_count = std::max(1, std::min<int>(jobs, static_cast<int>(seeds.size())));
    if (worker_count == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < worker_count; ++t) pool.emplace_back(worker);
        for (auto& thread : pool) thread.join();
    }
    if (failed.load()) throw Error(ErrorCode::IoFailure, "train failed: " + failure_message);
    guard.commit();
    return model_paths;
}

std::string cmd_predict(const RunConfig& config, const std::string& model_path,
                        const std::string& split) {
    config.validate();
    SplitManifest manifest = load_manifest(work_path(config, "manifest.json"));
    FeatureMatrix matrix = load_feature_matrix(work_path(config, "features.csv"));
    Standardizer standardizer = Standardizer::load(work_path(config, "features.standardizer.json"));
    ClassCatalog catalog = catalog_from_manifest(manifest);

    const std::vector<std::string>* ids = nullptr;
    if (split == "train") ids = &manifest.train;
    else if (split == "val") ids = &manifest.val;
    else if (split == "test") ids = &manifest.test;
    else throw Error(ErrorCode::BadConfig, "split must be train, val or test");

    nn::MlpModel model = nn::load_model(model_path);
    SplitData data = gather_split(matrix, standardizer, *ids, catalog);
    ConfidenceMatrix confidences = nn::predict(model, data.features, data.ids, data.label_names);

    ensure_dir(work_path(config, "confidences"));
    const std::string stem = fs::path(model_path).stem().string();
    const std::string out_path = work_path(config, "confidences/" + stem + "_" + split + ".csv");
    OutputGuard guard;
    guard.declare(out_path);
    save_confidences(confidences, out_path);
    write_provenance(out_path, config);
    guard.commit();
    return out_path;
}

std::vector<std::string> cmd_ensemble(const RunConfig& config, const EnsembleArgs& args) {
    config.validate();
    std::string method = args.method.empty() ? config.ensemble_method : args.method;
    if (method != "average" && method != "stack") {
        throw Error(ErrorCode::BadConfig, "ensemble method must be 'average' or 'stack'");
    }

    std::vector<std::string> test_paths = args.test_members;
    if (test_paths.empty()) {
        const std::string dir = work_path(config, "confidences");
        if (fs::is_directory(dir)) {
            for (const auto& entry : fs::directory_iterator(dir)) {
                std::string name = entry.path().filename().string();
                if (name.size() > 9 && name.ends_with("_test.csv")) {
                    test_paths.push_back(entry.path().string());
                }
            }
        }
        std::sort(test_paths.begin(), test_paths.end());
    }
    if (test_paths.empty()) {
        throw Error(ErrorCode::MisalignedMembers, "no member confidence files found");
    }

    auto member_id = [](const std::string& path) {
        std::string stem = fs::path(path).filename().string();
        if (stem.ends_with("_test.csv")) stem.resize(stem.size() - 9);
        else if (stem.ends_with(".csv")) stem.resize(stem.size() - 4);
        return stem;
    };
    auto val_partner = [&](const std::string& test_path) {
        if (!args.val_members.empty()) return std::string();
        std::string candidate = test_path;
        const std::string suffix = "_test.csv";
        auto pos = candidate.rfind(suffix);
        if (pos == std::string::npos) return std::string();
        candidate.replace(pos, suffix.size(), "_val.csv");
        return fs::exists(candidate) ? candidate : std::string();
    };

    std::vector<std::string> val_paths = args.val_members;
    if (val_paths.empty()) {
        for (const auto& path : test_paths) {
            std::string partner = val_partner(path);
            if (!partner.empty()) val_paths.push_back(partner);
        }
    }

    std::vector<ConfidenceMatrix> test_members;
    std::vector<std::string> member_ids;
    for (const auto& path : test_paths) {
        test_members.push_back(load_confidences(path));
        member_ids.push_back(member_id(path));
    }
    std::vector<ConfidenceMatrix> val_members;
    for (const auto& path : val_paths) val_members.push_back(load_confidences(path));

    // Best-n selection ranks members by validation macro-F1.
    std::vector<std::size_t> kept(test_members.size());
    std::iota(kept.begin(), kept.end(), 0);
    if (args.best_n > 0 && args.best_n < test_members.size()) {
        if (val_members.size() != test_members.size()) {
            throw Error(ErrorCode::MisalignedMembers,
                        "best-n selection needs one validation file per member");
        }
        kept = ensemble::select_best_n(val_members, member_ids, args.best_n);
        std::sort(kept.begin(), kept.end());
    }
    auto subset = [&kept](const std::vector<ConfidenceMatrix>& all) {
        std::vector<ConfidenceMatrix> picked;
        for (std::size_t index : kept) picked.push_back(all[index]);
        return picked;
    };
    std::vector<std::string> kept_ids;
    for (std::size_t index : kept) kept_ids.push_back(member_ids[index]);

    ensure_dir(work_path(config, "ensembles"));
    std::vector<std::string> artifacts;
    OutputGuard guard;

    json spec;
    spec["method"] = method;
    spec["members"] = kept_ids;
    spec["selection"] = (args.best_n > 0 && args.best_n < test_members.size())
                            ? json{{"best_n", args.best_n}, {"metric", "macro_f1"}}
                            : json{{"all", true}};

    if (method == "average") {
        ConfidenceMatrix combined = ensemble::average(subset(test_members));
        combined.validate();  // members carry CSV rounding, so wire tolerance
        const std::string out_path = work_path(config, "ensembles/average_test.csv");
        guard.declare(out_path);
        save_confidences(combined, out_path);
        write_provenance(out_path, config);
        artifacts.push_back(out_path);
    } else {
        if (val_members.size() != test_members.size()) {
            throw Error(ErrorCode::MisalignedMembers,
                        "stacking needs one validation file per member");
        }
        ensemble::StackModel stack = ensemble::fit_stack(
            subset(val_members), config.stack_lambda, config.stack_iterations, config.split_seed);
        ConfidenceMatrix combined = ensemble::evaluate_stack(stack, subset(test_members));
        combined.validate();
        const std::string model_path = work_path(config, "ensembles/stack_model.json");
        const std::string out_path = work_path(config, "ensembles/stack_test.csv");
        guard.declare(model_path);
        guard.declare(out_path);
        ensemble::save_stack(stack, model_path);
        save_confidences(combined, out_path);
        write_provenance(model_path, config);
        write_provenance(out_path, config);
        artifacts.push_back(out_path);
        artifacts.push_back(model_path);
        spec["stack_model"] = "stack_model.json";
        spec["lambda"] = config.stack_lambda;
        spec["iterations"] = config.stack_iterations;
    }

    const std::string spec_path = work_path(config, "ensembles/" + method + "_spec.json");
    guard.declare(spec_path);
    {
        std::ofstream out(spec_path, std::ios::binary);
        if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + spec_path);
        out << spec.dump(2) << '\n';
    }
    write_provenance(spec_path, config);
    artifacts.push_back(spec_path);
    guard.commit();
    return artifacts;
}

std::string cmd_evaluate(const RunConfig& config, const std::string& confidences_path,
                         const std::string& name) {
    config.validate();
    ConfidenceMatrix confidences = load_confidences(confidences_path);
    confidences.validate();
    metrics::MetricsReport report = metrics::evaluate(confidences, config.top_k, config.exclude);

    ensure_dir(work_path(config, "metrics"));
    const std::string json_path = work_path(config, "metrics/" + name + ".json");
    const std::string csv_path = work_path(config, "metrics/" + name + "_per_class.csv");
    OutputGuard guard;
    guard.declare(json_path);
    guard.declare(csv_path);
    metrics::save_report_json(report, json_path);
    metrics::save_report_csv(report, csv_path);
    write_provenance(json_path, config);
    write_provenance(csv_path, config);
    guard.commit();

    std::cout << name << ": accuracy " << report.accuracy << ", macro-F1 " << report.macro_f1
              << " over " << report.n_samples << " samples\n";
    return json_path;
}

std::string cmd_report(const RunConfig& config, const std::string& metrics_path,
                       const std::string& name) {
    metrics::MetricsReport report = metrics::load_report_json(metrics_path);
    ensure_dir(work_path(config, "charts"));
    const std::string svg_path = work_path(config, "charts/" + name + ".svg");
    OutputGuard guard;
    guard.declare(svg_path);
    metrics::write_f1_chart_svg(report, svg_path);
    write_provenance(svg_path, config);
    guard.commit();
    return svg_path;
}

}  // namespace plankton::cli
