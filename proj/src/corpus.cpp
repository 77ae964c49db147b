#include "plankton/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "plankton/error.hpp"
#include "plankton/rng.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace plankton {

int ClassCatalog::index_of(const std::string& name) const {
    auto it = std::lower_bound(names.begin(), names.end(), name);
    if (it == names.end() || *it != name) return -1;
    return static_cast<int>(it - names.begin());
}

namespace {

bool has_image_extension(const fs::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace

ScanResult scan_corpus(const std::string& root) {
    if (!fs::is_directory(root)) {
        throw Error(ErrorCode::EmptyCorpus, "not a directory: " + root);
    }

    std::vector<std::string> class_dirs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) class_dirs.push_back(entry.path().filename().string());
    }
    std::sort(class_dirs.begin(), class_dirs.end());
    if (class_dirs.empty()) {
        throw Error(ErrorCode::EmptyCorpus, "no class folders under " + root);
    }

    ScanResult result;
    for (const auto& class_name : class_dirs) {
        std::vector<SampleRecord> class_records;
        std::vector<std::string> files;
        for (const auto& entry : fs::directory_iterator(fs::path(root) / class_name)) {
            if (!entry.is_regular_file() || !has_image_extension(entry.path())) continue;
            files.push_back(entry.path().filename().string());
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            fs::path full = fs::path(root) / class_name / file;
            std::error_code ec;
            auto size = fs::file_size(full, ec);
            std::ifstream probe(full, std::ios::binary);
            if (ec || !probe || size == 0) {
                result.warnings.push_back("unreadable image: " + class_name + "/" + file);
                continue;
            }
            class_records.push_back({class_name + "/" + file, class_name, size});
        }
        if (class_records.empty()) {
            result.warnings.push_back("class folder '" + class_name +
                                      "' has no readable images, omitted");
            continue;
        }
        result.catalog.names.push_back(class_name);
        result.catalog.counts.push_back(class_records.size());
        result.records.insert(result.records.end(), class_records.begin(), class_records.end());
    }
    if (result.catalog.names.empty()) {
        throw Error(ErrorCode::EmptyCorpus, "no readable images under " + root);
    }
    return result;
}

SplitManifest make_split(const ClassCatalog& catalog,
                         const std::vector<SampleRecord>& records,
                         std::uint64_t seed,
                         const std::array<double, 3>& ratios) {
    double sum = ratios[0] + ratios[1] + ratios[2];
    if (std::abs(sum - 1.0) > 1e-9 || ratios[0] < 0 || ratios[1] < 0 || ratios[2] < 0) {
        throw Error(ErrorCode::BadRatios, "ratios must be non-negative and sum to 1");
    }

    std::map<std::string, std::vector<std::string>> by_class;
    for (const auto& record : records) by_class[record.label].push_back(record.id);

    SplitManifest manifest;
    manifest.seed = seed;
    manifest.ratios = ratios;
    manifest.prng = Rng::kAlgorithmId;
    manifest.classes = catalog.names;

    Rng rng(seed);
    // Classes in lexicographic (catalog) order so the PRNG stream is stable.
    for (const auto& class_name : catalog.names) {
        auto it = by_class.find(class_name);
        if (it == by_class.end() || it->second.empty()) {
            throw Error(ErrorCode::EmptyCorpus, "class without samples: " + class_name);
        }
        auto ids = it->second;
        std::sort(ids.begin(), ids.end());
        rng.shuffle(ids);

        const std::size_t m = ids.size();
        std::size_t n_val = static_cast<std::size_t>(std::floor(ratios[1] * static_cast<double>(m)));
        std::size_t n_test = static_cast<std::size_t>(std::floor(ratios[2] * static_cast<double>(m)));
        if (m >= 3) {
            if (n_val == 0) n_val = 1;
            if (n_test == 0) n_test = 1;
        }
        if (n_val + n_test > m) n_test = m - n_val;  // unreachable for sane ratios

        for (std::size_t i = 0; i < m; ++i) {
            if (i < n_val) manifest.val.push_back(ids[i]);
            else if (i < n_val + n_test) manifest.test.push_back(ids[i]);
            else manifest.train.push_back(ids[i]);
        }
    }

    std::sort(manifest.train.begin(), manifest.train.end());
    std::sort(manifest.val.begin(), manifest.val.end());
    std::sort(manifest.test.begin(), manifest.test.end());
    return manifest;
}

void save_manifest(const SplitManifest& manifest, const std::string& path) {
    json doc;
    doc["seed"] = manifest.seed;
    doc["ratios"] = manifest.ratios;
    doc["prng"] = manifest.prng;
    doc["classes"] = manifest.classes;
    doc["train"] = manifest.train;
    doc["val"] = manifest.val;
    doc["test"] = manifest.test;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);
    out << doc.dump(2) << '\n';
}

SplitManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
    json doc = json::parse(in);
    SplitManifest manifest;
    manifest.seed = doc.at("seed").get<std::uint64_t>();
    auto ratios = doc.at("ratios").get<std::vector<double>>();
    if (ratios.size() != 3) throw Error(ErrorCode::IoFailure, path + ": ratios must have 3 entries");
    std::copy(ratios.begin(), ratios.end(), manifest.ratios.begin());
    manifest.prng = doc.at("prng").get<std::string>();
    manifest.classes = doc.at("classes").get<std::vector<std::string>>();
    manifest.train = doc.at("train").get<std::vector<std::string>>();
    manifest.val = doc.at("val").get<std::vector<std::string>>();
    manifest.test = doc.at("test").get<std::vector<std::string>>();
    // The wire format stores sorted arrays; class order carries column
    // semantics, so a hand-edited unsorted file must not slip through.
    if (!std::is_sorted(manifest.classes.begin(), manifest.classes.end()) ||
        !std::is_sorted(manifest.train.begin(), manifest.train.end()) ||
        !std::is_sorted(manifest.val.begin(), manifest.val.end()) ||
        !std::is_sorted(manifest.test.begin(), manifest.test.end())) {
        throw Error(ErrorCode::IoFailure, path + ": manifest arrays must be sorted");
    }
    return manifest;
}

}  // namespace plankton
