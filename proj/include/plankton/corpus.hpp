#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace plankton {

struct SampleRecord {
    std::string id;     // relative path below the corpus root, '/' separated
    std::string label;  // class folder name
    std::uint64_t byte_length = 0;
};

// Class order is lexicographic everywhere; it fixes confidence-vector
// column semantics across runs and imported files.
struct ClassCatalog {
    std::vector<std::string> names;
    std::vector<std::size_t> counts;

    int index_of(const std::string& name) const;  // -1 if absent
    std::size_t size() const { return names.size(); }
};

struct SplitManifest {
    std::uint64_t seed = 0;
    std::array<double, 3> ratios{0.70, 0.15, 0.15};  // train, val, test
    std::string prng;
    std::vector<std::string> classes;
    std::vector<std::string> train;  // sorted sample ids
    std::vector<std::string> val;
    std::vector<std::string> test;
};

struct ScanResult {
    ClassCatalog catalog;
    std::vector<SampleRecord> records;
    std::vector<std::string> warnings;  // per-file problems, scan continued
};

// Walks root/<class>/<image files>. Image files are .png/.jpg/.jpeg
// (case-insensitive). Empty class folders are dropped with a warning.
ScanResult scan_corpus(const std::string& root);

// Per-class stratified assignment. For a class of m samples, val and test
// each get floor(ratio*m), bumped to at least 1 when m >= 3; the remainder
// trains. Shuffle order depends only on the seed.
SplitManifest make_split(const ClassCatalog& catalog,
                         const std::vector<SampleRecord>& records,
                         std::uint64_t seed,
                         const std::array<double, 3>& ratios);

void save_manifest(const SplitManifest& manifest, const std::string& path);
SplitManifest load_manifest(const std::string& path);

}  // namespace plankton
