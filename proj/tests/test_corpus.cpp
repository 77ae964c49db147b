#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "plankton/corpus.hpp"
#include "plankton/error.hpp"
#include "support/synthetic.hpp"

namespace fs = std::filesystem;
using namespace plankton;

namespace {

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "plankton_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<SampleRecord> fake_records(const std::string& label, std::size_t count) {
    std::vector<SampleRecord> records;
    for (std::size_t i = 0; i < count; ++i) {
        records.push_back({label + "/img_" + std::to_string(i) + ".png", label, 100});
    }
    return records;
}

}  // namespace

TEST_CASE("scan_corpus enumerates classes lexicographically") {
    fs::path root = fresh_dir("scan_basic");
    synthetic::build_corpus(root.string(), {{{"daphnia", 2}, {"bosmina", 1}}, 3});

    ScanResult result = scan_corpus(root.string());
    CHECK(result.catalog.names == std::vector<std::string>{"bosmina", "daphnia"});
    CHECK(result.catalog.counts == std::vector<std::size_t>{1, 2});
    CHECK(result.records.size() == 3);
    for (const auto& record : result.records) {
        CHECK(record.byte_length > 0);
        CHECK(record.id.find(record.label + "/") == 0);
    }
}

TEST_CASE("scan_corpus omits empty class folders with a warning") {
    fs::path root = fresh_dir("scan_empty_class");
    synthetic::build_corpus(root.string(), {{{"daphnia", 2}}, 3});
    fs::create_directories(root / "ghost");

    ScanResult result = scan_corpus(root.string());
    CHECK(result.catalog.names == std::vector<std::string>{"daphnia"});
    REQUIRE(result.warnings.size() == 1);
    CHECK(result.warnings[0].find("ghost") != std::string::npos);
}

TEST_CASE("scan_corpus reports unreadable files and continues") {
    fs::path root = fresh_dir("scan_unreadable");
    synthetic::build_corpus(root.string(), {{{"daphnia", 2}}, 3});
    std::ofstream(root / "daphnia" / "zero.png").close();  // zero-byte file

    ScanResult result = scan_corpus(root.string());
    CHECK(result.catalog.counts == std::vector<std::size_t>{2});
    REQUIRE(result.warnings.size() == 1);
    CHECK(result.warnings[0].find("zero.png") != std::string::npos);
}

TEST_CASE("scan_corpus rejects a root without class folders") {
    fs::path root = fresh_dir("scan_no_classes");
    CHECK_THROWS_AS(scan_corpus(root.string()), Error);
    try {
        scan_corpus(root.string());
    } catch (const Error& error) {
        CHECK(error.code() == ErrorCode::EmptyCorpus);
    }
}

TEST_CASE("make_split applies the floor-and-remainder rule") {
    ClassCatalog catalog;
    catalog.names = {"alpha"};
    catalog.counts = {20};
    auto records = fake_records("alpha", 20);

    SplitManifest manifest = make_split(catalog, records, 42, {0.70, 0.15, 0.15});
    CHECK(manifest.train.size() == 14);
    CHECK(manifest.val.size() == 3);
    CHECK(manifest.test.size() == 3);
}

TEST_CASE("make_split guarantees val and test for classes of three") {
    ClassCatalog catalog;
    catalog.names = {"tiny"};
    catalog.counts = {3};
    auto records = fake_records("tiny", 3);

    SplitManifest manifest = make_split(catalog, records, 1, {0.70, 0.15, 0.15});
    CHECK(manifest.train.size() == 1);
    CHECK(manifest.val.size() == 1);
    CHECK(manifest.test.size() == 1);
}

TEST_CASE("make_split is deterministic for a fixed seed and differs across seeds") {
    ClassCatalog catalog;
    catalog.names = {"a", "b"};
    catalog.counts = {10, 7};
    auto records = fake_records("a", 10);
    auto more = fake_records("b", 7);
    records.insert(records.end(), more.begin(), more.end());

    SplitManifest first = make_split(catalog, records, 99, {0.70, 0.15, 0.15});
    SplitManifest second = make_split(catalog, records, 99, {0.70, 0.15, 0.15});
    CHECK(first.train == second.train);
    CHECK(first.val == second.val);
    CHECK(first.test == second.test);

    SplitManifest other = make_split(catalog, records, 100, {0.70, 0.15, 0.15});
    CHECK(first.train != other.train);
}

TEST_CASE("make_split rejects bad ratios") {
    ClassCatalog catalog;
    catalog.names = {"a"};
    catalog.counts = {5};
    auto records = fake_records("a", 5);
    CHECK_THROWS_AS(make_split(catalog, records, 1, {0.5, 0.2, 0.2}), Error);
    CHECK_THROWS_AS(make_split(catalog, records, 1, {1.2, -0.1, -0.1}), Error);
}

TEST_CASE("splits partition the corpus for many seeds and class sizes") {
    ClassCatalog catalog;
    catalog.names = {"c1", "c2", "c3", "c4"};
    catalog.counts = {1, 2, 3, 53};
    std::vector<SampleRecord> records;
    for (std::size_t c = 0; c < catalog.names.size(); ++c) {
        auto batch = fake_records(catalog.names[c], catalog.counts[c]);
        records.insert(records.end(), batch.begin(), batch.end());
    }

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SplitManifest manifest = make_split(catalog, records, seed, {0.70, 0.15, 0.15});
        std::set<std::string> all;
        for (const auto* split : {&manifest.train, &manifest.val, &manifest.test}) {
            for (const auto& id : *split) {
                CHECK(all.insert(id).second);  // pairwise disjoint
            }
        }
        CHECK(all.size() == records.size());

        // Per class: |val| and |test| within 1 of 0.15*m, subject to the
        // minimum-representation rule for m >= 3.
        for (std::size_t c = 0; c < catalog.names.size(); ++c) {
            const std::string prefix = catalog.names[c] + "/";
            auto count_in = [&prefix](const std::vector<std::string>& ids) {
                return std::count_if(ids.begin(), ids.end(), [&prefix](const std::string& id) {
                    return id.rfind(prefix, 0) == 0;
                });
            };
            double m = static_cast<double>(catalog.counts[c]);
            double expected = 0.15 * m;
            auto n_val = count_in(manifest.val);
            auto n_test = count_in(manifest.test);
            CHECK(std::abs(static_cast<double>(n_val) - expected) <= 1.0);
            CHECK(std::abs(static_cast<double>(n_test) - expected) <= 1.0);
            if (catalog.counts[c] >= 3) {
                CHECK(n_val >= 1);
                CHECK(n_test >= 1);
            }
        }
    }
}

TEST_CASE("manifest round-trips through its file bit-exactly") {
    fs::path dir = fresh_dir("manifest_roundtrip");
    ClassCatalog catalog;
    catalog.names = {"a", "b"};
    catalog.counts = {6, 4};
    auto records = fake_records("a", 6);
    auto more = fake_records("b", 4);
    records.insert(records.end(), more.begin(), more.end());

    SplitManifest manifest = make_split(catalog, records, 1234567, {0.70, 0.15, 0.15});
    const std::string first_path = (dir / "manifest.json").string();
    save_manifest(manifest, first_path);

    SplitManifest loaded = load_manifest(first_path);
    CHECK(loaded.seed == manifest.seed);
    CHECK(loaded.prng == manifest.prng);
    const std::string second_path = (dir / "again.json").string();
    save_manifest(loaded, second_path);

    std::ifstream f1(first_path, std::ios::binary), f2(second_path, std::ios::binary);
    std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(b1 == b2);
}

TEST_CASE("scan handles the jpeg decode path") {
    fs::path root = fresh_dir("scan_jpeg");
    fs::create_directories(root / "cyclops");
    RoiImage image = synthetic::blank(32, 32);
    synthetic::fill_rect(image, 8, 8, 16, 16, 200, 180, 90);
    write_jpeg(image, (root / "cyclops" / "one.jpg").string());

    ScanResult result = scan_corpus(root.string());
    CHECK(result.catalog.names == std::vector<std::string>{"cyclops"});
    RoiImage decoded = decode_image((root / "cyclops" / "one.jpg").string());
    CHECK(decoded.width == 32);
    CHECK(decoded.height == 32);
    // JPEG is lossy; the blob must still stand clear of the black background.
    CHECK(decoded.at(16, 16)[0] > 150);
    CHECK(decoded.at(1, 1)[0] < 40);
}
