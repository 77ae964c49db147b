#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "plankton/runconfig.hpp"

namespace plankton::cli {

// Subcommand bodies, shared between the CLI binary and the integration
// tests. Each writes exactly its declared artifacts under config.work_dir
// (plus a .provenance.json sidecar per artifact) and removes partial outputs
// on failure.

// work_dir/manifest.json
std::string cmd_split(const RunConfig& config);

// work_dir/features.csv + work_dir/features.standardizer.json
std::string cmd_extract(const RunConfig& config, int jobs);

// work_dir/models/mlp_seed<seed>.json plus per-seed val/test confidence CSVs
// under work_dir/confidences/. With use_grid, the config's candidate grid is
// searched first and the winning layout/learning rate trains the seeds.
std::vector<std::string> cmd_train(const RunConfig& config,
                                   const std::vector<std::uint64_t>& seeds, int jobs,
                                   bool use_grid = false);

// Confidence CSV for one model over one split (train|val|test).
std::string cmd_predict(const RunConfig& config, const std::string& model_path,
                        const std::string& split);

struct EnsembleArgs {
    std::string method;                      // empty -> config.ensemble_method
    std::vector<std::string> test_members;   // empty -> discover *_test.csv
    std::vector<std::string> val_members;    // empty -> derive from test names
    std::size_t best_n = 0;                  // 0 -> use all members
};

// work_dir/ensembles/<method>_test.csv (+ stack model JSON for stacking)
// plus an ensemble spec JSON describing members and selection.
std::vector<std::string> cmd_ensemble(const RunConfig& config, const EnsembleArgs& args);

// work_dir/metrics/<name>.json and <name>_per_class.csv
std::string cmd_evaluate(const RunConfig& config, const std::string& confidences_path,
                         const std::string& name);

// Per-class F1 SVG chart from a metrics JSON.
std::string cmd_report(const RunConfig& config, const std::string& metrics_path,
                       const std::string& name);

}  // namespace plankton::cli
