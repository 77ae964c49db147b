#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "plankton/imaging.hpp"
#include "plankton/neural.hpp"

namespace plankton {

// Declarative run description; validated up front and hashed into every
// artifact's provenance so outputs are traceable to the exact settings.
struct RunConfig {
    std::string corpus_root;
    std::string work_dir = "work";

    std::uint64_t split_seed = 1;
    std::array<double, 3> ratios{0.70, 0.15, 0.15};

    int threshold = 10;
    std::string resize = "squash";  // squash | pad
    int side = 128;
    AugmentRanges augment;

    double scale_mm_per_px = 1.0;

    nn::TrainingConfig training;
    std::vector<std::size_t> hidden_dims{128, 80, 80};
    std::vector<std::string> activations{"relu", "tanh", "softplus"};
    std::vector<double> dropout_rates{0.3, 0.3, 0.3};

    // Optional deterministic architecture/learning-rate grid for `train
    // --grid`; cross product of layer layouts and learning rates.
    std::vector<std::vector<std::size_t>> grid_hidden_dims;
    std::vector<double> grid_learning_rates;

    std::string ensemble_method = "average";  // average | stack
    std::size_t best_n = 6;
    double stack_lambda = 1e-3;
    int stack_iterations = 2000;

    std::vector<std::size_t> top_k{1, 2};
    std::vector<std::string> exclude;

    void validate() const;  // throws BadConfig
    std::string to_json_string() const;
    std::string hash() const;  // FNV-1a hex of the canonical JSON

    static RunConfig from_json_string(const std::string& text);
    static RunConfig load(const std::string& path);
};

}  // namespace plankton
