#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "plankton/confidence.hpp"

namespace plankton::nn {

// Row-major dense matrix, double precision throughout.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double* row(std::size_t r) { return data.data() + r * cols; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }
    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

enum class Activation { Relu, Tanh, Softplus };

Activation activation_from_name(const std::string& name);
const char* activation_name(Activation activation);

struct MlpModel {
    std::vector<std::size_t> layer_dims;  // input, hidden..., output
    std::vector<Matrix> weights;          // per layer, n_out x n_in
    std::vector<std::vector<double>> biases;
    std::vector<Activation> activations;  // one per hidden layer
    std::vector<double> dropout_rates;    // one per hidden layer
    std::uint64_t seed = 0;
    std::vector<std::string> class_names;
    std::string standardizer_ref;

    std::size_t layer_count() const { return weights.size(); }
    std::size_t input_dim() const { return layer_dims.front(); }
    std::size_t output_dim() const { return layer_dims.back(); }
    std::size_t parameter_count() const;
};

struct TrainingConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    int epochs = 200;
    int patience = 50;
    int batch_size = 64;
    std::uint64_t seed = 0;
    bool class_weighting = false;
    int finetune_epochs = 400;
    double finetune_lr = 1e-7;

    void validate() const;  // throws BadConfig
};

struct ClassWeights {
    std::vector<double> values;
};

// Balanced reweighting: w_c = N / (C * N_c).
ClassWeights class_weights(const std::vector<std::size_t>& counts);

// Weights uniform in [-a, a] with a = sqrt(6 / (n_in + n_out)); biases zero.
MlpModel init_glorot(const std::vector<std::size_t>& dims,
                     const std::vector<Activation>& activations,
                     const std::vector<double>& dropout_rates, std::uint64_t seed);

struct ForwardOutput {
    Matrix logits;
    Matrix probs;
};

// Train mode applies inverted dropout driven by dropout_seed; eval mode is
// deterministic and scale-free.
ForwardOutput forward(const MlpModel& model, const Matrix& batch, bool training,
                      std::uint64_t dropout_seed = 0);

// Mean over the batch of -w_label * log(p_label), p clamped at 1e-12.
double loss_ce(const Matrix& probs, const std::vector<std::size_t>& labels,
               const ClassWeights* weights = nullptr);

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
};

// Backprop through softmax + cross-entropy, eval-mode (no dropout).
// Returns the loss for the batch.
double compute_gradients(const MlpModel& model, const Matrix& batch,
                         const std::vector<std::size_t>& labels, const ClassWeights* weights,
                         Gradients& out);

struct AdamState {
    std::vector<Matrix> m_w, v_w;
    std::vector<std::vector<double>> m_b, v_b;
    long step = 0;

    static AdamState for_model(const MlpModel& model);
};

void adam_step(MlpModel& model, const Gradients& grads, AdamState& state, double learning_rate,
               double beta1, double beta2, double epsilon);

struct EpochStats {
    double train_loss = 0;
    double train_accuracy = 0;
    double val_loss = 0;
    double val_accuracy = 0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;       // phase 1 then phase 2
    int phase1_epochs = 0;
    int best_epoch = -1;                  // index into `epochs` of the kept snapshot
    double best_val_loss = 0;
};

// Two-phase schedule: up to config.epochs with early stopping on validation
// loss (patience window, lowest-loss snapshot kept), then finetune_epochs at
// finetune_lr from the kept snapshot, again keeping the best snapshot.
MlpModel train(const MlpModel& init, const Matrix& train_x,
               const std::vector<std::size_t>& train_y, const Matrix& val_x,
               const std::vector<std::size_t>& val_y, const TrainingConfig& config,
               TrainHistory* history = nullptr);

// Eval-mode forward over standardized features.
ConfidenceMatrix predict(const MlpModel& model, const Matrix& features,
                         const std::vector<std::string>& ids,
                         const std::vector<std::string>& labels);

// Backprop vs central finite differences (h = 1e-5) on up to `max_params`
// deterministically sampled parameters. Returns the max relative error;
// throws GradCheckFailed above tolerance.
double grad_check(const MlpModel& model, const Matrix& batch,
                  const std::vector<std::size_t>& labels, double tolerance,
                  std::size_t max_params = 200, std::uint64_t sample_seed = 1);

// Deterministic replacement for a hyperparameter search: trains every
// candidate with the same seed and budget, ranks by best validation loss
// (ties to the earlier candidate).
struct GridCandidate {
    std::vector<std::size_t> hidden_dims;
    std::vector<Activation> activations;
    std::vector<double> dropout_rates;
    double learning_rate = 1e-3;
};

struct GridOutcome {
    std::size_t best_index = 0;
    std::vector<double> val_losses;  // one per candidate
};

GridOutcome grid_search(const std::vector<GridCandidate>& candidates, const Matrix& train_x,
                        const std::vector<std::size_t>& train_y, const Matrix& val_x,
                        const std::vector<std::size_t>& val_y, std::size_t n_classes,
                        const TrainingConfig& config);

void save_model(const MlpModel& model, const TrainingConfig& config, const std::string& path);
MlpModel load_model(const std::string& path, TrainingConfig* config = nullptr);

}  // namespace plankton::nn
