#include "plankton/neural.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "plankton/error.hpp"
#include "plankton/rng.hpp"

using json = nlohmann::ordered_json;

namespace plankton::nn {

Activation activation_from_name(const std::string& name) {
    if (name == "relu") return Activation::Relu;
    if (name == "tanh") return Activation::Tanh;
    if (name == "softplus") return Activation::Softplus;
    throw Error(ErrorCode::BadConfig, "unknown activation: " + name);
}

const char* activation_name(Activation activation) {
    switch (activation) {
        case Activation::Relu: return "relu";
        case Activation::Tanh: return "tanh";
        case Activation::Softplus: return "softplus";
    }
    return "relu";
}

std::size_t MlpModel::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        n += weights[l].data.size() + biases[l].size();
    }
    return n;
}

void TrainingConfig::validate() const {
    if (learning_rate <= 0) throw Error(ErrorCode::BadConfig, "learning_rate must be > 0");
    if (beta1 <= 0 || beta1 >= 1 || beta2 <= 0 || beta2 >= 1) {
        throw Error(ErrorCode::BadConfig, "adam betas must lie in (0, 1)");
    }
    if (epochs < 1) throw Error(ErrorCode::BadConfig, "epochs must be >= 1");
    if (patience < 1 || patience > epochs) {
        throw Error(ErrorCode::BadConfig, "patience must lie in [1, epochs]");
    }
    if (batch_size < 1) throw Error(ErrorCode::BadConfig, "batch_size must be >= 1");
    if (finetune_epochs < 0) throw Error(ErrorCode::BadConfig, "finetune_epochs must be >= 0");
    if (finetune_epochs > 0 && finetune_lr <= 0) {
        throw Error(ErrorCode::BadConfig, "finetune_lr must be > 0");
    }
}

ClassWeights class_weights(const std::vector<std::size_t>& counts) {
    std::size_t total = 0;
    for (std::size_t c : counts) {
        if (c == 0) throw Error(ErrorCode::BadConfig, "class count of zero");
        total += c;
    }
    ClassWeights weights;
    weights.values.reserve(counts.size());
    const double n = static_cast<double>(total);
    const double c = static_cast<double>(counts.size());
    for (std::size_t count : counts) {
        weights.values.push_back(n / (c * static_cast<double>(count)));
    }
    return weights;
}

MlpModel init_glorot(const std::vector<std::size_t>& dims,
                     const std::vector<Activation>& activations,
                     const std::vector<double>& dropout_rates, std::uint64_t seed) {
    if (dims.size() < 2) throw Error(ErrorCode::BadConfig, "need at least input and output dims");
    const std::size_t hidden = dims.size() - 2;
    if (activations.size() != hidden || dropout_rates.size() != hidden) {
        throw Error(ErrorCode::BadConfig, "one activation and dropout rate per hidden layer");
    }
    for (double rate : dropout_rates) {
        if (rate < 0 || rate >= 1) throw Error(ErrorCode::BadConfig, "dropout rate outside [0, 1)");
    }

    MlpModel model;
    model.layer_dims = dims;
    model.activations = activations;
    model.dropout_rates = dropout_rates;
    model.seed = seed;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const std::size_t n_in = dims[l];
        const std::size_t n_out = dims[l + 1];
        const double a = std::sqrt(6.0 / static_cast<double>(n_in + n_out));
        Matrix w(n_out, n_in);
        for (double& value : w.data) value = rng.next_in(-a, a);
        model.weights.push_back(std::move(w));
        model.biases.emplace_back(n_out, 0.0);
    }
    return model;
}

namespace {

inline double apply_activation(Activation activation, double z) {
    switch (activation) {
        case Activation::Relu: return z > 0 ? z : 0.0;
        case Activation::Tanh: return std::tanh(z);
        case Activation::Softplus:
            // log(1 + e^z), stable on both tails
            return z > 30 ? z : std::log1p(std::exp(z));
    }
    return z;
}

inline double activation_derivative(Activation activation, double z) {
    switch (activation) {
        case Activation::Relu: return z > 0 ? 1.0 : 0.0;
        case Activation::Tanh: {
            double t = std::tanh(z);
            return 1.0 - t * t;
        }
        case Activation::Softplus: return 1.0 / (1.0 + std::exp(-z));
    }
    return 1.0;
}

// z = x * W^T + b
void affine_forward(const Matrix& x, const Matrix& w, const std::vector<double>& b, Matrix& z) {
    const std::size_t n = x.rows, n_in = x.cols, n_out = w.rows;
    z = Matrix(n, n_out);
    for (std::size_t r = 0; r < n; ++r) {
        const double* xin = x.row(r);
        double* zout = z.row(r);
        for (std::size_t o = 0; o < n_out; ++o) {
            const double* wrow = w.row(o);
            double acc = b[o];
            for (std::size_t i = 0; i < n_in; ++i) acc += wrow[i] * xin[i];
            zout[o] = acc;
        }
    }
}

void softmax_rows(const Matrix& logits, Matrix& probs) {
    probs = Matrix(logits.rows, logits.cols);
    for (std::size_t r = 0; r < logits.rows; ++r) {
        const double* in = logits.row(r);
        double* out = probs.row(r);
        double peak = in[0];
        for (std::size_t c = 1; c < logits.cols; ++c) peak = std::max(peak, in[c]);
        double sum = 0;
        for (std::size_t c = 0; c < logits.cols; ++c) {
            out[c] = std::exp(in[c] - peak);
            sum += out[c];
        }
        for (std::size_t c = 0; c < logits.cols; ++c) out[c] /= sum;
    }
}

struct ForwardCache {
    std::vector<Matrix> pre;    // z per layer
    std::vector<Matrix> post;   // activation (after dropout in train mode)
    std::vector<Matrix> masks;  // dropout keep/scale factors, train mode only
    Matrix probs;
};

void forward_cached(const MlpModel& model, const Matrix& batch, bool training, Rng* dropout_rng,
                    ForwardCache& cache) {
    if (batch.cols != model.input_dim()) {
        throw Error(ErrorCode::ShapeMismatch,
                    "batch width " + std::to_string(batch.cols) + " != input dim " +
                        std::to_string(model.input_dim()));
    }
    const std::size_t n_layers = model.layer_count();
    cache.pre.resize(n_layers);
    cache.post.assign(n_layers, Matrix());
    cache.masks.assign(n_layers, Matrix());

    const Matrix* input = &batch;
    for (std::size_t l = 0; l < n_layers; ++l) {
        affine_forward(*input, model.weights[l], model.biases[l], cache.pre[l]);
        if (l + 1 == n_layers) break;  // output layer feeds softmax directly
        Matrix& act = cache.post[l];
        act = Matrix(cache.pre[l].rows, cache.pre[l].cols);
        for (std::size_t i = 0; i < act.data.size(); ++i) {
            act.data[i] = apply_activation(model.activations[l], cache.pre[l].data[i]);
        }
        const double rate = model.dropout_rates[l];
        if (training && rate > 0) {
            // Inverted dropout: kept units scaled by 1/(1-rate) so eval
            // needs no rescaling.
            Matrix& mask = cache.masks[l];
            mask = Matrix(act.rows, act.cols);
            const double keep_scale = 1.0 / (1.0 - rate);
            for (std::size_t i = 0; i < mask.data.size(); ++i) {
                mask.data[i] = dropout_rng->next_unit() >= rate ? keep_scale : 0.0;
                act.data[i] *= mask.data[i];
            }
        }
        input = &act;
    }
    softmax_rows(cache.pre[n_layers - 1], cache.probs);
}

double mean_loss(const Matrix& probs, const std::vector<std::size_t>& labels,
                 const ClassWeights* weights) {
    double total = 0;
    for (std::size_t r = 0; r < probs.rows; ++r) {
        double p = std::max(probs.at(r, labels[r]), 1e-12);
        double w = weights ? weights->values[labels[r]] : 1.0;
        total += -w * std::log(p);
    }
    return total / static_cast<double>(probs.rows);
}

// Shared backward pass; cache must come from a forward over the same batch.
double backward(const MlpModel& model, const Matrix& batch,
                const std::vector<std::size_t>& labels, const ClassWeights* weights,
                const ForwardCache& cache, Gradients& grads) {
    const std::size_t n_layers = model.layer_count();
    const std::size_t n = batch.rows;

    grads.weights.resize(n_layers);
    grads.biases.resize(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        grads.weights[l] = Matrix(model.weights[l].rows, model.weights[l].cols);
        grads.biases[l].assign(model.biases[l].size(), 0.0);
    }

    // softmax + cross-entropy: dL/dz = w_label/n * (p - onehot)
    Matrix delta(n, model.output_dim());
    for (std::size_t r = 0; r < n; ++r) {
        const double w = (weights ? weights->values[labels[r]] : 1.0) / static_cast<double>(n);
        const double* p = cache.probs.row(r);
        double* d = delta.row(r);
        for (std::size_t c = 0; c < delta.cols; ++c) d[c] = w * p[c];
        d[labels[r]] -= w;
    }

    for (std::size_t l = n_layers; l-- > 0;) {
        const Matrix& input = (l == 0) ? batch : cache.post[l - 1];
        Matrix& dw = grads.weights[l];
        std::vector<double>& db = grads.biases[l];
        for (std::size_t r = 0; r < n; ++r) {
            const double* d = delta.row(r);
            const double* xin = input.row(r);
            for (std::size_t o = 0; o < dw.rows; ++o) {
                if (d[o] == 0) continue;
                double* dwrow = dw.row(o);
                for (std::size_t i = 0; i < dw.cols; ++i) dwrow[i] += d[o] * xin[i];
                db[o] += d[o];
            }
        }
        if (l == 0) break;

        Matrix next_delta(n, model.layer_dims[l]);
        const Matrix& w = model.weights[l];
        for (std::size_t r = 0; r < n; ++r) {
            const double* d = delta.row(r);
            double* nd = next_delta.row(r);
            for (std::size_t o = 0; o < w.rows; ++o) {
                if (d[o] == 0) continue;
                const double* wrow = w.row(o);
                for (std::size_t i = 0; i < w.cols; ++i) nd[i] += d[o] * wrow[i];
            }
            const double* z = cache.pre[l - 1].row(r);
            const Matrix& mask = cache.masks[l - 1];
            const double* m = mask.data.empty() ? nullptr : mask.row(r);
            for (std::size_t i = 0; i < next_delta.cols; ++i) {
                if (m) nd[i] *= m[i];
                nd[i] *= activation_derivative(model.activations[l - 1], z[i]);
            }
        }
        delta = std::move(next_delta);
    }
    return mean_loss(cache.probs, labels, weights);
}

}  // namespace

ForwardOutput forward(const MlpModel& model, const Matrix& batch, bool training,
                      std::uint64_t dropout_seed) {
    Rng rng(dropout_seed);
    ForwardCache cache;
    forward_cached(model, batch, training, training ? &rng : nullptr, cache);
    ForwardOutput out;
    out.logits = std::move(cache.pre.back());
    out.probs = std::move(cache.probs);
    return out;
}

double loss_ce(const Matrix& probs, const std::vector<std::size_t>& labels,
               const ClassWeights* weights) {
    if (probs.rows != labels.size()) {
        throw Error(ErrorCode::ShapeMismatch, "probs and labels disagree on batch size");
    }
    return mean_loss(probs, labels, weights);
}

double compute_gradients(const MlpModel& model, const Matrix& batch,
                         const std::vector<std::size_t>& labels, const ClassWeights* weights,
                         Gradients& out) {
    ForwardCache cache;
    forward_cached(model, batch, false, nullptr, cache);
    return backward(model, batch, labels, weights, cache, out);
}

AdamState AdamState::for_model(const MlpModel& model) {
    AdamState state;
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        state.m_w.emplace_back(model.weights[l].rows, model.weights[l].cols);
        state.v_w.emplace_back(model.weights[l].rows, model.weights[l].cols);
        state.m_b.emplace_back(model.biases[l].size(), 0.0);
        state.v_b.emplace_back(model.biases[l].size(), 0.0);
    }
    return state;
}

void adam_step(MlpModel& model, const Gradients& grads, AdamState& state, double learning_rate,
               double beta1, double beta2, double epsilon) {
    state.step += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    auto update = [&](double& param, double grad, double& m, double& v) {
        m = beta1 * m + (1 - beta1) * grad;
        v = beta2 * v + (1 - beta2) * grad * grad;
        const double m_hat = m / bc1;
        const double v_hat = v / bc2;
        param -= learning_rate * m_hat / (std::sqrt(v_hat) + epsilon);
    };
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        Matrix& w = model.weights[l];
        for (std::size_t i = 0; i < w.data.size(); ++i) {
            update(w.data[i], grads.weights[l].data[i], state.m_w[l].data[i],
                   state.v_w[l].data[i]);
        }
        for (std::size_t i = 0; i < model.biases[l].size(); ++i) {
            update(model.biases[l][i], grads.biases[l][i], state.m_b[l][i], state.v_b[l][i]);
        }
    }
}

namespace {

double accuracy_of(const Matrix& probs, const std::vector<std::size_t>& labels) {
    if (probs.rows == 0) return 0;
    std::size_t hits = 0;
    for (std::size_t r = 0; r < probs.rows; ++r) {
        const double* p = probs.row(r);
        std::size_t best = 0;
        for (std::size_t c = 1; c < probs.cols; ++c) {
            if (p[c] > p[best]) best = c;
        }
        if (best == labels[r]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(probs.rows);
}

Matrix gather_rows(const Matrix& source, const std::vector<std::size_t>& order,
                   std::size_t begin, std::size_t end) {
    Matrix out(end - begin, source.cols);
    for (std::size_t i = begin; i < end; ++i) {
        const double* src = source.row(order[i]);
        std::copy(src, src + source.cols, out.row(i - begin));
    }
    return out;
}

struct Phase {
    int max_epochs;
    double learning_rate;
    bool early_stop;
};

void run_phase(MlpModel& model, const Matrix& train_x, const std::vector<std::size_t>& train_y,
               const Matrix& val_x, const std::vector<std::size_t>& val_y,
               const TrainingConfig& config, const ClassWeights* weights, const Phase& phase,
               Rng& rng, MlpModel& best, double& best_val_loss, int& best_epoch,
               TrainHistory* history, int epoch_offset) {
    AdamState adam = AdamState::for_model(model);
    std::vector<std::size_t> order(train_x.rows);
    std::iota(order.begin(), order.end(), 0);

    int epochs_since_improvement = 0;
    for (int epoch = 0; epoch < phase.max_epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0;
        std::size_t hit_sum = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            Matrix batch = gather_rows(train_x, order, start, stop);
            std::vector<std::size_t> batch_y(stop - start);
            for (std::size_t i = start; i < stop; ++i) batch_y[i - start] = train_y[order[i]];

            ForwardCache cache;
            forward_cached(model, batch, true, &rng, cache);
            Gradients grads;
            double batch_loss = backward(model, batch, batch_y, weights, cache, grads);
            adam_step(model, grads, adam, phase.learning_rate, config.beta1, config.beta2,
                      config.adam_epsilon);

            loss_sum += batch_loss * static_cast<double>(batch.rows);
            for (std::size_t r = 0; r < cache.probs.rows; ++r) {
                const double* p = cache.probs.row(r);
                std::size_t best_c = 0;
                for (std::size_t c = 1; c < cache.probs.cols; ++c) {
                    if (p[c] > p[best_c]) best_c = c;
                }
                if (best_c == batch_y[r]) ++hit_sum;
            }
        }

        ForwardOutput val_out = forward(model, val_x, false);
        // Early stopping monitors the plain (unweighted) validation loss.
        const double val_loss = loss_ce(val_out.probs, val_y, nullptr);

        if (history) {
            EpochStats stats;
            stats.train_loss = loss_sum / static_cast<double>(train_x.rows);
            stats.train_accuracy =
                static_cast<double>(hit_sum) / static_cast<double>(train_x.rows);
            stats.val_loss = val_loss;
            stats.val_accuracy = accuracy_of(val_out.probs, val_y);
            history->epochs.push_back(stats);
        }

        if (val_loss < best_val_loss) {
            best_val_loss = val_loss;
            best = model;
            best_epoch = epoch_offset + epoch;
            epochs_since_improvement = 0;
        } else {
            ++epochs_since_improvement;
        }
        if (phase.early_stop && epochs_since_improvement >= config.patience) break;
    }
}

}  // namespace

MlpModel train(const MlpModel& init, const Matrix& train_x,
               const std::vector<std::size_t>& train_y, const Matrix& val_x,
               const std::vector<std::size_t>& val_y, const TrainingConfig& config,
               TrainHistory* history) {
    config.validate();
    if (train_x.rows == 0) throw Error(ErrorCode::EmptySplit, "empty training split");
    if (val_x.rows == 0) throw Error(ErrorCode::EmptyVal, "empty validation split");
    if (train_x.rows != train_y.size() || val_x.rows != val_y.size()) {
        throw Error(ErrorCode::ShapeMismatch, "features and labels disagree");
    }

    ClassWeights weights;
    if (config.class_weighting) {
        std::vector<std::size_t> counts(init.output_dim(), 0);
        for (std::size_t y : train_y) counts[y] += 1;
        for (std::size_t& c : counts) {
            if (c == 0) c = 1;  // absent classes fall back to weight N/C
        }
        weights = class_weights(counts);
    }
    const ClassWeights* weights_ptr = config.class_weighting ? &weights : nullptr;

    Rng rng(config.seed);
    MlpModel model = init;
    MlpModel best = init;
    double best_val_loss = std::numeric_limits<double>::infinity();
    int best_epoch = -1;

    run_phase(model, train_x, train_y, val_x, val_y, config, weights_ptr,
              {config.epochs, config.learning_rate, true}, rng, best, best_val_loss, best_epoch,
              history, 0);
    if (history) history->phase1_epochs = static_cast<int>(history->epochs.size());

    if (config.finetune_epochs > 0) {
        model = best;  // resume from the kept snapshot
        run_phase(model, train_x, train_y, val_x, val_y, config, weights_ptr,
                  {config.finetune_epochs, config.finetune_lr, false}, rng, best, best_val_loss,
                  best_epoch, history, history ? history->phase1_epochs : config.epochs);
    }

    if (history) {
        history->best_epoch = best_epoch;
        history->best_val_loss = best_val_loss;
    }
    return best;
}

ConfidenceMatrix predict(const MlpModel& model, const Matrix& features,
                         const std::vector<std::string>& ids,
                         const std::vector<std::string>& labels) {
    if (features.rows != ids.size()) {
        throw Error(ErrorCode::ShapeMismatch, "feature rows and ids disagree");
    }
    ForwardOutput out = forward(model, features, false);
    ConfidenceMatrix confidences;
    confidences.ids = ids;
    confidences.labels = labels;
    confidences.class_names = model.class_names;
    if (confidences.class_names.empty()) {
        for (std::size_t c = 0; c < model.output_dim(); ++c) {
            confidences.class_names.push_back("class_" + std::to_string(c));
        }
    }
    confidences.rows.reserve(features.rows);
    for (std::size_t r = 0; r < out.probs.rows; ++r) {
        confidences.rows.emplace_back(out.probs.row(r), out.probs.row(r) + out.probs.cols);
    }
    return confidences;
}

double grad_check(const MlpModel& model, const Matrix& batch,
                  const std::vector<std::size_t>& labels, double tolerance,
                  std::size_t max_params, std::uint64_t sample_seed) {
    Gradients analytic;
    compute_gradients(model, batch, labels, nullptr, analytic);

    const std::size_t total = model.parameter_count();
    std::vector<std::size_t> picks;
    if (total <= max_params) {
        picks.resize(total);
        std::iota(picks.begin(), picks.end(), 0);
    } else {
        Rng rng(sample_seed);
        std::vector<std::size_t> all(total);
        std::iota(all.begin(), all.end(), 0);
        rng.shuffle(all);
        picks.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(max_params));
    }

    // Flat index -> (layer, weight-or-bias, offset)
    auto param_ref = [&](MlpModel& m, std::size_t flat) -> double* {
        for (std::size_t l = 0; l < m.layer_count(); ++l) {
            if (flat < m.weights[l].data.size()) return &m.weights[l].data[flat];
            flat -= m.weights[l].data.size();
            if (flat < m.biases[l].size()) return &m.biases[l][flat];
            flat -= m.biases[l].size();
        }
        return nullptr;
    };
    auto grad_ref = [&](std::size_t flat) -> double {
        for (std::size_t l = 0; l < analytic.weights.size(); ++l) {
            if (flat < analytic.weights[l].data.size()) return analytic.weights[l].data[flat];
            flat -= analytic.weights[l].data.size();
            if (flat < analytic.biases[l].size()) return analytic.biases[l][flat];
            flat -= analytic.biases[l].size();
        }
        return 0;
    };

    const double h = 1e-5;
    double worst = 0;
    MlpModel probe = model;
    for (std::size_t flat : picks) {
        double* param = param_ref(probe, flat);
        const double saved = *param;
        *param = saved + h;
        double loss_plus = loss_ce(forward(probe, batch, false).probs, labels, nullptr);
        *param = saved - h;
        double loss_minus = loss_ce(forward(probe, batch, false).probs, labels, nullptr);
        *param = saved;

        const double numeric = (loss_plus - loss_minus) / (2 * h);
        const double analytic_value = grad_ref(flat);
        const double scale = std::max({std::abs(numeric), std::abs(analytic_value), 1e-8});
        worst = std::max(worst, std::abs(numeric - analytic_value) / scale);
    }
    if (worst > tolerance) {
        throw Error(ErrorCode::GradCheckFailed,
                    "max relative error " + std::to_string(worst) + " > tolerance");
    }
    return worst;
}

GridOutcome grid_search(const std::vector<GridCandidate>& candidates, const Matrix& train_x,
                        const std::vector<std::size_t>& train_y, const Matrix& val_x,
                        const std::vector<std::size_t>& val_y, std::size_t n_classes,
                        const TrainingConfig& config) {
    if (candidates.empty()) throw Error(ErrorCode::BadConfig, "grid search needs candidates");
    GridOutcome outcome;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const GridCandidate& candidate = candidates[i];
        std::vector<std::size_t> dims;
        dims.push_back(train_x.cols);
        dims.insert(dims.end(), candidate.hidden_dims.begin(), candidate.hidden_dims.end());
        dims.push_back(n_classes);

        TrainingConfig local = config;
        local.learning_rate = candidate.learning_rate;
        MlpModel init =
            init_glorot(dims, candidate.activations, candidate.dropout_rates, config.seed);
        TrainHistory history;
        train(init, train_x, train_y, val_x, val_y, local, &history);
        outcome.val_losses.push_back(history.best_val_loss);
        if (history.best_val_loss < best) {
            best = history.best_val_loss;
            outcome.best_index = i;
        }
    }
    return outcome;
}

void save_model(const MlpModel& model, const TrainingConfig& config, const std::string& path) {
    json doc;
    doc["layer_dims"] = model.layer_dims;
    json activations = json::array();
    for (Activation a : model.activations) activations.push_back(activation_name(a));
    doc["activations"] = activations;
    doc["dropout_rates"] = model.dropout_rates;
    doc["seed"] = model.seed;
    doc["class_names"] = model.class_names;
    doc["standardizer"] = model.standardizer_ref;
    doc["config"] = {
        {"learning_rate", config.learning_rate},
        {"beta1", config.beta1},
        {"beta2", config.beta2},
        {"adam_epsilon", config.adam_epsilon},
        {"epochs", config.epochs},
        {"patience", config.patience},
        {"batch_size", config.batch_size},
        {"seed", config.seed},
        {"class_weighting", config.class_weighting},
        {"finetune_epochs", config.finetune_epochs},
        {"finetune_lr", config.finetune_lr},
    };
    json weights = json::array();
    json biases = json::array();
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        weights.push_back(model.weights[l].data);
        biases.push_back(model.biases[l]);
    }
    doc["weights"] = std::move(weights);
    doc["biases"] = std::move(biases);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);
    out << doc.dump() << '\n';
}

MlpModel load_model(const std::string& path, TrainingConfig* config) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
    json doc = json::parse(in);

    MlpModel model;
    model.layer_dims = doc.at("layer_dims").get<std::vector<std::size_t>>();
    for (const auto& name : doc.at("activations")) {
        model.activations.push_back(activation_from_name(name.get<std::string>()));
    }
    model.dropout_rates = doc.at("dropout_rates").get<std::vector<double>>();
    model.seed = doc.at("seed").get<std::uint64_t>();
    model.class_names = doc.at("class_names").get<std::vector<std::string>>();
    model.standardizer_ref = doc.at("standardizer").get<std::string>();

    const auto& weights = doc.at("weights");
    const auto& biases = doc.at("biases");
    for (std::size_t l = 0; l + 1 < model.layer_dims.size(); ++l) {
        Matrix w(model.layer_dims[l + 1], model.layer_dims[l]);
        w.data = weights.at(l).get<std::vector<double>>();
        if (w.data.size() != w.rows * w.cols) {
            throw Error(ErrorCode::IoFailure, path + ": weight shape mismatch");
        }
        model.weights.push_back(std::move(w));
        model.biases.push_back(biases.at(l).get<std::vector<double>>());
    }

    if (config) {
        const auto& c = doc.at("config");
        config->learning_rate = c.at("learning_rate").get<double>();
        config->beta1 = c.at("beta1").get<double>();
        config->beta2 = c.at("beta2").get<double>();
        config->adam_epsilon = c.at("adam_epsilon").get<double>();
        config->epochs = c.at("epochs").get<int>();
        config->patience = c.at("patience").get<int>();
        config->batch_size = c.at("batch_size").get<int>();
        config->seed = c.at("seed").get<std::uint64_t>();
        config->class_weighting = c.at("class_weighting").get<bool>();
        config->finetune_epochs = c.at("finetune_epochs").get<int>();
        config->finetune_lr = c.at("finetune_lr").get<double>();
    }
    return model;
}

}  // namespace plankton::nn
