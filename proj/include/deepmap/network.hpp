#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "deepmap/alignment.hpp"

namespace deepmap {

struct ModelConfig {
    int input_dim = 0;    // m
    int field_size = 1;   // r
    int sequence_len = 1; // w
    std::array<int, 3> conv_channels{32, 16, 8};
    int dense_units = 128;
    double dropout_rate = 0.5;
    int class_count = 2;

    // conv1 flattens each receptive-field block of r rows into one vector
    int conv1_inputs() const { return field_size * input_dim; }
};

// Fully-connected view of the architecture: conv1 has kernel length r and
// stride r (one output position per receptive field), conv2/conv3 have kernel
// length 1, all followed by ReLU; a summation readout pools the w positions;
// then dense + ReLU, inverted dropout, dense to logits.
struct Model {
    ModelConfig config;
    // weights are row-major [input][output]; declaration order is the
    // serialization and optimizer-state order
    std::vector<double> conv1_w, conv1_b;
    std::vector<double> conv2_w, conv2_b;
    std::vector<double> conv3_w, conv3_b;
    std::vector<double> dense1_w, dense1_b;
    std::vector<double> dense2_w, dense2_b;
    // dropout RNG state: masks are drawn from a (seed, counter)-keyed stream
    std::uint64_t dropout_seed = 0;
    std::uint64_t dropout_counter = 0;

    static constexpr int group_count = 10;
    static const std::array<const char *, group_count> group_names;
    std::array<std::vector<double> *, group_count> param_groups();
    std::array<const std::vector<double> *, group_count> param_groups() const;
    std::size_t parameter_count() const;
};

// Glorot-uniform weights in ±sqrt(6 / (fan_in + fan_out)), zero biases.
// `random_biases` draws biases from the same ranges as their weight tensors
// instead — used by the gradient check to keep ReLU inputs off the kink.
Model init_model(const ModelConfig &config, std::uint64_t seed, bool random_biases = false);

struct TrainConfig {
    double learning_rate = 0.01;
    double decay_factor = 0.5;
    int patience = 5;
    int batch_size = 32;
    int max_epochs = 100;
    double rmsprop_rho = 0.9;
    double rmsprop_eps = 1e-8;
    std::uint64_t seed = 0;
};

struct Batch {
    const AlignedTensor *tensor = nullptr;
    std::vector<int> indices;
};

struct ForwardCache; // internal

struct ForwardResult {
    std::vector<double> logits; // batch x class_count, row-major
    std::shared_ptr<ForwardCache> cache;
};

// In train_mode a fresh dropout mask is drawn (advancing model.dropout_counter);
// eval mode applies no dropout and leaves the model untouched.
ForwardResult forward(Model &model, const Batch &batch, bool train_mode);

struct Gradients {
    std::array<std::vector<double>, Model::group_count> groups;
};

struct LossResult {
    double loss = 0.0;            // mean cross-entropy over the batch
    double accuracy = 0.0;        // argmax accuracy over the batch
    std::vector<double> logits;   // batch x class_count
};

// Softmax cross-entropy averaged over the batch plus full backpropagation;
// the summation layer's backward broadcasts its incoming gradient to all w
// positions, and the dropout mask is reused exactly from the forward pass.
// Gradients are accumulated into `grads` (resized/zeroed internally).
LossResult loss_and_gradients(Model &model, const Batch &batch, const std::vector<int> &targets,
                              bool train_mode, Gradients &grads);

struct RmspropState {
    std::array<std::vector<double>, Model::group_count> accumulators;
};

// a <- rho * a + (1 - rho) * g^2;  p <- p - lr * g / (sqrt(a) + eps).
// Throws TrainingError (before touching any parameter) on non-finite
// gradients.
void rmsprop_step(Model &model, const Gradients &grads, RmspropState &state, double lr,
                  double rho, double eps);

// Plateau rule: an epoch improves when its training loss is strictly below
// the best seen; after `patience` consecutive non-improving epochs the
// learning rate is multiplied by decay_factor (and the counter resets).
class PlateauScheduler {
  public:
    PlateauScheduler(double initial_lr, double decay_factor, int patience);
    // called once per epoch with its training loss; returns the lr after the
    // end-of-epoch adjustment
    double update(double epoch_loss);
    double lr() const { return lr_; }

  private:
    double lr_, decay_;
    int patience_, stale_ = 0;
    double best_;
};

struct EpochStats {
    int epoch = 0;
    double loss = 0.0;
    double accuracy = 0.0;
    double lr = 0.0; // after the end-of-epoch plateau adjustment
};

using EpochCallback = std::function<void(int epoch, Model &model)>;

// Seeded mini-batch training; bit-reproducible for a fixed seed. The optional
// callback runs after each epoch's updates (used for per-epoch evaluation).
std::vector<EpochStats> train(Model &model, const AlignedTensor &tensor,
                              const std::vector<int> &labels, const TrainConfig &config,
                              const EpochCallback &on_epoch_end = {});

struct Prediction {
    std::vector<int> classes;
    std::vector<double> probabilities; // n x class_count, rows sum to 1
};

Prediction predict(Model &model, const AlignedTensor &tensor);

double accuracy_of(const std::vector<int> &predicted, const std::vector<int> &expected);

// --- Gradient verification ---------------------------------------------------

struct GradCheckReport {
    std::array<double, Model::group_count> max_relative_error{};
    double overall_max = 0.0;
    bool passed = false;
};

// Compares analytic gradients against central finite differences for every
// parameter group on a random batch (dropout off, double precision).
// `corrupt_group` >= 0 perturbs that group's analytic gradient by 1% first —
// a negative control proving the check can fail. `zero_input` replaces the
// random batch with all-zero rows to exercise the dead-ReLU edge.
// Requires parameter_count() <= 5000.
GradCheckReport grad_check(const ModelConfig &config, std::uint64_t seed, double tolerance,
                           int corrupt_group = -1, bool zero_input = false, double step = 1e-5);

// --- Serialization -----------------------------------------------------------

// Versioned binary checkpoint: magic, version, config, dropout RNG state,
// then parameter tensors in declaration order as 64-bit little-endian floats.
void save_model(std::ostream &out, const Model &model);
Model load_model(std::istream &in);

// CSV history: header "epoch,loss,accuracy,lr", one row per epoch.
void write_history_csv(std::ostream &out, const std::vector<EpochStats> &history);

} // namespace deepmap
