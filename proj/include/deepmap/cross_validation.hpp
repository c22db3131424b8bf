#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "deepmap/feature_maps.hpp"
#include "deepmap/graph.hpp"
#include "deepmap/network.hpp"

namespace deepmap {

// --- Stratified folds ----------------------------------------------------------

struct FoldPlan {
    int k = 0;
    // Test indices per fold, ascending within a fold. Every index appears in
    // exactly one fold.
    std::vector<std::vector<int>> folds;

    std::vector<int> train_indices(int fold) const; // complement, ascending
};

// Splits samples into k folds so that each class's samples are spread as
// evenly as possible: per class (ascending class value) the indices are
// shuffled with a seeded generator and dealt round-robin onto folds, with the
// dealing cursor carried over from one class to the next. The carried cursor
// keeps overall fold sizes balanced too (sizes differ by at most one).
FoldPlan stratified_kfold(const std::vector<int> &labels, int k, std::uint64_t seed);

// --- Cross-validation ----------------------------------------------------------

enum class PipelineKind {
    kernel,  // graph feature maps -> linear classifier on normalized counts
    deepmap, // aligned tensors -> convolutional network
};

const char *pipeline_name(PipelineKind kind);
PipelineKind pipeline_from_name(const std::string &name);

struct CvConfig {
    PipelineKind pipeline = PipelineKind::kernel;
    FeatureKind kind = FeatureKind::wl_subtree;
    FeatureParams params{};
    int folds = 10;
    std::uint64_t seed = 0;
    int threads = 1;

    // deepmap pipeline
    int field_size = 5;
    int width = 0; // 0 -> dataset maximum vertex count
    TrainConfig train{};

    // kernel pipeline
    double logreg_l2 = 1e-4;
    int logreg_epochs = 300;
    double logreg_lr = 1.0;
};

struct CvResult {
    PipelineKind pipeline = PipelineKind::kernel;
    FeatureKind kind = FeatureKind::wl_subtree;
    int folds = 0;

    // Test accuracy per fold; for the deepmap pipeline these are taken at
    // best_epoch. mean/stddev are over folds (population standard deviation).
    std::vector<double> fold_accuracies;
    double mean_accuracy = 0.0;
    double stddev_accuracy = 0.0;

    // deepmap pipeline: mean test accuracy across folds after each epoch
    // (index 0 = epoch 1) and the 1-based epoch with the highest mean
    // (earliest epoch on ties).
    int best_epoch = 0;
    std::vector<double> epoch_mean_accuracy;

    // kernel pipeline: minimum eigenvalue of the whole-dataset Gram matrix of
    // the graph feature maps, and its trace (the PSD tolerance scale).
    bool gram_checked = false;
    double gram_min_eigenvalue = 0.0;
    double gram_trace = 0.0;
};

// Runs stratified k-fold cross-validation. Index structures (label alphabets,
// path keys, subgraph classes) are refitted on each training fold; test
// graphs are mapped through the fitted structures only. Fully deterministic
// for a fixed config.
CvResult cross_validate(const GraphDataset &ds, const CvConfig &config);

// Report writers. Deterministic byte-for-byte for equal inputs; neither
// includes timing.
void write_cv_report_text(std::ostream &out, const CvConfig &config, const CvResult &result);
void write_cv_folds_csv(std::ostream &out, const CvResult &result);
void write_cv_epochs_csv(std::ostream &out, const CvResult &result);

} // namespace deepmap
