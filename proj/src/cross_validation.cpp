#include "deepmap/cross_validation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <utility>

#include "deepmap/alignment.hpp"
#include "deepmap/centrality.hpp"
#include "deepmap/errors.hpp"
#include "deepmap/kernels.hpp"
#include "deepmap/parallel.hpp"
#include "deepmap/rng.hpp"

namespace deepmap {

// --- Stratified folds ----------------------------------------------------------

std::vector<int> FoldPlan::train_indices(int fold) const {
    if (fold < 0 || fold >= k)
        throw ArgumentError("train_indices: fold out of range");
    std::vector<bool> in_test;
    std::size_t total = 0;
    for (const auto &f : folds)
        total += f.size();
    in_test.assign(total, false);
    for (int idx : folds[static_cast<std::size_t>(fold)])
        in_test[static_cast<std::size_t>(idx)] = true;
    std::vector<int> train;
    train.reserve(total - folds[static_cast<std::size_t>(fold)].size());
    for (std::size_t i = 0; i < total; ++i)
        if (!in_test[i])
            train.push_back(static_cast<int>(i));
    return train;
}

FoldPlan stratified_kfold(const std::vector<int> &labels, int k, std::uint64_t seed) {
    const int n = static_cast<int>(labels.size());
    if (k < 2)
        throw ArgumentError("stratified_kfold: need at least 2 folds");
    if (k > n)
        throw ArgumentError("stratified_kfold: more folds than samples");

    std::map<int, std::vector<int>> by_class; // ascending class, ascending index
    for (int i = 0; i < n; ++i)
        by_class[labels[static_cast<std::size_t>(i)]].push_back(i);

    FoldPlan plan;
    plan.k = k;
    plan.folds.assign(static_cast<std::size_t>(k), {});
    auto rng = keyed_rng(seed, 0xf01d);
    int cursor = 0;
    for (auto &[cls, members] : by_class) {
        (void)cls;
        shuffle(members, rng);
        for (int idx : members) {
            plan.folds[static_cast<std::size_t>(cursor)].push_back(idx);
            cursor = (cursor + 1) % k;
        }
    }
    for (auto &fold : plan.folds)
        std::sort(fold.begin(), fold.end());
    return plan;
}

// --- Pipeline names --------------------------------------------------------------

const char *pipeline_name(PipelineKind kind) {
    switch (kind) {
    case PipelineKind::kernel:
        return "kernel";
    case PipelineKind::deepmap:
        return "deepmap";
    }
    throw ArgumentError("pipeline_name: unknown pipeline");
}

PipelineKind pipeline_from_name(const std::string &name) {
    if (name == "kernel")
        return PipelineKind::kernel;
    if (name == "deepmap")
        return PipelineKind::deepmap;
    throw ArgumentError("unknown pipeline '" + name + "' (expected kernel or deepmap)");
}

// --- Shared fold machinery --------------------------------------------------------

namespace {

// Index fitted on the training fold plus vertex features for both sides.
// Test graphs only pass through the fitted structures: unseen refined labels
// become the sentinel 0, unseen path keys and subgraph classes are dropped.
struct FoldFeatures {
    FeatureIndex index;
    std::vector<VertexFeatureMatrix> train; // aligned with train_ids
    std::vector<VertexFeatureMatrix> test;  // aligned with test_ids
};

FoldFeatures fold_features(const GraphDataset &ds, const std::vector<int> &train_ids,
                           const std::vector<int> &test_ids, FeatureKind kind,
                           const FeatureParams &params) {
    FoldFeatures out;
    std::vector<Graph> train_graphs;
    train_graphs.reserve(train_ids.size());
    for (int id : train_ids)
        train_graphs.push_back(ds.graphs[static_cast<std::size_t>(id)]);

    switch (kind) {
    case FeatureKind::wl_subtree: {
        WlRefinement refinement = wl_refine(train_graphs, params.h);
        out.index = build_wl_index(refinement, params);
        out.train.reserve(train_ids.size());
        for (std::size_t p = 0; p < train_ids.size(); ++p) {
            VertexFeatureMatrix vfm = wl_vertex_features(refinement, static_cast<int>(p), out.index);
            vfm.graph_id = train_ids[p];
            out.train.push_back(std::move(vfm));
        }
        out.test.reserve(test_ids.size());
        for (int id : test_ids) {
            auto labels = wl_apply(refinement, ds.graphs[static_cast<std::size_t>(id)]);
            out.test.push_back(wl_vertex_features(labels, id, out.index));
        }
        break;
    }
    case FeatureKind::shortest_path: {
        out.index = build_sp_index(train_graphs, params);
        for (int id : train_ids)
            out.train.push_back(
                sp_vertex_features(ds.graphs[static_cast<std::size_t>(id)], id, out.index));
        for (int id : test_ids)
            out.test.push_back(
                sp_vertex_features(ds.graphs[static_cast<std::size_t>(id)], id, out.index));
        break;
    }
    case FeatureKind::graphlet: {
        // Sampling stays keyed by the dataset-wide graph id so the streams
        // used to fit the index and to extract features coincide.
        out.index = build_gk_index(train_graphs, train_ids, params);
        for (int id : train_ids)
            out.train.push_back(gk_vertex_features(ds.graphs[static_cast<std::size_t>(id)], id,
                                                   params.k, params.q, params.seed, out.index));
        for (int id : test_ids)
            out.test.push_back(gk_vertex_features(ds.graphs[static_cast<std::size_t>(id)], id,
                                                  params.k, params.q, params.seed, out.index));
        break;
    }
    }
    return out;
}

GraphDataset subset_dataset(const GraphDataset &ds, const std::vector<int> &ids) {
    GraphDataset out;
    out.name = ds.name;
    out.class_count = ds.class_count;
    out.graphs.reserve(ids.size());
    out.class_labels.reserve(ids.size());
    for (int id : ids) {
        out.graphs.push_back(ds.graphs[static_cast<std::size_t>(id)]);
        out.class_labels.push_back(ds.class_labels[static_cast<std::size_t>(id)]);
    }
    return out;
}

std::vector<int> subset_labels(const std::vector<int> &labels, const std::vector<int> &ids) {
    std::vector<int> out;
    out.reserve(ids.size());
    for (int id : ids)
        out.push_back(labels[static_cast<std::size_t>(id)]);
    return out;
}

void finish_stats(CvResult &result) {
    const auto &acc = result.fold_accuracies;
    double mean = 0.0;
    for (double a : acc)
        mean += a;
    mean /= static_cast<double>(acc.size());
    double var = 0.0;
    for (double a : acc)
        var += (a - mean) * (a - mean);
    var /= static_cast<double>(acc.size());
    result.mean_accuracy = mean;
    result.stddev_accuracy = std::sqrt(var);
}

std::uint64_t fold_seed(std::uint64_t seed, int fold) {
    return splitmix64(seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(fold + 1));
}

// --- Kernel pipeline ---------------------------------------------------------------

CvResult cv_kernel(const GraphDataset &ds, const CvConfig &config, const FoldPlan &plan) {
    CvResult result;
    result.pipeline = PipelineKind::kernel;
    result.kind = config.kind;
    result.folds = plan.k;

    // Positive-semidefiniteness check of the whole-dataset Gram matrix. This
    // uses an index over all graphs: it validates the kernel itself and does
    // not feed the classifier.
    {
        FeatureIndex index = build_feature_index(ds, config.kind, config.params);
        WlRefinement refinement;
        const WlRefinement *refinement_ptr = nullptr;
        if (config.kind == FeatureKind::wl_subtree) {
            refinement = wl_refine(ds.graphs, config.params.h);
            refinement_ptr = &refinement;
        }
        auto vertex_features = dataset_vertex_features(ds, index, refinement_ptr, config.threads);
        std::vector<std::vector<std::int64_t>> maps;
        maps.reserve(vertex_features.size());
        for (const auto &vfm : vertex_features)
            maps.push_back(graph_feature_map(vfm));
        GramMatrix gram = gram_matrix(maps);
        gram.kind = config.kind;
        gram.params = config.params;
        result.gram_checked = true;
        result.gram_min_eigenvalue = min_eigenvalue(gram);
        result.gram_trace = 0.0;
        for (int i = 0; i < gram.n; ++i)
            result.gram_trace += gram.at(i, i);
    }

    for (int f = 0; f < plan.k; ++f) {
        const std::vector<int> test_ids = plan.folds[static_cast<std::size_t>(f)];
        const std::vector<int> train_ids = plan.train_indices(f);
        FoldFeatures fold = fold_features(ds, train_ids, test_ids, config.kind, config.params);

        auto to_samples = [](const std::vector<VertexFeatureMatrix> &vfms) {
            std::vector<SampleVector> samples;
            samples.reserve(vfms.size());
            for (const auto &vfm : vfms)
                samples.push_back(normalize_sample(to_sample_vector(graph_feature_map(vfm))));
            return samples;
        };
        std::vector<SampleVector> train_x = to_samples(fold.train);
        std::vector<SampleVector> test_x = to_samples(fold.test);
        std::vector<int> train_y = subset_labels(ds.class_labels, train_ids);
        std::vector<int> test_y = subset_labels(ds.class_labels, test_ids);

        LinearModel model = logreg_train(train_x, train_y, ds.class_count, config.logreg_l2,
                                         config.logreg_epochs, config.logreg_lr,
                                         fold_seed(config.seed, f));
        std::vector<int> predicted = logreg_predict(model, test_x);
        int correct = 0;
        for (std::size_t i = 0; i < predicted.size(); ++i)
            if (predicted[i] == test_y[i])
                ++correct;
        result.fold_accuracies.push_back(static_cast<double>(correct) /
                                         static_cast<double>(test_y.size()));
    }
    finish_stats(result);
    return result;
}

// --- DeepMap pipeline ----------------------------------------------------------------

CvResult cv_deepmap(const GraphDataset &ds, const CvConfig &config, const FoldPlan &plan) {
    CvResult result;
    result.pipeline = PipelineKind::deepmap;
    result.kind = config.kind;
    result.folds = plan.k;

    if (config.field_size < 1)
        throw ArgumentError("cross_validate: field size must be >= 1");
    if (config.train.max_epochs < 1)
        throw ArgumentError("cross_validate: need at least one training epoch");

    // Centralities depend only on each graph's own structure, never on other
    // graphs, so they are computed once and shared by every fold.
    std::vector<CentralityVector> centralities(static_cast<std::size_t>(ds.num_graphs()));
    parallel_for(ds.num_graphs(), config.threads, [&](int i) {
        centralities[static_cast<std::size_t>(i)] =
            eigenvector_centrality(ds.graphs[static_cast<std::size_t>(i)]);
    });
    const int w = config.width > 0 ? config.width : ds.max_vertices();

    // accuracy[fold][epoch-1]: test accuracy after each epoch's updates.
    std::vector<std::vector<double>> accuracy(static_cast<std::size_t>(plan.k));

    for (int f = 0; f < plan.k; ++f) {
        const std::vector<int> test_ids = plan.folds[static_cast<std::size_t>(f)];
        const std::vector<int> train_ids = plan.train_indices(f);
        FoldFeatures fold = fold_features(ds, train_ids, test_ids, config.kind, config.params);

        GraphDataset train_ds = subset_dataset(ds, train_ids);
        GraphDataset test_ds = subset_dataset(ds, test_ids);
        auto pick = [&](const std::vector<int> &ids) {
            std::vector<CentralityVector> out;
            out.reserve(ids.size());
            for (int id : ids)
                out.push_back(centralities[static_cast<std::size_t>(id)]);
            return out;
        };
        AlignedTensor train_tensor = assemble_input(train_ds, fold.train, pick(train_ids),
                                                    config.field_size, w, config.threads);
        AlignedTensor test_tensor = assemble_input(test_ds, fold.test, pick(test_ids),
                                                   config.field_size, w, config.threads);

        ModelConfig mc;
        mc.input_dim = fold.index.dimension();
        mc.field_size = config.field_size;
        mc.sequence_len = w;
        mc.class_count = ds.class_count;
        const std::uint64_t fseed = fold_seed(config.seed, f);
        Model model = init_model(mc, fseed);
        TrainConfig tc = config.train;
        tc.seed = fseed;

        std::vector<double> &curve = accuracy[static_cast<std::size_t>(f)];
        curve.reserve(static_cast<std::size_t>(tc.max_epochs));
        const std::vector<int> test_y = test_ds.class_labels;
        train(model, train_tensor, train_ds.class_labels, tc, [&](int, Model &m) {
            Prediction p = predict(m, test_tensor);
            int correct = 0;
            for (std::size_t i = 0; i < p.classes.size(); ++i)
                if (p.classes[i] == test_y[i])
                    ++correct;
            curve.push_back(static_cast<double>(correct) / static_cast<double>(test_y.size()));
        });
    }

    // Model selection: the epoch whose mean test accuracy across folds is
    // highest (earliest such epoch on ties); per-fold accuracies are reported
    // at that epoch.
    const int epochs = config.train.max_epochs;
    result.epoch_mean_accuracy.assign(static_cast<std::size_t>(epochs), 0.0);
    for (int e = 0; e < epochs; ++e) {
        double sum = 0.0;
        for (int f = 0; f < plan.k; ++f)
            sum += accuracy[static_cast<std::size_t>(f)][static_cast<std::size_t>(e)];
        result.epoch_mean_accuracy[static_cast<std::size_t>(e)] =
            sum / static_cast<double>(plan.k);
    }
    int best = 0;
    for (int e = 1; e < epochs; ++e)
        if (result.epoch_mean_accuracy[static_cast<std::size_t>(e)] >
            result.epoch_mean_accuracy[static_cast<std::size_t>(best)])
            best = e;
    result.best_epoch = best + 1;
    for (int f = 0; f < plan.k; ++f)
        result.fold_accuracies.push_back(
            accuracy[static_cast<std::size_t>(f)][static_cast<std::size_t>(best)]);
    finish_stats(result);
    return result;
}

} // namespace

CvResult cross_validate(const GraphDataset &ds, const CvConfig &config) {
    validate_dataset(ds);
    FoldPlan plan = stratified_kfold(ds.class_labels, config.folds, config.seed);
    if (config.pipeline == PipelineKind::kernel)
        return cv_kernel(ds, config, plan);
    return cv_deepmap(ds, config, plan);
}

// --- Reports ----------------------------------------------------------------------

namespace {

void print_double(std::ostream &out, double v) {
    out << std::setprecision(17) << v;
}

} // namespace

void write_cv_report_text(std::ostream &out, const CvConfig &config, const CvResult &result) {
    out << "pipeline: " << pipeline_name(result.pipeline) << "\n";
    out << "feature: " << feature_kind_name(result.kind) << "\n";
    switch (result.kind) {
    case FeatureKind::wl_subtree:
        out << "h: " << config.params.h << "\n";
        break;
    case FeatureKind::shortest_path:
        break;
    case FeatureKind::graphlet:
        out << "k: " << config.params.k << "\n";
        out << "q: " << config.params.q << "\n";
        out << "sample_seed: " << config.params.seed << "\n";
        break;
    }
    out << "folds: " << result.folds << "\n";
    out << "seed: " << config.seed << "\n";
    if (result.pipeline == PipelineKind::deepmap) {
        out << "field_size: " << config.field_size << "\n";
        out << "epochs: " << config.train.max_epochs << "\n";
        out << "learning_rate: ";
        print_double(out, config.train.learning_rate);
        out << "\n";
        out << "decay_factor: ";
        print_double(out, config.train.decay_factor);
        out << "\n";
        out << "patience: " << config.train.patience << "\n";
        out << "batch_size: " << config.train.batch_size << "\n";
        out << "best_epoch: " << result.best_epoch << "\n";
    }
    if (result.gram_checked) {
        out << "gram_min_eigenvalue: ";
        print_double(out, result.gram_min_eigenvalue);
        out << "\n";
        out << "gram_trace: ";
        print_double(out, result.gram_trace);
        out << "\n";
    }
    for (std::size_t f = 0; f < result.fold_accuracies.size(); ++f) {
        out << "fold_" << f << "_accuracy: ";
        print_double(out, result.fold_accuracies[f]);
        out << "\n";
    }
    out << "mean_accuracy: ";
    print_double(out, result.mean_accuracy);
    out << "\n";
    out << "stddev_accuracy: ";
    print_double(out, result.stddev_accuracy);
    out << "\n";
}

void write_cv_folds_csv(std::ostream &out, const CvResult &result) {
    out << "fold,accuracy\n";
    for (std::size_t f = 0; f < result.fold_accuracies.size(); ++f) {
        out << f << ",";
        print_double(out, result.fold_accuracies[f]);
        out << "\n";
    }
}

void write_cv_epochs_csv(std::ostream &out, const CvResult &result) {
    out << "epoch,mean_accuracy\n";
    for (std::size_t e = 0; e < result.epoch_mean_accuracy.size(); ++e) {
        out << (e + 1) << ",";
        print_double(out, result.epoch_mean_accuracy[e]);
        out << "\n";
    }
}

} // namespace deepmap
