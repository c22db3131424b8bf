#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"

#include "deepmap/cross_validation.hpp"
#include "deepmap/errors.hpp"
#include "deepmap/golden.hpp"
#include "deepmap/kernels.hpp"
#include "deepmap/rng.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace deepmap;

namespace {

// per-fold count of each class among a fold's test indices
std::vector<std::map<int, int>> class_counts(const FoldPlan &plan,
                                             const std::vector<int> &labels) {
    std::vector<std::map<int, int>> counts(plan.folds.size());
    for (std::size_t f = 0; f < plan.folds.size(); ++f)
        for (int i : plan.folds[f])
            counts[f][labels[static_cast<std::size_t>(i)]] += 1;
    return counts;
}

void check_partition(const FoldPlan &plan, int n) {
    std::set<int> seen;
    for (const auto &fold : plan.folds) {
        CHECK(std::is_sorted(fold.begin(), fold.end()));
        for (int i : fold) {
            CHECK(i >= 0);
            CHECK(i < n);
            CHECK(seen.insert(i).second); // no index in two folds
        }
    }
    CHECK(static_cast<int>(seen.size()) == n);
}

GraphDataset identical_triangles(int n, int class1_count) {
    GraphDataset ds;
    ds.name = "tri";
    ds.class_count = 2;
    for (int i = 0; i < n; ++i) {
        ds.graphs.push_back(fixtures::triangle_graph(1));
        ds.class_labels.push_back(i < n - class1_count ? 0 : 1);
    }
    return ds;
}

GraphDataset small_two_class(int per_class, std::uint64_t seed) {
    GraphDataset ds;
    ds.name = "small";
    ds.class_count = 2;
    auto rng = keyed_rng(seed);
    for (int i = 0; i < per_class; ++i) {
        // class 0: sparse-ish; class 1: dense-ish — separable but not trivial
        ds.graphs.push_back(fixtures::random_graph(rng, 6, 9, 2, 0.2));
        ds.class_labels.push_back(0);
        ds.graphs.push_back(fixtures::random_graph(rng, 6, 9, 2, 0.75));
        ds.class_labels.push_back(1);
    }
    return ds;
}

} // namespace

// --- Stratified folds -------------------------------------------------------------

TEST_CASE("balanced two-class split: every fold gets one sample of each class") {
    const std::vector<int> labels{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
    const FoldPlan plan = stratified_kfold(labels, 5, 3);
    REQUIRE(plan.k == 5);
    REQUIRE(plan.folds.size() == 5);
    check_partition(plan, 10);
    for (const auto &counts : class_counts(plan, labels)) {
        CHECK(counts.at(0) == 1);
        CHECK(counts.at(1) == 1);
    }
}

TEST_CASE("k = n yields singleton folds") {
    const std::vector<int> labels{0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
    const FoldPlan plan = stratified_kfold(labels, 10, 1);
    check_partition(plan, 10);
    for (const auto &fold : plan.folds)
        CHECK(fold.size() == 1);
}

TEST_CASE("unbalanced classes stay within one sample per fold of each other") {
    const std::vector<int> labels{0, 0, 0, 1, 1, 1, 1};
    const FoldPlan plan = stratified_kfold(labels, 3, 9);
    check_partition(plan, 7);
    const auto counts = class_counts(plan, labels);
    std::multiset<int> class1_sizes;
    for (const auto &c : counts)
        class1_sizes.insert(c.count(1) ? c.at(1) : 0);
    CHECK(class1_sizes == std::multiset<int>{1, 1, 2});
    // the rolling cursor keeps overall fold sizes balanced: (3, 2, 2)
    std::multiset<std::size_t> sizes;
    for (const auto &fold : plan.folds)
        sizes.insert(fold.size());
    CHECK(sizes == std::multiset<std::size_t>{2, 2, 3});
}

TEST_CASE("train indices are the sorted complement of the fold") {
    const std::vector<int> labels{0, 0, 1, 1, 0, 1};
    const FoldPlan plan = stratified_kfold(labels, 3, 4);
    for (int f = 0; f < plan.k; ++f) {
        const auto train = plan.train_indices(f);
        CHECK(std::is_sorted(train.begin(), train.end()));
        CHECK(train.size() + plan.folds[static_cast<std::size_t>(f)].size() == labels.size());
        std::set<int> test_set(plan.folds[static_cast<std::size_t>(f)].begin(),
                               plan.folds[static_cast<std::size_t>(f)].end());
        for (int i : train)
            CHECK(test_set.count(i) == 0);
    }
}

TEST_CASE("stratified_kfold rejects bad fold counts") {
    CHECK_THROWS_AS(stratified_kfold({0, 1}, 1, 0), ArgumentError);
    CHECK_THROWS_AS(stratified_kfold({0, 1}, 3, 0), ArgumentError);
}

TEST_CASE("property: per-class and per-fold balance on random label vectors") {
    auto rng = keyed_rng(501);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = static_cast<int>(next_int(rng, 4, 40));
        const int classes = static_cast<int>(next_int(rng, 1, 4));
        std::vector<int> labels(static_cast<std::size_t>(n));
        for (auto &l : labels)
            l = static_cast<int>(next_int(rng, 0, classes - 1));
        const int k = static_cast<int>(next_int(rng, 2, n));
        const FoldPlan plan = stratified_kfold(labels, k, trial);
        check_partition(plan, n);
        // per-class max - min <= 1 across folds
        const auto counts = class_counts(plan, labels);
        for (int c = 0; c < classes; ++c) {
            int lo = n, hi = 0;
            for (const auto &fold_counts : counts) {
                const int got = fold_counts.count(c) ? fold_counts.at(c) : 0;
                lo = std::min(lo, got);
                hi = std::max(hi, got);
            }
            CHECK(hi - lo <= 1);
        }
        // overall fold sizes differ by at most one
        std::size_t lo = labels.size(), hi = 0;
        for (const auto &fold : plan.folds) {
            lo = std::min(lo, fold.size());
            hi = std::max(hi, fold.size());
        }
        CHECK(hi - lo <= 1);
        // same seed, same plan
        const FoldPlan again = stratified_kfold(labels, k, trial);
        CHECK(again.folds == plan.folds);
    }
}

// --- Kernel pipeline ---------------------------------------------------------------

TEST_CASE("identical graphs: kernel CV degenerates to majority voting, mean 0.6") {
    // 10 identical triangles, 6 of class 0 and 4 of class 1, 5 folds: fold 0
    // tests (2 class-0), folds 1-4 test (1, 1). All feature vectors are equal,
    // so the classifier can only predict one class; with a balanced train set
    // (fold 0) the zero-initialized model stays at zero and argmax breaks the
    // tie toward class 0. Accuracies: (1.0, 0.5, 0.5, 0.5, 0.5) -> mean 0.6.
    const GraphDataset ds = identical_triangles(10, 4);
    CvConfig config;
    config.pipeline = PipelineKind::kernel;
    config.kind = FeatureKind::shortest_path;
    config.folds = 5;
    config.seed = 0;
    const CvResult result = cross_validate(ds, config);
    REQUIRE(result.fold_accuracies.size() == 5);
    std::multiset<double> accs(result.fold_accuracies.begin(), result.fold_accuracies.end());
    CHECK(accs == std::multiset<double>{0.5, 0.5, 0.5, 0.5, 1.0});
    CHECK(result.mean_accuracy == doctest::Approx(0.6).epsilon(1e-15));
    const auto [mean, stddev] = oracles::mean_stddev(result.fold_accuracies);
    CHECK(result.mean_accuracy == doctest::Approx(mean).epsilon(1e-15));
    CHECK(result.stddev_accuracy == doctest::Approx(stddev).epsilon(1e-12));
}

TEST_CASE("kernel CV separates an easy dataset and reports a PSD Gram") {
    const GraphDataset ds = small_two_class(10, 77);
    CvConfig config;
    config.pipeline = PipelineKind::kernel;
    config.kind = FeatureKind::wl_subtree;
    config.params.h = 1;
    config.folds = 5;
    config.seed = 1;
    const CvResult result = cross_validate(ds, config);
    CHECK(result.gram_checked);
    CHECK(result.gram_trace > 0.0);
    CHECK(result.gram_min_eigenvalue >= -1e-8 * result.gram_trace);
    CHECK(result.mean_accuracy > 0.8); // dense vs sparse is nearly trivial
    CHECK(result.best_epoch == 0);     // no epoch dimension in this pipeline
    CHECK(result.epoch_mean_accuracy.empty());
}

TEST_CASE("kernel CV is bit-reproducible, reports included") {
    const GraphDataset ds = small_two_class(6, 13);
    CvConfig config;
    config.pipeline = PipelineKind::kernel;
    config.kind = FeatureKind::graphlet;
    config.params.k = 3;
    config.params.q = 10;
    config.params.seed = 2;
    config.folds = 3;
    config.seed = 5;
    const CvResult a = cross_validate(ds, config);
    const CvResult b = cross_validate(ds, config);
    CHECK(a.fold_accuracies == b.fold_accuracies);
    CHECK(a.mean_accuracy == b.mean_accuracy);
    CHECK(a.stddev_accuracy == b.stddev_accuracy);
    CHECK(a.gram_min_eigenvalue == b.gram_min_eigenvalue);

    std::stringstream ra, rb, fa, fb;
    write_cv_report_text(ra, config, a);
    write_cv_report_text(rb, config, b);
    write_cv_folds_csv(fa, a);
    write_cv_folds_csv(fb, b);
    CHECK(ra.str() == rb.str());
    CHECK(fa.str() == fb.str());
    CHECK(ra.str().find("pipeline") != std::string::npos);
    CHECK(ra.str().find("gram_min_eigenvalue") != std::string::npos);
    CHECK(fa.str().rfind("fold,accuracy\n", 0) == 0);
}

TEST_CASE("per-fold refits keep the feature space leakage-free") {
    // The Gram PSD check runs on the whole dataset, but fold models must be
    // fitted on training-fold structures only. A graph whose labels exist
    // nowhere else lands in some test fold; training must not know them.
    GraphDataset ds = small_two_class(5, 21);
    for (auto &l : ds.graphs.back().vertex_labels)
        l = 99; // alien alphabet in exactly one graph
    CvConfig config;
    config.pipeline = PipelineKind::kernel;
    config.kind = FeatureKind::wl_subtree;
    config.params.h = 1;
    config.folds = 5;
    config.seed = 2;
    const CvResult result = cross_validate(ds, config); // must not throw
    CHECK(result.fold_accuracies.size() == 5);
}

// --- Deepmap pipeline ---------------------------------------------------------------

TEST_CASE("deepmap CV: shapes, epoch curve, and reproducibility") {
    const GraphDataset ds = small_two_class(6, 31);
    CvConfig config;
    config.pipeline = PipelineKind::deepmap;
    config.kind = FeatureKind::wl_subtree;
    config.params.h = 1;
    config.folds = 3;
    config.seed = 4;
    config.field_size = 3;
    config.train.max_epochs = 4;
    config.train.batch_size = 4;
    const CvResult result = cross_validate(ds, config);
    REQUIRE(result.fold_accuracies.size() == 3);
    REQUIRE(result.epoch_mean_accuracy.size() == 4);
    CHECK(result.best_epoch >= 1);
    CHECK(result.best_epoch <= 4);
    for (double acc : result.fold_accuracies) {
        CHECK(acc >= 0.0);
        CHECK(acc <= 1.0);
    }
    // best epoch is the earliest argmax of the mean curve
    const double best_mean =
        *std::max_element(result.epoch_mean_accuracy.begin(), result.epoch_mean_accuracy.end());
    CHECK(result.epoch_mean_accuracy[static_cast<std::size_t>(result.best_epoch - 1)] ==
          doctest::Approx(best_mean));
    for (int e = 0; e < result.best_epoch - 1; ++e)
        CHECK(result.epoch_mean_accuracy[static_cast<std::size_t>(e)] < best_mean);
    // the reported mean matches the fold accuracies
    const auto [mean, stddev] = oracles::mean_stddev(result.fold_accuracies);
    CHECK(result.mean_accuracy == doctest::Approx(mean).epsilon(1e-15));
    CHECK(result.stddev_accuracy == doctest::Approx(stddev).epsilon(1e-12));
    CHECK_FALSE(result.gram_checked);

    const CvResult again = cross_validate(ds, config);
    CHECK(again.fold_accuracies == result.fold_accuracies);
    CHECK(again.epoch_mean_accuracy == result.epoch_mean_accuracy);
    CHECK(again.best_epoch == result.best_epoch);

    std::stringstream ea, eb;
    write_cv_epochs_csv(ea, result);
    write_cv_epochs_csv(eb, again);
    CHECK(ea.str() == eb.str());
    CHECK(ea.str().rfind("epoch,mean_accuracy\n", 0) == 0);
    // one line per epoch plus header
    const std::string text = ea.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);
}

TEST_CASE("cross_validate validates its configuration") {
    const GraphDataset ds = small_two_class(3, 41);
    CvConfig config;
    config.folds = 7; // more folds than graphs
    CHECK_THROWS_AS(cross_validate(ds, config), ArgumentError);
    CvConfig deep;
    deep.pipeline = PipelineKind::deepmap;
    deep.folds = 2;
    deep.field_size = 0;
    CHECK_THROWS_AS(cross_validate(ds, deep), ArgumentError);
    CvConfig zero_epochs;
    zero_epochs.pipeline = PipelineKind::deepmap;
    zero_epochs.folds = 2;
    zero_epochs.train.max_epochs = 0;
    CHECK_THROWS_AS(cross_validate(ds, zero_epochs), ArgumentError);
}

TEST_CASE("pipeline names round-trip") {
    CHECK(pipeline_from_name(pipeline_name(PipelineKind::kernel)) == PipelineKind::kernel);
    CHECK(pipeline_from_name(pipeline_name(PipelineKind::deepmap)) == PipelineKind::deepmap);
    CHECK_THROWS_AS(pipeline_from_name("nope"), ArgumentError);
}

// --- Decomposition-to-Gram invariant ------------------------------------------------

TEST_CASE("gram from vertex-map sums equals gram from independent graph counters") {
    auto rng = keyed_rng(502);
    GraphDataset ds;
    ds.name = "inv";
    ds.class_count = 2;
    for (int i = 0; i < 6; ++i) {
        ds.graphs.push_back(fixtures::random_graph(rng, 3, 8, 3));
        ds.class_labels.push_back(i % 2);
    }
    for (FeatureKind kind : {FeatureKind::shortest_path, FeatureKind::wl_subtree}) {
        FeatureParams params;
        params.h = 2;
        const auto index = build_feature_index(ds, kind, params);
        WlRefinement ref;
        if (kind == FeatureKind::wl_subtree)
            ref = wl_refine(ds.graphs, params.h);
        const auto features = dataset_vertex_features(
            ds, index, kind == FeatureKind::wl_subtree ? &ref : nullptr);

        std::vector<std::vector<std::int64_t>> from_vertices, from_oracle;
        const auto oracle_wl = oracles::wl_labels(ds.graphs, params.h);
        for (int i = 0; i < ds.num_graphs(); ++i) {
            from_vertices.push_back(graph_feature_map(features[static_cast<std::size_t>(i)]));
            std::vector<std::int64_t> dense(static_cast<std::size_t>(index.dimension()), 0);
            if (kind == FeatureKind::shortest_path) {
                for (auto [key, count] :
                     oracles::sp_graph_counts(ds.graphs[static_cast<std::size_t>(i)]))
                    dense[static_cast<std::size_t>(index.column_of.at(key))] = count;
            } else {
                for (auto [label, count] :
                     oracles::wl_graph_counts(oracle_wl[static_cast<std::size_t>(i)]))
                    dense[static_cast<std::size_t>(
                        index.column_of.at(FeatureKey{label, 0, 0}))] = count;
            }
            from_oracle.push_back(std::move(dense));
        }
        const GramMatrix a = gram_matrix(from_vertices);
        const GramMatrix b = gram_matrix(from_oracle);
        CHECK(a.values == b.values);
    }
}
