// Acceptance gate: ten end-to-end criteria covering the worked examples, the
// structural identities, the network's gradients and invariances, and the
// full cross-validation pipeline on a synthetic dataset. Prints exactly one
// PASS/FAIL line per criterion and exits nonzero if any criterion fails.
#include "fixtures.hpp"
#include "oracles.hpp"

#include "deepmap/alignment.hpp"
#include "deepmap/centrality.hpp"
#include "deepmap/cross_validation.hpp"
#include "deepmap/feature_maps.hpp"
#include "deepmap/golden.hpp"
#include "deepmap/graph.hpp"
#include "deepmap/kernels.hpp"
#include "deepmap/network.hpp"
#include "deepmap/rng.hpp"
#include "deepmap/synthetic.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

using namespace deepmap;

namespace {

struct Outcome {
    bool ok = false;
    std::string detail;
};

Outcome pass(std::string detail) { return {true, std::move(detail)}; }
Outcome fail(std::string detail) { return {false, std::move(detail)}; }

std::string fmt(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

std::vector<std::pair<Graph, AlignmentExpectation>> alignment_cases() {
    return {{alignment_demo_graph_a(), alignment_demo_expected_a()},
            {alignment_demo_graph_b(), alignment_demo_expected_b()}};
}

// 1: eigenvector centralities of the worked-example graphs, to two decimals.
Outcome centrality_worked_example() {
    for (const auto &[g, expected] : alignment_cases()) {
        const CentralityVector c = eigenvector_centrality(g);
        if (!c.converged)
            return fail("power iteration did not converge");
        for (std::size_t i = 0; i < expected.centrality.size(); ++i) {
            const double rounded = std::round(c.scores[i] * 100.0) / 100.0;
            if (std::abs(rounded - expected.centrality[i]) > 1e-12)
                return fail("vertex " + std::to_string(i) + ": got " + fmt(rounded) +
                            ", expected " + fmt(expected.centrality[i]));
        }
    }
    return pass("both demo graphs match to 2 decimals");
}

// 2: vertex ordering and r=3 receptive fields of the worked-example graphs.
Outcome fields_worked_example() {
    for (const auto &[g, expected] : alignment_cases()) {
        const CentralityVector c = eigenvector_centrality(g);
        const VertexSequence seq = vertex_sequence(g, c, g.num_vertices());
        if (seq.order != expected.sequence)
            return fail("vertex sequence differs from the worked example");
        for (std::size_t i = 0; i < expected.field_centers.size(); ++i) {
            const ReceptiveField field = receptive_field(g, expected.field_centers[i], c, 3);
            if (field.members != expected.field_members[i])
                return fail("receptive field of vertex " +
                            std::to_string(expected.field_centers[i]) + " differs");
        }
    }
    return pass("sequences and receptive fields match the worked example");
}

// 3: one refinement round on the demo pair, per vertex, plus the kernel value.
Outcome wl_worked_example() {
    const std::vector<Graph> graphs = {wl_demo_graph_a(), wl_demo_graph_b()};
    const WlRefinement refinement = wl_refine(graphs, 1);
    if (refinement.labels_per_iteration[0][1] != wl_demo_refined_a())
        return fail("refined labels of graph A differ");
    if (refinement.labels_per_iteration[1][1] != wl_demo_refined_b())
        return fail("refined labels of graph B differ");
    if (refinement.alphabet_sizes != std::vector<int>{4, 8})
        return fail("alphabet sizes differ");

    FeatureParams params;
    params.h = 1;
    const FeatureIndex index = build_wl_index(refinement, params);
    const auto map_a = graph_feature_map(wl_vertex_features(refinement, 0, index));
    const auto map_b = graph_feature_map(wl_vertex_features(refinement, 1, index));
    std::int64_t dot = 0;
    for (std::size_t i = 0; i < map_a.size(); ++i)
        dot += map_a[i] * map_b[i];
    if (dot != kWlDemoKernelValue)
        return fail("kernel value " + std::to_string(dot) + ", expected " +
                    std::to_string(kWlDemoKernelValue));
    return pass("per-vertex refined labels and kernel value reproduced");
}

// 4: vertex rows sum exactly to independently counted whole-graph features.
Outcome decomposition_identity() {
    auto rng = keyed_rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const Graph g = fixtures::random_graph(rng, 3, 15, 4);

        const FeatureIndex sp_index = build_sp_index({g});
        const auto sp_sums = graph_feature_map(sp_vertex_features(g, 0, sp_index));
        std::map<std::array<std::int64_t, 3>, std::int64_t> sp_got;
        for (int col = 0; col < sp_index.dimension(); ++col)
            if (sp_sums[static_cast<std::size_t>(col)] != 0)
                sp_got[sp_index.key_of[static_cast<std::size_t>(col)]] =
                    sp_sums[static_cast<std::size_t>(col)];
        if (sp_got != oracles::sp_graph_counts(g))
            return fail("path-count decomposition differs at trial " + std::to_string(trial));

        const WlRefinement refinement = wl_refine({g}, 2);
        FeatureParams params;
        params.h = 2;
        const FeatureIndex wl_index = build_wl_index(refinement, params);
        const auto wl_sums = graph_feature_map(wl_vertex_features(refinement, 0, wl_index));
        std::map<std::int64_t, std::int64_t> wl_got;
        for (int col = 0; col < wl_index.dimension(); ++col)
            if (wl_sums[static_cast<std::size_t>(col)] != 0)
                wl_got[wl_index.key_of[static_cast<std::size_t>(col)][0]] =
                    wl_sums[static_cast<std::size_t>(col)];
        if (wl_got != oracles::wl_graph_counts(oracles::wl_labels({g}, 2)[0]))
            return fail("label-count decomposition differs at trial " + std::to_string(trial));
    }
    return pass("100 random graphs: vertex rows sum exactly to whole-graph counts");
}

// 5: Gram matrices of count feature maps are PSD within tolerance.
Outcome gram_psd() {
    auto rng = keyed_rng(777);
    GraphDataset ds;
    for (int i = 0; i < 30; ++i) {
        ds.graphs.push_back(fixtures::random_graph(rng, 5, 15, 3));
        ds.class_labels.push_back(i % 2);
    }
    ds.class_count = 2;

    struct Setup {
        std::string label;
        FeatureKind kind;
        FeatureParams params;
    };
    std::vector<Setup> setups;
    for (int h : {0, 1, 2}) {
        FeatureParams p;
        p.h = h;
        setups.push_back({"wl h=" + std::to_string(h), FeatureKind::wl_subtree, p});
    }
    setups.push_back({"sp", FeatureKind::shortest_path, FeatureParams{}});
    {
        FeatureParams p;
        p.k = 3;
        p.q = 50;
        p.seed = 9;
        setups.push_back({"gk k=3 q=50", FeatureKind::graphlet, p});
    }

    for (const Setup &setup : setups) {
        WlRefinement refinement;
        const WlRefinement *refinement_ptr = nullptr;
        FeatureIndex index;
        if (setup.kind == FeatureKind::wl_subtree) {
            refinement = wl_refine(ds.graphs, setup.params.h);
            index = build_wl_index(refinement, setup.params);
            refinement_ptr = &refinement;
        } else {
            index = build_feature_index(ds, setup.kind, setup.params);
        }
        const auto features = dataset_vertex_features(ds, index, refinement_ptr, 1);
        std::vector<std::vector<std::int64_t>> maps;
        for (const auto &vfm : features)
            maps.push_back(graph_feature_map(vfm));
        const GramMatrix gram = gram_matrix(maps);
        const double min_eig = min_eigenvalue(gram);
        double trace = 0.0;
        for (int i = 0; i < gram.n; ++i)
            trace += gram.at(i, i);
        if (min_eig < -1e-8 * std::max(trace, 1.0))
            return fail(setup.label + ": min eigenvalue " + fmt(min_eig) + " vs trace " +
                        fmt(trace));
    }
    return pass("all five gram matrices over 30 graphs are PSD within tolerance");
}

// 6: isomorphic graphs with distinct centralities produce identical network
// inputs, and a fixed-weight model maps them to identical outputs.
Outcome permutation_invariance() {
    auto rng = keyed_rng(31337);
    int done = 0;
    for (int attempt = 0; attempt < 1000 && done < 50; ++attempt) {
        const Graph g = fixtures::random_graph(rng, 4, 12, 3);
        const CentralityVector c = eigenvector_centrality(g);
        if (!c.converged || !fixtures::distinct_centralities(c))
            continue;
        const Permutation p = fixtures::random_permutation(rng, g.num_vertices());
        const Graph permuted = permute_graph(g, p);
        const CentralityVector c2 = eigenvector_centrality(permuted);

        const FeatureIndex index = build_sp_index({g});
        const VertexFeatureMatrix f1 = sp_vertex_features(g, 0, index);
        const VertexFeatureMatrix f2 = sp_vertex_features(permuted, 0, index);

        const int n = g.num_vertices();
        GraphDataset d1, d2;
        d1.graphs = {g};
        d2.graphs = {permuted};
        d1.class_labels = d2.class_labels = {0};
        d1.class_count = d2.class_count = 1;
        const AlignedTensor t1 = assemble_input(d1, {f1}, {c}, 3, n, 1);
        const AlignedTensor t2 = assemble_input(d2, {f2}, {c2}, 3, n, 1);
        if (t1.rows != t2.rows)
            return fail("tensors differ for an isomorphic pair (n=" + std::to_string(n) + ")");

        ModelConfig mc;
        mc.input_dim = index.dimension();
        mc.field_size = 3;
        mc.sequence_len = n;
        mc.class_count = 2;
        Model model = init_model(mc, 123);
        const ForwardResult r1 = forward(model, Batch{&t1, {0}}, false);
        const ForwardResult r2 = forward(model, Batch{&t2, {0}}, false);
        if (r1.logits != r2.logits)
            return fail("fixed-weight outputs differ for an isomorphic pair");
        ++done;
    }
    if (done < 50)
        return fail("only " + std::to_string(done) + " of 50 distinct-centrality pairs found");
    return pass("50 isomorphic pairs: identical tensors and identical fixed-weight outputs");
}

// 7: analytic gradients match central finite differences everywhere.
Outcome gradient_check() {
    ModelConfig mc;
    mc.input_dim = 6;
    mc.field_size = 2;
    mc.sequence_len = 3;
    mc.class_count = 3;
    const GradCheckReport report = grad_check(mc, 11, 1e-6);
    if (!report.passed)
        return fail("max relative error " + fmt(report.overall_max) + " exceeds 1e-6");
    return pass("all parameter groups within 1e-6 (max " + fmt(report.overall_max) + ")");
}

// 8: padding the sequence with dummy slots never changes the outputs.
Outcome padding_invariance() {
    GraphDataset ds;
    ds.graphs = {wl_demo_graph_a(), wl_demo_graph_b()};
    ds.class_labels = {0, 1};
    ds.class_count = 2;
    const WlRefinement refinement = wl_refine(ds.graphs, 1);
    FeatureParams params;
    params.h = 1;
    const FeatureIndex index = build_wl_index(refinement, params);
    const auto features = dataset_vertex_features(ds, index, &refinement, 1);
    std::vector<CentralityVector> centralities;
    for (const Graph &g : ds.graphs)
        centralities.push_back(eigenvector_centrality(g));

    const AlignedTensor tight = assemble_input(ds, features, centralities, 3, 6, 1);
    const AlignedTensor padded = assemble_input(ds, features, centralities, 3, 11, 1);

    ModelConfig mc;
    mc.input_dim = index.dimension();
    mc.field_size = 3;
    mc.class_count = 2;
    mc.sequence_len = 6;
    Model tight_model = init_model(mc, 5);
    mc.sequence_len = 11;
    Model padded_model = init_model(mc, 5);

    const ForwardResult a = forward(tight_model, Batch{&tight, {0, 1}}, false);
    const ForwardResult b = forward(padded_model, Batch{&padded, {0, 1}}, false);
    if (a.logits != b.logits)
        return fail("outputs changed between widths 6 and 11");
    return pass("outputs bitwise identical at widths 6 and 11");
}

// 9: the full pipeline beats chance comfortably on a synthetic 4-class set.
// Sparse noise keeps the refinement alphabet small enough that the first
// convolution is well conditioned on 360 training graphs; the kernel baseline
// reaches 0.785 on this set and the network should land well above chance.
Outcome synthetic_cv() {
    const GraphDataset ds = generate_er_dataset(400, 4, 20, 30, 0.05, 7);
    CvConfig config;
    config.pipeline = PipelineKind::deepmap;
    config.kind = FeatureKind::wl_subtree;
    config.params.h = 2;
    config.folds = 10;
    config.seed = 0;
    config.threads = 1;
    config.field_size = 5;
    config.width = 0;
    config.train.learning_rate = 0.01;
    config.train.decay_factor = 0.5;
    config.train.patience = 5;
    config.train.batch_size = 32;
    config.train.max_epochs = 30;
    const CvResult result = cross_validate(ds, config);
    const std::string detail = "mean accuracy " + fmt(result.mean_accuracy) + " +/- " +
                               fmt(result.stddev_accuracy) + " at epoch " +
                               std::to_string(result.best_epoch);
    if (result.mean_accuracy < 0.45)
        return fail(detail + "; required >= 0.45 (chance is 0.25)");
    return pass(detail);
}

// 10: the network memorizes a small stratified subset perfectly.
Outcome overfit_subset() {
    const GraphDataset full = generate_er_dataset(400, 4, 20, 30, 0.05, 7);
    GraphDataset sub;
    sub.class_count = 4;
    sub.name = "subset";
    std::vector<int> taken(4, 0);
    for (int i = 0; i < full.num_graphs() && sub.num_graphs() < 8; ++i) {
        const int cls = full.class_labels[static_cast<std::size_t>(i)];
        if (taken[static_cast<std::size_t>(cls)] < 2) {
            sub.graphs.push_back(full.graphs[static_cast<std::size_t>(i)]);
            sub.class_labels.push_back(cls);
            ++taken[static_cast<std::size_t>(cls)];
        }
    }

    const WlRefinement refinement = wl_refine(sub.graphs, 2);
    FeatureParams params;
    params.h = 2;
    const FeatureIndex index = build_wl_index(refinement, params);
    const auto features = dataset_vertex_features(sub, index, &refinement, 1);
    std::vector<CentralityVector> centralities;
    for (const Graph &g : sub.graphs)
        centralities.push_back(eigenvector_centrality(g));
    const AlignedTensor tensor = assemble_input(sub, features, centralities, 5, 0, 1);

    ModelConfig mc;
    mc.input_dim = static_cast<int>(tensor.m);
    mc.field_size = static_cast<int>(tensor.r);
    mc.sequence_len = static_cast<int>(tensor.w);
    mc.class_count = 4;
    Model model = init_model(mc, 1);
    TrainConfig tc;
    tc.max_epochs = 300;
    tc.batch_size = 4;
    // Plateau decay with the default patience of 5 starves memorization: with
    // eight samples the dropout noise keeps the loss from setting fresh minima,
    // so the rate halves until updates vanish. A patient schedule keeps the
    // step size alive long enough to drive the training loss to zero.
    tc.patience = 50;
    tc.seed = 1;
    const auto history = train(model, tensor, sub.class_labels, tc);

    const Prediction prediction = predict(model, tensor);
    const double accuracy = accuracy_of(prediction.classes, sub.class_labels);
    if (accuracy < 1.0)
        return fail("training accuracy " + fmt(accuracy) + " after 300 epochs");
    return pass("8-graph subset memorized (final loss " + fmt(history.back().loss) + ")");
}

} // namespace

int main() {
    using Clock = std::chrono::steady_clock;
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"centrality-worked-example", centrality_worked_example},
        {"receptive-field-worked-example", fields_worked_example},
        {"relabeling-worked-example", wl_worked_example},
        {"decomposition-identity", decomposition_identity},
        {"gram-psd", gram_psd},
        {"alignment-permutation-invariance", permutation_invariance},
        {"gradient-check", gradient_check},
        {"padding-invariance", padding_invariance},
        {"synthetic-cv-accuracy", synthetic_cv},
        {"overfit-small-subset", overfit_subset},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = Clock::now();
        Outcome outcome;
        try {
            outcome = criteria[i].second();
        } catch (const std::exception &e) {
            outcome = fail(std::string("exception: ") + e.what());
        }
        const std::chrono::duration<double> elapsed = Clock::now() - start;
        std::ostringstream line;
        line.setf(std::ios::fixed);
        line.precision(1);
        line << (outcome.ok ? "PASS" : "FAIL") << " criterion-" << (i + 1) << " "
             << criteria[i].first << " (" << elapsed.count() << "s): " << outcome.detail;
        std::cout << line.str() << std::endl;
        if (!outcome.ok)
            ++failures;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << " of "
              << criteria.size() << " criteria passed" << std::endl;
    return failures == 0 ? 0 : 1;
}
