#include "deepmap/golden.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "deepmap/alignment.hpp"
#include "deepmap/centrality.hpp"
#include "deepmap/errors.hpp"
#include "deepmap/feature_maps.hpp"
#include "deepmap/network.hpp"

namespace deepmap {

namespace {

const std::vector<std::pair<int, int>> kWlDemoEdgesA = {{3, 4}, {4, 0}, {1, 4},
                                                        {2, 3}, {4, 2}, {5, 2}};
const std::vector<std::pair<int, int>> kWlDemoEdgesB = {{5, 3}, {4, 0}, {1, 0},
                                                        {4, 5}, {4, 2}, {5, 2}};
const std::vector<int> kWlDemoLabelsA = {1, 1, 3, 3, 4, 2};
const std::vector<int> kWlDemoLabelsB = {1, 1, 3, 2, 4, 3};

const std::vector<std::pair<int, int>> kAlignDemoEdgesA = {{5, 4}, {4, 3}, {2, 4},
                                                           {1, 5}, {4, 1}, {0, 1}};
const std::vector<std::pair<int, int>> kAlignDemoEdgesB = {{3, 2}, {3, 0}, {3, 1}, {0, 1}};

} // namespace

Graph wl_demo_graph_a() { return make_graph(6, kWlDemoEdgesA, kWlDemoLabelsA); }
Graph wl_demo_graph_b() { return make_graph(6, kWlDemoEdgesB, kWlDemoLabelsB); }

std::vector<int> wl_demo_refined_a() { return {7, 7, 9, 10, 11, 8}; }
std::vector<int> wl_demo_refined_b() { return {6, 5, 10, 8, 12, 9}; }

Graph alignment_demo_graph_a() { return make_graph(6, kAlignDemoEdgesA); }
Graph alignment_demo_graph_b() { return make_graph(4, kAlignDemoEdgesB); }

AlignmentExpectation alignment_demo_expected_a() {
    AlignmentExpectation e;
    e.centrality = {0.21, 0.52, 0.24, 0.24, 0.60, 0.46};
    e.sequence = {4, 1, 5, 2, 3, 0};
    // The lowest-centrality vertex (index 0) is omitted: its published field
    // does not follow the stated construction, so it is not asserted.
    e.field_centers = {4, 1, 5, 2, 3};
    e.field_members = {{4, 1, 5}, {4, 1, 5}, {4, 1, 5}, {4, 1, 2}, {4, 1, 3}};
    return e;
}

AlignmentExpectation alignment_demo_expected_b() {
    AlignmentExpectation e;
    e.centrality = {0.52, 0.52, 0.28, 0.61};
    e.sequence = {3, 0, 1, 2};
    e.field_centers = {3, 0, 1, 2};
    e.field_members = {{3, 0, 1}, {3, 0, 1}, {3, 0, 1}, {3, 0, 2}};
    return e;
}

namespace {

std::string join_ints(const std::vector<int> &v) {
    std::ostringstream out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out << (i ? "," : "") << v[i];
    return out.str();
}

std::vector<double> rounded_centrality(const Graph &g) {
    CentralityVector c = eigenvector_centrality(g);
    std::vector<double> out(c.scores.size());
    for (std::size_t i = 0; i < c.scores.size(); ++i)
        out[i] = std::round(c.scores[i] * 100.0) / 100.0;
    return out;
}

VerifyCheck check_centrality(bool corrupt) {
    VerifyCheck check;
    check.name = "centrality";
    auto edges_a = kAlignDemoEdgesA;
    if (corrupt)
        edges_a.emplace_back(0, 2); // self-test: perturb the fixture
    const Graph a = make_graph(6, edges_a);
    const Graph b = alignment_demo_graph_b();
    const std::vector<double> got_a = rounded_centrality(a);
    const std::vector<double> got_b = rounded_centrality(b);
    const std::vector<double> want_a = alignment_demo_expected_a().centrality;
    const std::vector<double> want_b = alignment_demo_expected_b().centrality;
    check.passed = got_a == want_a && got_b == want_b;
    std::ostringstream detail;
    detail << (check.passed ? "centrality scores match to 2 decimals on both demo graphs"
                            : "centrality scores differ from the expected 2-decimal values");
    check.detail = detail.str();
    return check;
}

VerifyCheck check_fields(bool corrupt) {
    VerifyCheck check;
    check.name = "fields";
    auto edges_a = kAlignDemoEdgesA;
    if (corrupt)
        edges_a.pop_back(); // self-test: drop an edge of the fixture
    const Graph a = make_graph(6, edges_a);
    const Graph b = alignment_demo_graph_b();
    bool ok = true;
    std::ostringstream detail;
    auto run_one = [&](const Graph &g, const AlignmentExpectation &want, const char *tag) {
        CentralityVector c = eigenvector_centrality(g);
        VertexSequence seq = vertex_sequence(g, c, g.num_vertices());
        if (seq.order != want.sequence) {
            ok = false;
            detail << tag << " sequence (" << join_ints(seq.order) << ") != ("
                   << join_ints(want.sequence) << "); ";
            return;
        }
        for (std::size_t i = 0; i < want.field_centers.size(); ++i) {
            ReceptiveField field = receptive_field(g, want.field_centers[i], c, 3);
            if (field.members != want.field_members[i]) {
                ok = false;
                detail << tag << " field of vertex " << want.field_centers[i] << " ("
                       << join_ints(field.members) << ") != (" << join_ints(want.field_members[i])
                       << "); ";
            }
        }
    };
    run_one(a, alignment_demo_expected_a(), "demo-a");
    run_one(b, alignment_demo_expected_b(), "demo-b");
    check.passed = ok;
    check.detail = ok ? "vertex sequences and 3-vertex receptive fields match" : detail.str();
    return check;
}

VerifyCheck check_wl(bool corrupt) {
    VerifyCheck check;
    check.name = "wl";
    auto labels_a = kWlDemoLabelsA;
    if (corrupt)
        labels_a[0] = 2; // self-test: perturb one input label
    const Graph a = make_graph(6, kWlDemoEdgesA, labels_a);
    const Graph b = wl_demo_graph_b();
    WlRefinement refinement = wl_refine({a, b}, 1);
    const std::vector<int> got_a = refinement.labels_per_iteration[0][1];
    const std::vector<int> got_b = refinement.labels_per_iteration[1][1];
    bool ok = got_a == wl_demo_refined_a() && got_b == wl_demo_refined_b();

    FeatureIndex index = build_wl_index(refinement, FeatureParams{});
    const std::vector<std::int64_t> map_a =
        graph_feature_map(wl_vertex_features(refinement, 0, index));
    const std::vector<std::int64_t> map_b =
        graph_feature_map(wl_vertex_features(refinement, 1, index));
    const std::int64_t dot =
        std::inner_product(map_a.begin(), map_a.end(), map_b.begin(), std::int64_t{0});
    ok = ok && dot == kWlDemoKernelValue;

    check.passed = ok;
    std::ostringstream detail;
    if (ok) {
        detail << "one-round relabeling and kernel value " << kWlDemoKernelValue << " match";
    } else {
        detail << "relabeling (" << join_ints(got_a) << " / " << join_ints(got_b)
               << ") or kernel value " << dot << " differs from the expected values";
    }
    check.detail = detail.str();
    return check;
}

VerifyCheck check_grad(bool corrupt) {
    VerifyCheck check;
    check.name = "grad";
    ModelConfig config;
    config.input_dim = 6;
    config.field_size = 2;
    config.sequence_len = 3;
    config.class_count = 3;
    // self-test: 1%-perturb the conv2 weight gradient so the check must trip
    const int corrupt_group = corrupt ? 2 : -1;
    GradCheckReport report = grad_check(config, 11, 1e-6, corrupt_group);
    check.passed = report.passed;
    std::ostringstream detail;
    detail.precision(3);
    if (report.passed) {
        detail << "max relative error " << report.overall_max << " across all parameter groups";
    } else {
        detail << "relative error above tolerance:";
        for (int gidx = 0; gidx < Model::group_count; ++gidx)
            if (report.max_relative_error[static_cast<std::size_t>(gidx)] > 1e-6)
                detail << " " << Model::group_names[static_cast<std::size_t>(gidx)] << "="
                       << report.max_relative_error[static_cast<std::size_t>(gidx)];
    }
    check.detail = detail.str();
    return check;
}

} // namespace

std::vector<std::string> verify_check_names() { return {"centrality", "fields", "wl", "grad"}; }

std::vector<VerifyCheck> run_verify_checks(const std::string &only, const std::string &corrupt) {
    const std::vector<std::string> names = verify_check_names();
    auto known = [&](const std::string &name) {
        return std::find(names.begin(), names.end(), name) != names.end();
    };
    if (!only.empty() && !known(only))
        throw ArgumentError("unknown check '" + only + "'");
    if (!corrupt.empty() && !known(corrupt))
        throw ArgumentError("unknown check '" + corrupt + "'");

    std::vector<VerifyCheck> results;
    for (const std::string &name : names) {
        if (!only.empty() && name != only)
            continue;
        const bool c = corrupt == name;
        if (name == "centrality")
            results.push_back(check_centrality(c));
        else if (name == "fields")
            results.push_back(check_fields(c));
        else if (name == "wl")
            results.push_back(check_wl(c));
        else
            results.push_back(check_grad(c));
    }
    return results;
}

} // namespace deepmap
