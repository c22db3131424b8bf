// Shared test fixtures: seeded random graphs and small helper builders.
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "deepmap/centrality.hpp"
#include "deepmap/golden.hpp"
#include "deepmap/graph.hpp"
#include "deepmap/rng.hpp"

namespace fixtures {

// Seeded G(n, p)-style labeled graph; n in [min_n, max_n], labels in
// [1, max_label].
inline deepmap::Graph random_graph(std::mt19937_64 &rng, int min_n, int max_n, int max_label,
                                   double edge_prob = 0.35) {
    const int n = deepmap::next_int(rng, min_n, max_n);
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (deepmap::next_double(rng) < edge_prob)
                edges.emplace_back(i, j);
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v)
        labels[static_cast<std::size_t>(v)] = deepmap::next_int(rng, 1, max_label);
    return deepmap::make_graph(n, edges, labels);
}

inline deepmap::Permutation random_permutation(std::mt19937_64 &rng, int n) {
    deepmap::Permutation p = deepmap::identity_permutation(n);
    deepmap::shuffle(p.mapping, rng);
    return p;
}

inline bool graphs_equal(const deepmap::Graph &a, const deepmap::Graph &b) {
    return a.adjacency == b.adjacency && a.vertex_labels == b.vertex_labels;
}

// True when all centrality scores are pairwise distinct by a safe margin
// (needed by the alignment-invariance tests, which require a unique order).
inline bool distinct_centralities(const deepmap::CentralityVector &c, double gap = 1e-7) {
    std::vector<double> sorted = c.scores;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i] - sorted[i - 1] < gap)
            return false;
    return true;
}

inline deepmap::Graph path_graph(int n) {
    std::vector<std::pair<int, int>> edges;
    for (int v = 0; v + 1 < n; ++v)
        edges.emplace_back(v, v + 1);
    return deepmap::make_graph(n, edges);
}

inline deepmap::Graph cycle_graph(int n) {
    std::vector<std::pair<int, int>> edges;
    for (int v = 0; v < n; ++v)
        edges.emplace_back(v, (v + 1) % n);
    return deepmap::make_graph(n, edges);
}

inline deepmap::Graph star_graph(int leaves) {
    std::vector<std::pair<int, int>> edges;
    for (int v = 1; v <= leaves; ++v)
        edges.emplace_back(0, v);
    return deepmap::make_graph(leaves + 1, edges);
}

inline deepmap::Graph triangle_graph(int label = 1) {
    return deepmap::make_graph(3, {{0, 1}, {1, 2}, {0, 2}}, {label, label, label});
}

} // namespace fixtures
