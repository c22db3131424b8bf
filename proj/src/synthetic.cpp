#include "deepmap/synthetic.hpp"

#include <algorithm>

#include "deepmap/errors.hpp"
#include "deepmap/rng.hpp"

namespace deepmap {

namespace {

Graph generate_one(int class_k, int min_size, int max_size, double edge_prob,
                   std::mt19937_64 &eng) {
    const int motifs = class_k + 1;
    const int motif_vertices = 5 * motifs;
    int n = static_cast<int>(next_int(eng, min_size, max_size));
    n = std::max(n, motif_vertices + 3);
    const int er_block = n - motif_vertices;

    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < er_block; ++i)
        for (int j = i + 1; j < er_block; ++j)
            if (next_double(eng) < edge_prob)
                edges.emplace_back(i, j);

    for (int c = 0; c < motifs; ++c) {
        const int a = er_block + 5 * c;
        const int b = a + 1, tri = a + 2, tail_a = a + 3, tail_c = a + 4;
        edges.emplace_back(a, b);
        edges.emplace_back(a, tri);
        edges.emplace_back(b, tri);
        edges.emplace_back(a, tail_a);
        edges.emplace_back(tri, tail_c);
        // one port edge ties the motif into the noise block
        edges.emplace_back(b, static_cast<int>(next_index(eng, static_cast<std::uint64_t>(er_block))));
    }
    return make_graph(n, edges);
}

} // namespace

GraphDataset generate_er_dataset(int num_graphs, int classes, int min_size, int max_size,
                                 double edge_prob, std::uint64_t seed) {
    if (classes < 2)
        throw ArgumentError("generate_er_dataset: classes must be >= 2");
    if (min_size < 3)
        throw ArgumentError("generate_er_dataset: min_size must be >= 3");
    if (max_size < min_size)
        throw ArgumentError("generate_er_dataset: size range inverted");
    if (!(edge_prob > 0.0 && edge_prob < 1.0))
        throw ArgumentError("generate_er_dataset: edge_prob must lie in (0, 1)");
    if (num_graphs < classes)
        throw ArgumentError("generate_er_dataset: need at least one graph per class");

    GraphDataset ds;
    ds.name = "synthetic";
    ds.class_count = classes;
    ds.graphs.reserve(static_cast<std::size_t>(num_graphs));
    for (int k = 0; k < classes; ++k) {
        int count = num_graphs / classes + (k < num_graphs % classes ? 1 : 0);
        for (int i = 0; i < count; ++i) {
            auto eng = keyed_rng(seed, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(i));
            ds.graphs.push_back(generate_one(k, min_size, max_size, edge_prob, eng));
            ds.class_labels.push_back(k);
        }
    }
    validate_dataset(ds);
    return ds;
}

} // namespace deepmap
