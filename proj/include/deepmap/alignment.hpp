#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "deepmap/centrality.hpp"
#include "deepmap/feature_maps.hpp"
#include "deepmap/graph.hpp"

namespace deepmap {

// Dummy padding marker in sequences and receptive fields.
inline constexpr int kDummy = -1;

// Vertices sorted by descending centrality (ties by ascending index), padded
// with dummies to length w.
struct VertexSequence {
    int graph_id = 0;
    std::vector<int> order;
};

// Exactly r members: the center plus its BFS-nearest high-centrality
// companions, sorted by descending centrality (ties by ascending index),
// dummies last.
struct ReceptiveField {
    int center = kDummy;
    std::vector<int> members;
};

// Dataset-level network input of logical shape n x (w*r) x m. Rows are kept
// sparse internally — substructure counts are mostly zeros and m can reach
// tens of thousands — and densified only at the serialization boundary.
struct AlignedTensor {
    std::int64_t n = 0, w = 0, r = 0, m = 0;
    // rows[graph][row], row in [0, w*r): sorted (column, value) pairs
    std::vector<std::vector<SparseRow>> rows;
};

VertexSequence vertex_sequence(const Graph &g, const CentralityVector &c, int w);

// Candidate pool grows ring by ring (1-hop, 2-hop, ...): whole rings while
// they fit; the first overflowing ring is filtered by descending centrality
// (ties by ascending index) to fill exactly r - 1 companions; an exhausted
// component pads with dummies.
ReceptiveField receptive_field(const Graph &g, int center, const CentralityVector &c, int r);

// Assembles the network input: for each graph, for each sequence slot, the r
// member feature rows in field order; dummy slots contribute r zero rows.
// Pass w = 0 to use the dataset maximum vertex count.
AlignedTensor assemble_input(const GraphDataset &ds,
                             const std::vector<VertexFeatureMatrix> &features,
                             const std::vector<CentralityVector> &centralities, int r, int w = 0,
                             int threads = 1);

// Flat binary layout: header (n, w, r, m as 64-bit little-endian integers)
// followed by the dense tensor as row-major 32-bit floats.
void write_aligned_tensor(std::ostream &out, const AlignedTensor &tensor);
AlignedTensor read_aligned_tensor(std::istream &in);

} // namespace deepmap
