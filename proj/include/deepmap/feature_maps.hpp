#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

#include "deepmap/graph.hpp"

namespace deepmap {

enum class FeatureKind { graphlet, shortest_path, wl_subtree };

const char *feature_kind_name(FeatureKind kind);
FeatureKind feature_kind_from_name(const std::string &name);

// Canonical substructure key. Interpretation by kind:
//   graphlet       {canonical adjacency bit mask, 0, 0}
//   shortest_path  {source label, sink label, path length}
//   wl_subtree     {compressed label, 0, 0}
using FeatureKey = std::array<std::int64_t, 3>;

struct FeatureParams {
    int h = 1;                 // wl_subtree: refinement iterations
    int k = 3;                 // graphlet: size
    int q = 20;                // graphlet: samples per vertex
    std::uint64_t seed = 0;    // graphlet: sampling seed
};

// Dataset-global dense column assignment: every substructure key observed
// anywhere in the (training) dataset gets one column, in ascending key order,
// so all graphs share one feature space.
struct FeatureIndex {
    FeatureKind kind = FeatureKind::wl_subtree;
    FeatureParams params;
    std::map<FeatureKey, int> column_of;
    std::vector<FeatureKey> key_of; // inverse of column_of

    int dimension() const { return static_cast<int>(key_of.size()); }
};

// One vertex's substructure counts: sorted (column, count) pairs.
using SparseRow = std::vector<std::pair<int, std::int64_t>>;

struct VertexFeatureMatrix {
    int graph_id = 0;
    int dimension = 0;           // m
    std::vector<SparseRow> rows; // one per vertex
};

// --- Weisfeiler-Lehman refinement ------------------------------------------

// Dataset-global WL relabeling fitted on a set of graphs. At each iteration
// every vertex's signature is (own label, sorted neighbor labels); the set of
// distinct signatures across the whole dataset is sorted lexicographically
// (as integer sequences) and assigned consecutive new labels starting at the
// current maximum label + 1, so labels never repeat across iterations.
struct WlRefinement {
    int h = 0;
    // labels_per_iteration[graph][iteration][vertex]; iteration 0 = input labels
    std::vector<std::vector<std::vector<int>>> labels_per_iteration;
    std::vector<int> alphabet_sizes; // distinct labels per iteration 0..h
    // fitted relabel maps, one per iteration 1..h (signature -> new label)
    std::vector<std::map<std::vector<int>, int>> relabel;
};

WlRefinement wl_refine(const std::vector<Graph> &graphs, int h);

// Maps a graph that was NOT part of the fit through the fitted relabeling.
// Signatures unseen at fit time map to the sentinel label 0 (never a valid
// label), which propagates: any signature containing 0 is itself unseen.
std::vector<std::vector<int>> wl_apply(const WlRefinement &refinement, const Graph &g);

// --- Vertex feature maps -----------------------------------------------------

// Concatenated one-hot label indicators over iterations 0..h; sentinel-0 or
// out-of-index labels contribute nothing. Summing rows over vertices yields
// the WL graph feature map.
VertexFeatureMatrix wl_vertex_features(const std::vector<std::vector<int>> &labels_by_iteration,
                                       int graph_id, const FeatureIndex &index);
VertexFeatureMatrix wl_vertex_features(const WlRefinement &refinement, int graph_id,
                                       const FeatureIndex &index);

// Ordered-pair shortest-path counts attributed to the source vertex: for each
// pair (v, t), t reachable from v, vertex v gains one count on the key
// (label(v), label(t), d(v, t)). Distances via BFS from every source. Keys
// absent from `index` contribute nothing. Summing rows yields the
// ordered-pair SP graph feature map exactly.
VertexFeatureMatrix sp_vertex_features(const Graph &g, int graph_id, const FeatureIndex &index);

// Canonical isomorphism-class key of a k-vertex induced subgraph: the
// lexicographically minimal adjacency bit string over all k! vertex orders
// (vertex labels are ignored; graphlets are unlabeled). k in {3, 4, 5}.
std::int64_t graphlet_canonical_class(const std::vector<std::vector<bool>> &sub_adjacency);

// Per-vertex graphlet sampling: q samples per vertex, each taking v plus k-1
// distinct companions drawn uniformly from V \ {v} (when |V| < k the induced
// matrix is padded with isolated dummy rows); counts the canonical class of
// each induced subgraph. Sampling RNG is keyed by (seed, graph_id, vertex),
// so results are schedule-independent and reproducible. Every row sums to q.
VertexFeatureMatrix gk_vertex_features(const Graph &g, int graph_id, int k, int q,
                                       std::uint64_t seed, const FeatureIndex &index);

// Scans the dataset (for graphlets: the sampled multiset under params.seed)
// and assigns dense columns to every key observed anywhere.
FeatureIndex build_feature_index(const GraphDataset &ds, FeatureKind kind,
                                 const FeatureParams &params);

// WL index from an existing refinement (avoids refining twice).
FeatureIndex build_wl_index(const WlRefinement &refinement, const FeatureParams &params);

// Subset variants used when the index must be fitted on a training fold:
// SP keys from the given graphs only; graphlet classes from the sampled
// multiset under `graph_ids` (the ids the extraction pass will use, so the
// sampled streams coincide).
FeatureIndex build_sp_index(const std::vector<Graph> &graphs,
                            const FeatureParams &params = {});
FeatureIndex build_gk_index(const std::vector<Graph> &graphs, const std::vector<int> &graph_ids,
                            const FeatureParams &params);

// Vertex features for every graph in the dataset under a shared index. For
// WL, `refinement` must be the one the index was built from; graphs outside
// the refinement are mapped with wl_apply.
std::vector<VertexFeatureMatrix> dataset_vertex_features(const GraphDataset &ds,
                                                         const FeatureIndex &index,
                                                         const WlRefinement *refinement,
                                                         int threads = 1);

// Exact integer column sums of the rows: the graph-level substructure counts.
std::vector<std::int64_t> graph_feature_map(const VertexFeatureMatrix &vfm);

// --- Serialization -----------------------------------------------------------

// Sparse text format: header line "graph_id m", then one line per vertex:
// "vertex_id column:count column:count ...".
void write_feature_matrix(std::ostream &out, const VertexFeatureMatrix &vfm);
VertexFeatureMatrix read_feature_matrix(std::istream &in);

// Text manifest: kind, kind-specific params, dimension, one "column key" line
// per column.
void write_feature_index(std::ostream &out, const FeatureIndex &index);
FeatureIndex read_feature_index(std::istream &in);

} // namespace deepmap
