#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace deepmap {

// Undirected labeled graph: sorted adjacency lists plus positive integer
// vertex labels. Immutable after construction by convention; all algorithms
// in this library treat graphs as read-only values.
struct Graph {
    std::vector<std::vector<int>> adjacency; // per-vertex sorted neighbor lists
    std::vector<int> vertex_labels;          // all >= 1

    int num_vertices() const { return static_cast<int>(adjacency.size()); }

    std::size_t num_edges() const {
        std::size_t twice = 0;
        for (const auto &nbrs : adjacency)
            twice += nbrs.size();
        return twice / 2;
    }

    int degree(int v) const { return static_cast<int>(adjacency[v].size()); }
};

// Builds a graph from an (unordered, possibly duplicated) edge list;
// self-loops and duplicates are dropped, adjacency is symmetrized and sorted.
// Labels default to degree + 1 when `labels` is empty.
Graph make_graph(int num_vertices, const std::vector<std::pair<int, int>> &edges,
                 std::vector<int> labels = {});

// Throws IntegrityError if adjacency symmetry, sortedness, label positivity,
// or the no-self-loop/no-duplicate invariants are violated.
void validate_graph(const Graph &g);

struct GraphDataset {
    std::vector<Graph> graphs;
    std::vector<int> class_labels; // per-graph class index in [0, class_count)
    int class_count = 0;
    std::string name;

    int num_graphs() const { return static_cast<int>(graphs.size()); }
    int max_vertices() const;
};

// Throws IntegrityError on shape or range violations.
void validate_dataset(const GraphDataset &ds);

struct Permutation {
    std::vector<int> mapping; // new index of each old vertex: v -> mapping[v]

    int size() const { return static_cast<int>(mapping.size()); }
    bool is_valid() const;
    Permutation inverse() const;
};

Permutation identity_permutation(int n);

// Unreachable sentinel for BFS distances; never a magic large number so that
// downstream code must branch explicitly.
inline constexpr int kUnreachable = std::numeric_limits<int>::max();

// Hop distances from `source` to every vertex (kUnreachable when none).
std::vector<int> bfs_distances(const Graph &g, int source);

// Relabels vertices: vertex v of `g` becomes vertex p.mapping[v]; adjacency
// stays an edge set, vertex labels travel with their vertex.
Graph permute_graph(const Graph &g, const Permutation &p);

} // namespace deepmap
