#pragma once

#include <cstdint>

#include "deepmap/graph.hpp"

namespace deepmap {

// Generates a labeled multi-class dataset of Erdős–Rényi graphs with planted
// per-class seed motifs, so classes are statistically separable but noisy.
//
// This generator is an acknowledged stand-in for a benchmark whose exact
// construction is unpublished; the contract is only: ER noise with the given
// edge probability plus learnable class structure. Class k plants k+1
// disjoint copies of a 5-vertex motif — a triangle (a, b, c) with pendant
// tails on a and c — and wires each motif's vertex b into the ER block by one
// edge. Pendant vertices are rare in ER noise at these densities, so degree
// labels make the motif count a crisp class signal.
//
// Sizes are drawn uniformly from [min_size, max_size]; a draw is raised to
// 5*(k+1)+3 when the motif demand of class k exceeds it. Vertex labels are
// degree + 1. Graphs are emitted class-major; per-graph RNG streams are keyed
// by (seed, class, index), so output is byte-reproducible.
//
// classes >= 2, min_size >= 3, num_graphs >= classes, edge_prob in (0, 1)
// (all violations -> ArgumentError). Per-class counts differ by at most 1.
GraphDataset generate_er_dataset(int num_graphs, int classes, int min_size, int max_size,
                                 double edge_prob, std::uint64_t seed);

} // namespace deepmap
