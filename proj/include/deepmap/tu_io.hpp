#pragma once

#include <filesystem>
#include <string>

#include "deepmap/graph.hpp"

namespace deepmap {

struct TuParseStats {
    int self_loops_dropped = 0;
};

// Reads a dataset in the TU benchmark text layout from `directory`:
//   NAME_A.txt               comma-separated 1-based edge pairs "i, j"
//   NAME_graph_indicator.txt 1-based graph id per vertex line
//   NAME_graph_labels.txt    one class label per graph line
//   NAME_node_labels.txt     optional, one vertex label per line
// LF/CRLF both accepted. Internal indices are 0-based; class labels are
// remapped onto a dense [0, C) range in ascending raw order. When the node
// labels file is absent, vertex label := degree + 1. When present, labels are
// shifted by (1 - min) if needed so every label is >= 1.
// Missing mandatory file -> MissingInputError naming the file; malformed
// lines -> FormatError; out-of-graph vertex references -> IntegrityError
// with the offending line number. Self-loop edges are dropped and counted.
GraphDataset parse_tu_dataset(const std::filesystem::path &directory,
                              const std::string &dataset_name, TuParseStats *stats = nullptr);

// Writes `ds` in the same layout (edges emitted in both directions, sorted by
// source then target, matching the common TU distribution style). Node labels
// are always written. Deterministic byte-for-byte for equal inputs.
void write_tu_dataset(const GraphDataset &ds, const std::filesystem::path &directory,
                      const std::string &dataset_name);

} // namespace deepmap
