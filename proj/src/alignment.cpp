#include "deepmap/alignment.hpp"

#include <algorithm>
#include <bit>
#include <istream>
#include <ostream>
#include <set>

#include "deepmap/errors.hpp"
#include "deepmap/parallel.hpp"

static_assert(std::endian::native == std::endian::little,
              "tensor serialization assumes a little-endian host");

namespace deepmap {

namespace {

// descending centrality, ties by ascending index, dummies last
struct ByCentrality {
    const std::vector<double> &scores;
    bool operator()(int a, int b) const {
        if (a == kDummy || b == kDummy)
            return b == kDummy && a != kDummy;
        double sa = scores[static_cast<std::size_t>(a)], sb = scores[static_cast<std::size_t>(b)];
        if (sa != sb)
            return sa > sb;
        return a < b;
    }
};

} // namespace

VertexSequence vertex_sequence(const Graph &g, const CentralityVector &c, int w) {
    const int n = g.num_vertices();
    if (w < n)
        throw ArgumentError("vertex_sequence: w < number of vertices");
    if (static_cast<int>(c.scores.size()) != n)
        throw ArgumentError("vertex_sequence: centrality size mismatch");
    VertexSequence seq;
    seq.order.resize(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v)
        seq.order[static_cast<std::size_t>(v)] = v;
    std::sort(seq.order.begin(), seq.order.end(), ByCentrality{c.scores});
    seq.order.resize(static_cast<std::size_t>(w), kDummy);
    return seq;
}

ReceptiveField receptive_field(const Graph &g, int center, const CentralityVector &c, int r) {
    if (center < 0 || center >= g.num_vertices())
        throw ArgumentError("receptive_field: center out of range");
    if (r < 1)
        throw ArgumentError("receptive_field: r must be >= 1");
    ReceptiveField field;
    field.center = center;
    field.members.reserve(static_cast<std::size_t>(r));
    field.members.push_back(center);

    std::set<int> seen{center};
    std::vector<int> ring{center};
    while (static_cast<int>(field.members.size()) < r && !ring.empty()) {
        std::set<int> next_set;
        for (int v : ring)
            for (int u : g.adjacency[static_cast<std::size_t>(v)])
                if (!seen.count(u))
                    next_set.insert(u);
        std::vector<int> next_ring(next_set.begin(), next_set.end());
        seen.insert(next_ring.begin(), next_ring.end());
        const int space = r - static_cast<int>(field.members.size());
        if (static_cast<int>(next_ring.size()) > space) {
            // overflow ring: keep only the top-centrality vertices
            std::sort(next_ring.begin(), next_ring.end(), ByCentrality{c.scores});
            next_ring.resize(static_cast<std::size_t>(space));
        }
        field.members.insert(field.members.end(), next_ring.begin(), next_ring.end());
        ring = std::move(next_ring);
    }
    field.members.resize(static_cast<std::size_t>(r), kDummy);
    std::sort(field.members.begin(), field.members.end(), ByCentrality{c.scores});
    return field;
}

AlignedTensor assemble_input(const GraphDataset &ds,
                             const std::vector<VertexFeatureMatrix> &features,
                             const std::vector<CentralityVector> &centralities, int r, int w,
                             int threads) {
    if (features.size() != ds.graphs.size() || centralities.size() != ds.graphs.size())
        throw IntegrityError("assemble_input: per-graph inputs do not match the dataset");
    if (r < 1)
        throw ArgumentError("assemble_input: r must be >= 1");
    const int m = features.empty() ? 0 : features[0].dimension;
    for (const auto &f : features)
        if (f.dimension != m)
            throw IntegrityError("assemble_input: feature dimension mismatch across graphs");
    if (w == 0)
        w = ds.max_vertices();

    AlignedTensor tensor;
    tensor.n = ds.num_graphs();
    tensor.w = w;
    tensor.r = r;
    tensor.m = m;
    tensor.rows.resize(static_cast<std::size_t>(tensor.n));
    parallel_for(static_cast<std::size_t>(tensor.n), threads, [&](std::size_t i) {
        const Graph &g = ds.graphs[i];
        auto &graph_rows = tensor.rows[i];
        graph_rows.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(r), {});
        VertexSequence seq = vertex_sequence(g, centralities[i], w);
        for (int s = 0; s < w; ++s) {
            int v = seq.order[static_cast<std::size_t>(s)];
            if (v == kDummy)
                continue; // dummy slot: r zero rows
            ReceptiveField field = receptive_field(g, v, centralities[i], r);
            for (int j = 0; j < r; ++j) {
                int member = field.members[static_cast<std::size_t>(j)];
                if (member == kDummy)
                    continue;
                graph_rows[static_cast<std::size_t>(s * r + j)] =
                    features[i].rows[static_cast<std::size_t>(member)];
            }
        }
    });
    return tensor;
}

void write_aligned_tensor(std::ostream &out, const AlignedTensor &tensor) {
    const std::int64_t header[4] = {tensor.n, tensor.w, tensor.r, tensor.m};
    out.write(reinterpret_cast<const char *>(header), sizeof(header));
    std::vector<float> dense(static_cast<std::size_t>(tensor.m));
    for (const auto &graph_rows : tensor.rows) {
        for (const auto &row : graph_rows) {
            std::fill(dense.begin(), dense.end(), 0.0f);
            for (auto [col, value] : row)
                dense[static_cast<std::size_t>(col)] = static_cast<float>(value);
            out.write(reinterpret_cast<const char *>(dense.data()),
                      static_cast<std::streamsize>(dense.size() * sizeof(float)));
        }
    }
    if (!out)
        throw Error("write_aligned_tensor: write failed");
}

AlignedTensor read_aligned_tensor(std::istream &in) {
    std::int64_t header[4] = {};
    in.read(reinterpret_cast<char *>(header), sizeof(header));
    if (!in)
        throw FormatError("aligned tensor: truncated header");
    AlignedTensor tensor;
    tensor.n = header[0];
    tensor.w = header[1];
    tensor.r = header[2];
    tensor.m = header[3];
    if (tensor.n < 0 || tensor.w < 0 || tensor.r < 1 || tensor.m < 0)
        throw FormatError("aligned tensor: nonsensical header");
    tensor.rows.resize(static_cast<std::size_t>(tensor.n));
    std::vector<float> dense(static_cast<std::size_t>(tensor.m));
    for (auto &graph_rows : tensor.rows) {
        graph_rows.resize(static_cast<std::size_t>(tensor.w * tensor.r));
        for (auto &row : graph_rows) {
            in.read(reinterpret_cast<char *>(dense.data()),
                    static_cast<std::streamsize>(dense.size() * sizeof(float)));
            if (!in)
                throw FormatError("aligned tensor: truncated data");
            for (std::size_t col = 0; col < dense.size(); ++col)
                if (dense[col] != 0.0f)
                    row.emplace_back(static_cast<int>(col), static_cast<double>(dense[col]));
        }
    }
    return tensor;
}

} // namespace deepmap
