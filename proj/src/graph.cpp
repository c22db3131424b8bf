#include "deepmap/graph.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <set>

#include "deepmap/errors.hpp"

namespace deepmap {

Graph make_graph(int num_vertices, const std::vector<std::pair<int, int>> &edges,
                 std::vector<int> labels) {
    if (num_vertices < 0)
        throw ArgumentError("make_graph: negative vertex count");
    std::vector<std::set<int>> adj(static_cast<std::size_t>(num_vertices));
    for (auto [u, v] : edges) {
        if (u < 0 || v < 0 || u >= num_vertices || v >= num_vertices)
            throw ArgumentError("make_graph: edge endpoint out of range");
        if (u == v)
            continue; // self-loops dropped
        adj[static_cast<std::size_t>(u)].insert(v);
        adj[static_cast<std::size_t>(v)].insert(u);
    }
    Graph g;
    g.adjacency.reserve(adj.size());
    for (auto &s : adj)
        g.adjacency.emplace_back(s.begin(), s.end());
    if (labels.empty()) {
        g.vertex_labels.resize(static_cast<std::size_t>(num_vertices));
        for (int v = 0; v < num_vertices; ++v)
            g.vertex_labels[static_cast<std::size_t>(v)] = g.degree(v) + 1;
    } else {
        if (static_cast<int>(labels.size()) != num_vertices)
            throw ArgumentError("make_graph: label count != vertex count");
        g.vertex_labels = std::move(labels);
    }
    validate_graph(g);
    return g;
}

void validate_graph(const Graph &g) {
    const int n = g.num_vertices();
    if (static_cast<int>(g.vertex_labels.size()) != n)
        throw IntegrityError("graph: label count != vertex count");
    for (int v = 0; v < n; ++v) {
        if (g.vertex_labels[static_cast<std::size_t>(v)] < 1)
            throw IntegrityError("graph: vertex label < 1 at vertex " + std::to_string(v));
        const auto &nbrs = g.adjacency[static_cast<std::size_t>(v)];
        if (!std::is_sorted(nbrs.begin(), nbrs.end()))
            throw IntegrityError("graph: adjacency not sorted at vertex " + std::to_string(v));
        if (std::adjacent_find(nbrs.begin(), nbrs.end()) != nbrs.end())
            throw IntegrityError("graph: duplicate edge at vertex " + std::to_string(v));
        for (int u : nbrs) {
            if (u < 0 || u >= n)
                throw IntegrityError("graph: neighbor out of range at vertex " + std::to_string(v));
            if (u == v)
                throw IntegrityError("graph: self-loop at vertex " + std::to_string(v));
            const auto &back = g.adjacency[static_cast<std::size_t>(u)];
            if (!std::binary_search(back.begin(), back.end(), v))
                throw IntegrityError("graph: asymmetric edge " + std::to_string(v) + "-" +
                                     std::to_string(u));
        }
    }
}

int GraphDataset::max_vertices() const {
    int w = 0;
    for (const auto &g : graphs)
        w = std::max(w, g.num_vertices());
    return w;
}

void validate_dataset(const GraphDataset &ds) {
    if (ds.graphs.empty())
        throw IntegrityError("dataset: no graphs");
    if (ds.class_labels.size() != ds.graphs.size())
        throw IntegrityError("dataset: class label count != graph count");
    for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
        validate_graph(ds.graphs[i]);
        if (ds.class_labels[i] < 0 || ds.class_labels[i] >= ds.class_count)
            throw IntegrityError("dataset: class index out of range at graph " +
                                 std::to_string(i));
    }
}

bool Permutation::is_valid() const {
    std::vector<bool> seen(mapping.size(), false);
    for (int m : mapping) {
        if (m < 0 || m >= size() || seen[static_cast<std::size_t>(m)])
            return false;
        seen[static_cast<std::size_t>(m)] = true;
    }
    return true;
}

Permutation Permutation::inverse() const {
    Permutation inv;
    inv.mapping.resize(mapping.size());
    for (int v = 0; v < size(); ++v)
        inv.mapping[static_cast<std::size_t>(mapping[static_cast<std::size_t>(v)])] = v;
    return inv;
}

Permutation identity_permutation(int n) {
    Permutation p;
    p.mapping.resize(static_cast<std::size_t>(n));
    std::iota(p.mapping.begin(), p.mapping.end(), 0);
    return p;
}

std::vector<int> bfs_distances(const Graph &g, int source) {
    if (source < 0 || source >= g.num_vertices())
        throw ArgumentError("bfs_distances: source out of range");
    std::vector<int> dist(static_cast<std::size_t>(g.num_vertices()), kUnreachable);
    dist[static_cast<std::size_t>(source)] = 0;
    std::queue<int> q;
    q.push(source);
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (int u : g.adjacency[static_cast<std::size_t>(v)]) {
            if (dist[static_cast<std::size_t>(u)] == kUnreachable) {
                dist[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(v)] + 1;
                q.push(u);
            }
        }
    }
    return dist;
}

Graph permute_graph(const Graph &g, const Permutation &p) {
    if (p.size() != g.num_vertices() || !p.is_valid())
        throw ArgumentError("permute_graph: permutation does not match graph");
    const int n = g.num_vertices();
    Graph out;
    out.adjacency.assign(static_cast<std::size_t>(n), {});
    out.vertex_labels.assign(static_cast<std::size_t>(n), 0);
    for (int v = 0; v < n; ++v) {
        int pv = p.mapping[static_cast<std::size_t>(v)];
        out.vertex_labels[static_cast<std::size_t>(pv)] = g.vertex_labels[static_cast<std::size_t>(v)];
        auto &nbrs = out.adjacency[static_cast<std::size_t>(pv)];
        nbrs.reserve(g.adjacency[static_cast<std::size_t>(v)].size());
        for (int u : g.adjacency[static_cast<std::size_t>(v)])
            nbrs.push_back(p.mapping[static_cast<std::size_t>(u)]);
        std::sort(nbrs.begin(), nbrs.end());
    }
    return out;
}

} // namespace deepmap
