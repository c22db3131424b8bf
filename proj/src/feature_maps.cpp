#include "deepmap/feature_maps.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "deepmap/errors.hpp"
#include "deepmap/parallel.hpp"
#include "deepmap/rng.hpp"

namespace deepmap {

const char *feature_kind_name(FeatureKind kind) {
    switch (kind) {
    case FeatureKind::graphlet:
        return "gk";
    case FeatureKind::shortest_path:
        return "sp";
    case FeatureKind::wl_subtree:
        return "wl";
    }
    return "?";
}

FeatureKind feature_kind_from_name(const std::string &name) {
    if (name == "gk")
        return FeatureKind::graphlet;
    if (name == "sp")
        return FeatureKind::shortest_path;
    if (name == "wl")
        return FeatureKind::wl_subtree;
    throw ArgumentError("unknown feature kind: " + name + " (expected gk, sp, or wl)");
}

// --- Weisfeiler-Lehman -------------------------------------------------------

namespace {

std::vector<int> wl_signature(const Graph &g, const std::vector<int> &labels, int v) {
    std::vector<int> sig;
    sig.reserve(g.adjacency[static_cast<std::size_t>(v)].size() + 1);
    sig.push_back(labels[static_cast<std::size_t>(v)]);
    for (int u : g.adjacency[static_cast<std::size_t>(v)])
        sig.push_back(labels[static_cast<std::size_t>(u)]);
    std::sort(sig.begin() + 1, sig.end());
    return sig;
}

} // namespace

WlRefinement wl_refine(const std::vector<Graph> &graphs, int h) {
    if (h < 0)
        throw ArgumentError("wl_refine: h must be >= 0");
    WlRefinement ref;
    ref.h = h;
    ref.labels_per_iteration.resize(graphs.size());

    int max_label = 0;
    std::set<int> initial_alphabet;
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        ref.labels_per_iteration[i].reserve(static_cast<std::size_t>(h) + 1);
        ref.labels_per_iteration[i].push_back(graphs[i].vertex_labels);
        for (int l : graphs[i].vertex_labels) {
            max_label = std::max(max_label, l);
            initial_alphabet.insert(l);
        }
    }
    ref.alphabet_sizes.push_back(static_cast<int>(initial_alphabet.size()));

    for (int t = 1; t <= h; ++t) {
        // collect the dataset-wide signature set, sorted lexicographically
        std::set<std::vector<int>> signatures;
        for (std::size_t i = 0; i < graphs.size(); ++i) {
            const auto &prev = ref.labels_per_iteration[i].back();
            for (int v = 0; v < graphs[i].num_vertices(); ++v)
                signatures.insert(wl_signature(graphs[i], prev, v));
        }
        std::map<std::vector<int>, int> relabel;
        for (const auto &sig : signatures)
            relabel.emplace(sig, ++max_label);
        for (std::size_t i = 0; i < graphs.size(); ++i) {
            const auto prev = ref.labels_per_iteration[i].back();
            std::vector<int> next(prev.size());
            for (int v = 0; v < graphs[i].num_vertices(); ++v)
                next[static_cast<std::size_t>(v)] =
                    relabel.at(wl_signature(graphs[i], prev, v));
            ref.labels_per_iteration[i].push_back(std::move(next));
        }
        ref.alphabet_sizes.push_back(static_cast<int>(relabel.size()));
        ref.relabel.push_back(std::move(relabel));
    }
    return ref;
}

std::vector<std::vector<int>> wl_apply(const WlRefinement &refinement, const Graph &g) {
    std::vector<std::vector<int>> labels;
    labels.reserve(static_cast<std::size_t>(refinement.h) + 1);
    labels.push_back(g.vertex_labels);
    for (int t = 1; t <= refinement.h; ++t) {
        const auto &prev = labels.back();
        const auto &relabel = refinement.relabel[static_cast<std::size_t>(t - 1)];
        std::vector<int> next(prev.size(), 0);
        for (int v = 0; v < g.num_vertices(); ++v) {
            auto it = relabel.find(wl_signature(g, prev, v));
            if (it != relabel.end())
                next[static_cast<std::size_t>(v)] = it->second; // unseen -> sentinel 0
        }
        labels.push_back(std::move(next));
    }
    return labels;
}

VertexFeatureMatrix wl_vertex_features(const std::vector<std::vector<int>> &labels_by_iteration,
                                       int graph_id, const FeatureIndex &index) {
    if (index.kind != FeatureKind::wl_subtree)
        throw ArgumentError("wl_vertex_features: index kind mismatch");
    VertexFeatureMatrix vfm;
    vfm.graph_id = graph_id;
    vfm.dimension = index.dimension();
    const std::size_t n = labels_by_iteration.empty() ? 0 : labels_by_iteration[0].size();
    vfm.rows.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        SparseRow &row = vfm.rows[v];
        for (const auto &labels : labels_by_iteration) {
            int l = labels[v];
            if (l == 0)
                continue;
            auto it = index.column_of.find(FeatureKey{l, 0, 0});
            if (it != index.column_of.end())
                row.emplace_back(it->second, 1);
        }
        std::sort(row.begin(), row.end());
    }
    return vfm;
}

VertexFeatureMatrix wl_vertex_features(const WlRefinement &refinement, int graph_id,
                                       const FeatureIndex &index) {
    if (graph_id < 0 || static_cast<std::size_t>(graph_id) >= refinement.labels_per_iteration.size())
        throw ArgumentError("wl_vertex_features: unknown graph_id " + std::to_string(graph_id));
    return wl_vertex_features(refinement.labels_per_iteration[static_cast<std::size_t>(graph_id)],
                              graph_id, index);
}

// --- Shortest paths ----------------------------------------------------------

namespace {

template <typename Fn>
void sp_scan(const Graph &g, Fn &&per_vertex_key) {
    for (int v = 0; v < g.num_vertices(); ++v) {
        auto dist = bfs_distances(g, v);
        for (int t = 0; t < g.num_vertices(); ++t) {
            if (t == v || dist[static_cast<std::size_t>(t)] == kUnreachable)
                continue;
            per_vertex_key(v, FeatureKey{g.vertex_labels[static_cast<std::size_t>(v)],
                                         g.vertex_labels[static_cast<std::size_t>(t)],
                                         dist[static_cast<std::size_t>(t)]});
        }
    }
}

} // namespace

VertexFeatureMatrix sp_vertex_features(const Graph &g, int graph_id, const FeatureIndex &index) {
    if (index.kind != FeatureKind::shortest_path)
        throw ArgumentError("sp_vertex_features: index kind mismatch");
    VertexFeatureMatrix vfm;
    vfm.graph_id = graph_id;
    vfm.dimension = index.dimension();
    vfm.rows.resize(static_cast<std::size_t>(g.num_vertices()));
    std::vector<std::map<int, std::int64_t>> acc(vfm.rows.size());
    sp_scan(g, [&](int v, const FeatureKey &key) {
        auto it = index.column_of.find(key);
        if (it != index.column_of.end())
            ++acc[static_cast<std::size_t>(v)][it->second];
    });
    for (std::size_t v = 0; v < acc.size(); ++v)
        vfm.rows[v].assign(acc[v].begin(), acc[v].end());
    return vfm;
}

// --- Graphlets ---------------------------------------------------------------

namespace {

int pair_count(int k) { return k * (k - 1) / 2; }

// bit position of the (i, j) pair, i < j, in row-major pair order
int pair_bit(int k, int i, int j) { return i * k - i * (i + 1) / 2 + (j - i - 1); }

std::vector<std::int32_t> build_canon_table(int k) {
    std::vector<std::int32_t> table;
    const int bits = pair_count(k);
    const std::int32_t size = static_cast<std::int32_t>(1) << bits;
    table.assign(static_cast<std::size_t>(size), 0);
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    // bit remap of every permutation, precomputed
    std::vector<std::vector<int>> remaps;
    do {
        std::vector<int> remap(static_cast<std::size_t>(bits));
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j) {
                int pi = perm[static_cast<std::size_t>(i)], pj = perm[static_cast<std::size_t>(j)];
                remap[static_cast<std::size_t>(pair_bit(k, i, j))] =
                    pair_bit(k, std::min(pi, pj), std::max(pi, pj));
            }
        remaps.push_back(std::move(remap));
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (std::int32_t mask = 0; mask < size; ++mask) {
        std::int32_t best = mask;
        for (const auto &remap : remaps) {
            std::int32_t image = 0;
            for (int b = 0; b < bits; ++b)
                if (mask & (1 << b))
                    image |= 1 << remap[static_cast<std::size_t>(b)];
            best = std::min(best, image);
        }
        table[static_cast<std::size_t>(mask)] = best;
    }
    return table;
}

// canon_table(k)[mask] = minimal mask over all k! vertex permutations;
// magic statics keep the lazy build thread-safe
const std::vector<std::int32_t> &canon_table(int k) {
    static const std::vector<std::int32_t> t3 = build_canon_table(3);
    static const std::vector<std::int32_t> t4 = build_canon_table(4);
    static const std::vector<std::int32_t> t5 = build_canon_table(5);
    switch (k) {
    case 3:
        return t3;
    case 4:
        return t4;
    default:
        return t5;
    }
}

void check_graphlet_size(int k) {
    if (k < 3 || k > 5)
        throw ArgumentError("graphlet size k must be in {3, 4, 5}, got " + std::to_string(k));
}

template <typename Fn>
void gk_sample_classes(const Graph &g, int graph_id, int k, int q, std::uint64_t seed,
                       Fn &&per_vertex_class) {
    check_graphlet_size(k);
    if (q < 1)
        throw ArgumentError("gk sampling: q must be >= 1");
    const auto &table = canon_table(k);
    const int n = g.num_vertices();
    std::vector<int> members(static_cast<std::size_t>(k), -1);
    for (int v = 0; v < n; ++v) {
        auto eng = keyed_rng(seed, static_cast<std::uint64_t>(graph_id),
                             static_cast<std::uint64_t>(v));
        for (int s = 0; s < q; ++s) {
            int filled = 0;
            members[static_cast<std::size_t>(filled++)] = v;
            if (n < k) {
                // too few vertices: take everyone; remaining rows stay dummies
                for (int u = 0; u < n; ++u)
                    if (u != v)
                        members[static_cast<std::size_t>(filled++)] = u;
            } else {
                while (filled < k) {
                    int u = static_cast<int>(next_index(eng, static_cast<std::uint64_t>(n)));
                    bool dup = false;
                    for (int j = 0; j < filled; ++j)
                        dup = dup || members[static_cast<std::size_t>(j)] == u;
                    if (!dup)
                        members[static_cast<std::size_t>(filled++)] = u;
                }
            }
            std::int32_t mask = 0;
            for (int i = 0; i < filled; ++i)
                for (int j = i + 1; j < filled; ++j) {
                    int a = members[static_cast<std::size_t>(i)], b = members[static_cast<std::size_t>(j)];
                    const auto &nbrs = g.adjacency[static_cast<std::size_t>(a)];
                    if (std::binary_search(nbrs.begin(), nbrs.end(), b))
                        mask |= 1 << pair_bit(k, i, j);
                }
            per_vertex_class(v, static_cast<std::int64_t>(table[static_cast<std::size_t>(mask)]));
        }
    }
}

} // namespace

std::int64_t graphlet_canonical_class(const std::vector<std::vector<bool>> &sub_adjacency) {
    const int k = static_cast<int>(sub_adjacency.size());
    check_graphlet_size(k);
    std::int32_t mask = 0;
    for (int i = 0; i < k; ++i) {
        if (static_cast<int>(sub_adjacency[static_cast<std::size_t>(i)].size()) != k)
            throw ArgumentError("graphlet_canonical_class: matrix not square");
        if (sub_adjacency[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)])
            throw ArgumentError("graphlet_canonical_class: nonzero diagonal");
        for (int j = i + 1; j < k; ++j) {
            if (sub_adjacency[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] !=
                sub_adjacency[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)])
                throw ArgumentError("graphlet_canonical_class: matrix not symmetric");
            if (sub_adjacency[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
                mask |= 1 << pair_bit(k, i, j);
        }
    }
    return canon_table(k)[static_cast<std::size_t>(mask)];
}

VertexFeatureMatrix gk_vertex_features(const Graph &g, int graph_id, int k, int q,
                                       std::uint64_t seed, const FeatureIndex &index) {
    if (index.kind != FeatureKind::graphlet)
        throw ArgumentError("gk_vertex_features: index kind mismatch");
    VertexFeatureMatrix vfm;
    vfm.graph_id = graph_id;
    vfm.dimension = index.dimension();
    vfm.rows.resize(static_cast<std::size_t>(g.num_vertices()));
    std::vector<std::map<int, std::int64_t>> acc(vfm.rows.size());
    gk_sample_classes(g, graph_id, k, q, seed, [&](int v, std::int64_t cls) {
        auto it = index.column_of.find(FeatureKey{cls, 0, 0});
        if (it != index.column_of.end())
            ++acc[static_cast<std::size_t>(v)][it->second];
    });
    for (std::size_t v = 0; v < acc.size(); ++v)
        vfm.rows[v].assign(acc[v].begin(), acc[v].end());
    return vfm;
}

// --- Index construction ------------------------------------------------------

namespace {

FeatureIndex index_from_keys(FeatureKind kind, const FeatureParams &params,
                             const std::set<FeatureKey> &keys) {
    FeatureIndex index;
    index.kind = kind;
    index.params = params;
    index.key_of.assign(keys.begin(), keys.end());
    for (int c = 0; c < static_cast<int>(index.key_of.size()); ++c)
        index.column_of.emplace(index.key_of[static_cast<std::size_t>(c)], c);
    return index;
}

} // namespace

FeatureIndex build_wl_index(const WlRefinement &refinement, const FeatureParams &params) {
    std::set<FeatureKey> keys;
    for (const auto &graph_labels : refinement.labels_per_iteration)
        for (const auto &labels : graph_labels)
            for (int l : labels)
                if (l != 0)
                    keys.insert(FeatureKey{l, 0, 0});
    FeatureParams p = params;
    p.h = refinement.h;
    return index_from_keys(FeatureKind::wl_subtree, p, keys);
}

FeatureIndex build_sp_index(const std::vector<Graph> &graphs, const FeatureParams &params) {
    std::set<FeatureKey> keys;
    for (const auto &g : graphs)
        sp_scan(g, [&](int, const FeatureKey &key) { keys.insert(key); });
    return index_from_keys(FeatureKind::shortest_path, params, keys);
}

FeatureIndex build_gk_index(const std::vector<Graph> &graphs, const std::vector<int> &graph_ids,
                            const FeatureParams &params) {
    if (graph_ids.size() != graphs.size())
        throw ArgumentError("build_gk_index: graph_ids size must match graphs size");
    std::set<FeatureKey> keys;
    for (std::size_t i = 0; i < graphs.size(); ++i)
        gk_sample_classes(graphs[i], graph_ids[i], params.k, params.q, params.seed,
                          [&](int, std::int64_t cls) { keys.insert(FeatureKey{cls, 0, 0}); });
    return index_from_keys(FeatureKind::graphlet, params, keys);
}

FeatureIndex build_feature_index(const GraphDataset &ds, FeatureKind kind,
                                 const FeatureParams &params) {
    switch (kind) {
    case FeatureKind::wl_subtree:
        return build_wl_index(wl_refine(ds.graphs, params.h), params);
    case FeatureKind::shortest_path:
        return build_sp_index(ds.graphs, params);
    case FeatureKind::graphlet: {
        std::vector<int> ids(static_cast<std::size_t>(ds.num_graphs()));
        for (int i = 0; i < ds.num_graphs(); ++i)
            ids[static_cast<std::size_t>(i)] = i;
        return build_gk_index(ds.graphs, ids, params);
    }
    }
    throw ArgumentError("build_feature_index: unknown kind");
}

std::vector<VertexFeatureMatrix> dataset_vertex_features(const GraphDataset &ds,
                                                         const FeatureIndex &index,
                                                         const WlRefinement *refinement,
                                                         int threads) {
    if (index.kind == FeatureKind::wl_subtree && refinement == nullptr)
        throw ArgumentError("dataset_vertex_features: WL features need a refinement");
    std::vector<VertexFeatureMatrix> out(static_cast<std::size_t>(ds.num_graphs()));
    const bool refit = index.kind == FeatureKind::wl_subtree &&
                       refinement->labels_per_iteration.size() == ds.graphs.size();
    parallel_for(static_cast<std::size_t>(ds.num_graphs()), threads, [&](std::size_t i) {
        const Graph &g = ds.graphs[i];
        const int gid = static_cast<int>(i);
        switch (index.kind) {
        case FeatureKind::wl_subtree:
            out[i] = refit ? wl_vertex_features(*refinement, gid, index)
                           : wl_vertex_features(wl_apply(*refinement, g), gid, index);
            break;
        case FeatureKind::shortest_path:
            out[i] = sp_vertex_features(g, gid, index);
            break;
        case FeatureKind::graphlet:
            out[i] = gk_vertex_features(g, gid, index.params.k, index.params.q,
                                        index.params.seed, index);
            break;
        }
    });
    return out;
}

std::vector<std::int64_t> graph_feature_map(const VertexFeatureMatrix &vfm) {
    std::vector<std::int64_t> sums(static_cast<std::size_t>(vfm.dimension), 0);
    for (const auto &row : vfm.rows)
        for (auto [col, count] : row)
            sums[static_cast<std::size_t>(col)] += count;
    return sums;
}

// --- Serialization -----------------------------------------------------------

void write_feature_matrix(std::ostream &out, const VertexFeatureMatrix &vfm) {
    out << vfm.graph_id << ' ' << vfm.dimension << '\n';
    for (std::size_t v = 0; v < vfm.rows.size(); ++v) {
        out << v;
        for (auto [col, count] : vfm.rows[v])
            out << ' ' << col << ':' << count;
        out << '\n';
    }
}

VertexFeatureMatrix read_feature_matrix(std::istream &in) {
    VertexFeatureMatrix vfm;
    std::string line;
    if (!std::getline(in, line))
        throw FormatError("feature matrix: missing header line");
    {
        std::istringstream header(line);
        if (!(header >> vfm.graph_id >> vfm.dimension))
            throw FormatError("feature matrix: bad header \"" + line + "\"");
    }
    while (true) {
        auto pos = in.tellg();
        if (!std::getline(in, line))
            break;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            break;
        // a line of exactly two colon-free integers is the next matrix's header
        if (line.find(':') == std::string::npos) {
            std::istringstream probe(line);
            int a = 0, b = 0;
            if ((probe >> a >> b) && (probe >> std::ws).eof()) {
                in.seekg(pos);
                break;
            }
        }
        std::istringstream row_in(line);
        std::size_t vertex_id = 0;
        if (!(row_in >> vertex_id) || vertex_id != vfm.rows.size())
            throw FormatError("feature matrix: unexpected row \"" + line + "\"");
        SparseRow row;
        std::string entry;
        while (row_in >> entry) {
            auto colon = entry.find(':');
            if (colon == std::string::npos)
                throw FormatError("feature matrix: bad entry \"" + entry + "\"");
            try {
                row.emplace_back(std::stoi(entry.substr(0, colon)),
                                 std::stoll(entry.substr(colon + 1)));
            } catch (const std::exception &) {
                throw FormatError("feature matrix: bad entry \"" + entry + "\"");
            }
        }
        vfm.rows.push_back(std::move(row));
    }
    return vfm;
}

void write_feature_index(std::ostream &out, const FeatureIndex &index) {
    out << "kind " << feature_kind_name(index.kind) << '\n';
    switch (index.kind) {
    case FeatureKind::wl_subtree:
        out << "h " << index.params.h << '\n';
        break;
    case FeatureKind::graphlet:
        out << "k " << index.params.k << '\n'
            << "q " << index.params.q << '\n'
            << "seed " << index.params.seed << '\n';
        break;
    case FeatureKind::shortest_path:
        break;
    }
    out << "m " << index.dimension() << '\n';
    for (int c = 0; c < index.dimension(); ++c) {
        const auto &key = index.key_of[static_cast<std::size_t>(c)];
        out << c << ' ' << key[0] << ' ' << key[1] << ' ' << key[2] << '\n';
    }
}

FeatureIndex read_feature_index(std::istream &in) {
    FeatureIndex index;
    std::string field;
    if (!(in >> field) || field != "kind")
        throw FormatError("feature index: expected \"kind\"");
    std::string kind_name;
    in >> kind_name;
    index.kind = feature_kind_from_name(kind_name);
    int m = -1;
    while (in >> field) {
        if (field == "m") {
            in >> m;
            break;
        }
        if (field == "h")
            in >> index.params.h;
        else if (field == "k")
            in >> index.params.k;
        else if (field == "q")
            in >> index.params.q;
        else if (field == "seed")
            in >> index.params.seed;
        else
            throw FormatError("feature index: unknown field \"" + field + "\"");
    }
    if (m < 0)
        throw FormatError("feature index: missing dimension");
    index.key_of.resize(static_cast<std::size_t>(m));
    for (int c = 0; c < m; ++c) {
        int col = 0;
        FeatureKey key{};
        if (!(in >> col >> key[0] >> key[1] >> key[2]) || col != c)
            throw FormatError("feature index: bad column line " + std::to_string(c));
        index.key_of[static_cast<std::size_t>(c)] = key;
        index.column_of.emplace(key, c);
    }
    return index;
}

} // namespace deepmap
