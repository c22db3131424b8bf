#include "deepmap/tu_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "deepmap/errors.hpp"

namespace deepmap {

namespace {

std::vector<std::string> read_lines(const std::filesystem::path &file, bool mandatory) {
    std::ifstream in(file);
    if (!in) {
        if (mandatory)
            throw MissingInputError("missing mandatory dataset file: " + file.string());
        return {};
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        // trailing blank lines are tolerated, interior ones are not meaningful
        if (line.find_first_not_of(" \t") == std::string::npos)
            continue;
        lines.push_back(line);
    }
    return lines;
}

long parse_int(const std::string &text, const std::filesystem::path &file, std::size_t line_no) {
    try {
        std::size_t pos = 0;
        long v = std::stol(text, &pos);
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t'))
            ++pos;
        if (pos != text.size())
            throw std::invalid_argument("trailing garbage");
        return v;
    } catch (const std::exception &) {
        throw FormatError(file.string() + ":" + std::to_string(line_no) +
                          ": expected an integer, got \"" + text + "\"");
    }
}

} // namespace

GraphDataset parse_tu_dataset(const std::filesystem::path &directory,
                              const std::string &dataset_name, TuParseStats *stats) {
    const auto path_of = [&](const std::string &suffix) {
        return directory / (dataset_name + suffix);
    };
    auto indicator_lines = read_lines(path_of("_graph_indicator.txt"), true);
    auto edge_lines = read_lines(path_of("_A.txt"), true);
    auto graph_label_lines = read_lines(path_of("_graph_labels.txt"), true);
    auto node_label_lines = read_lines(path_of("_node_labels.txt"), false);

    const std::size_t total_vertices = indicator_lines.size();
    const std::size_t num_graphs = graph_label_lines.size();
    if (num_graphs == 0)
        throw FormatError(path_of("_graph_labels.txt").string() + ": no graphs");

    // Vertex -> graph assignment; vertices of a graph must be contiguous in
    // the TU layout, but we only rely on the indicator values themselves.
    std::vector<int> graph_of(total_vertices);
    std::vector<int> local_index(total_vertices);
    std::vector<int> vertex_count(num_graphs, 0);
    for (std::size_t i = 0; i < total_vertices; ++i) {
        long gid = parse_int(indicator_lines[i], path_of("_graph_indicator.txt"), i + 1);
        if (gid < 1 || static_cast<std::size_t>(gid) > num_graphs)
            throw IntegrityError(path_of("_graph_indicator.txt").string() + ":" +
                                 std::to_string(i + 1) + ": graph id " + std::to_string(gid) +
                                 " out of range [1, " + std::to_string(num_graphs) + "]");
        graph_of[i] = static_cast<int>(gid - 1);
        local_index[i] = vertex_count[static_cast<std::size_t>(gid - 1)]++;
    }

    std::vector<std::vector<std::pair<int, int>>> edges(num_graphs);
    int self_loops = 0;
    for (std::size_t i = 0; i < edge_lines.size(); ++i) {
        const std::string &line = edge_lines[i];
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw FormatError(path_of("_A.txt").string() + ":" + std::to_string(i + 1) +
                              ": expected \"i, j\", got \"" + line + "\"");
        long u = parse_int(line.substr(0, comma), path_of("_A.txt"), i + 1);
        long v = parse_int(line.substr(comma + 1), path_of("_A.txt"), i + 1);
        if (u < 1 || v < 1 || static_cast<std::size_t>(u) > total_vertices ||
            static_cast<std::size_t>(v) > total_vertices)
            throw IntegrityError(path_of("_A.txt").string() + ":" + std::to_string(i + 1) +
                                 ": vertex id out of range");
        std::size_t ui = static_cast<std::size_t>(u - 1), vi = static_cast<std::size_t>(v - 1);
        if (graph_of[ui] != graph_of[vi])
            throw IntegrityError(path_of("_A.txt").string() + ":" + std::to_string(i + 1) +
                                 ": edge crosses graph boundary");
        if (ui == vi) {
            ++self_loops;
            continue;
        }
        edges[static_cast<std::size_t>(graph_of[ui])].emplace_back(local_index[ui],
                                                                   local_index[vi]);
    }
    if (stats)
        stats->self_loops_dropped = self_loops;

    std::vector<int> node_labels;
    if (!node_label_lines.empty()) {
        if (node_label_lines.size() != total_vertices)
            throw FormatError(path_of("_node_labels.txt").string() + ": " +
                              std::to_string(node_label_lines.size()) + " labels for " +
                              std::to_string(total_vertices) + " vertices");
        node_labels.resize(total_vertices);
        long min_label = std::numeric_limits<long>::max();
        for (std::size_t i = 0; i < total_vertices; ++i) {
            long l = parse_int(node_label_lines[i], path_of("_node_labels.txt"), i + 1);
            min_label = std::min(min_label, l);
            node_labels[i] = static_cast<int>(l);
        }
        if (min_label < 1)
            for (auto &l : node_labels)
                l += static_cast<int>(1 - min_label);
    }

    GraphDataset ds;
    ds.name = dataset_name;
    ds.graphs.reserve(num_graphs);
    std::vector<std::vector<int>> per_graph_labels(num_graphs);
    if (!node_labels.empty()) {
        for (std::size_t g = 0; g < num_graphs; ++g)
            per_graph_labels[g].resize(static_cast<std::size_t>(vertex_count[g]));
        for (std::size_t i = 0; i < total_vertices; ++i)
            per_graph_labels[static_cast<std::size_t>(graph_of[i])]
                            [static_cast<std::size_t>(local_index[i])] = node_labels[i];
    }
    for (std::size_t g = 0; g < num_graphs; ++g)
        ds.graphs.push_back(make_graph(vertex_count[g], edges[g], per_graph_labels[g]));

    // Class labels remapped onto dense [0, C) in ascending raw order.
    std::vector<long> raw(num_graphs);
    std::map<long, int> dense;
    for (std::size_t g = 0; g < num_graphs; ++g) {
        raw[g] = parse_int(graph_label_lines[g], path_of("_graph_labels.txt"), g + 1);
        dense.emplace(raw[g], 0);
    }
    int next = 0;
    for (auto &[_, id] : dense)
        id = next++;
    ds.class_count = next;
    ds.class_labels.reserve(num_graphs);
    for (std::size_t g = 0; g < num_graphs; ++g)
        ds.class_labels.push_back(dense.at(raw[g]));

    validate_dataset(ds);
    return ds;
}

void write_tu_dataset(const GraphDataset &ds, const std::filesystem::path &directory,
                      const std::string &dataset_name) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    const auto path_of = [&](const std::string &suffix) {
        return directory / (dataset_name + suffix);
    };
    std::ofstream a(path_of("_A.txt")), ind(path_of("_graph_indicator.txt")),
        gl(path_of("_graph_labels.txt")), nl(path_of("_node_labels.txt"));
    if (!a || !ind || !gl || !nl)
        throw Error("cannot open output files under " + directory.string());

    // Global 1-based vertex ids, graphs laid out consecutively.
    long base = 0;
    for (std::size_t g = 0; g < ds.graphs.size(); ++g) {
        const Graph &graph = ds.graphs[g];
        for (int v = 0; v < graph.num_vertices(); ++v) {
            ind << (g + 1) << "\n";
            nl << graph.vertex_labels[static_cast<std::size_t>(v)] << "\n";
            for (int u : graph.adjacency[static_cast<std::size_t>(v)])
                a << (base + v + 1) << ", " << (base + u + 1) << "\n";
        }
        gl << ds.class_labels[g] << "\n";
        base += graph.num_vertices();
    }
}

} // namespace deepmap
