#include "deepmap/centrality.hpp"

#include <cmath>

#include "deepmap/errors.hpp"

namespace deepmap {

CentralityVector eigenvector_centrality(const Graph &g, double tol, int max_iter) {
    const int n = g.num_vertices();
    if (n < 1)
        throw ArgumentError("eigenvector_centrality: empty graph");
    if (!(tol > 0.0))
        throw ArgumentError("eigenvector_centrality: tol must be positive");

    const std::size_t sn = static_cast<std::size_t>(n);
    std::vector<double> x(sn, 1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<double> y(sn);

    CentralityVector out;
    for (int iter = 1; iter <= max_iter; ++iter) {
        for (std::size_t v = 0; v < sn; ++v) {
            double s = x[v]; // the +I shift
            for (int u : g.adjacency[v])
                s += x[static_cast<std::size_t>(u)];
            y[v] = s;
        }
        double norm = 0.0;
        for (double s : y)
            norm += s * s;
        norm = std::sqrt(norm);
        double l1_change = 0.0;
        for (std::size_t v = 0; v < sn; ++v) {
            y[v] /= norm;
            l1_change += std::abs(y[v] - x[v]);
        }
        x.swap(y);
        out.iterations_used = iter;
        if (l1_change < static_cast<double>(n) * tol) {
            out.converged = true;
            break;
        }
    }
    out.scores = std::move(x);
    return out;
}

} // namespace deepmap
