#pragma once

#include <vector>

#include "deepmap/graph.hpp"

namespace deepmap {

struct CentralityVector {
    std::vector<double> scores; // nonnegative; L2 norm 1 when converged
    int iterations_used = 0;
    bool converged = false;
};

// Eigenvector centrality by power iteration.
//
// Iterates x <- normalize((A + I) x) from the uniform positive start vector.
// The +I shift leaves the eigenvectors of A untouched while shifting the
// spectrum by one, which makes the Perron eigenvalue strictly dominant in
// magnitude; plain A-multiplication oscillates forever on bipartite graphs
// (the spectrum is symmetric), so the shift is what makes the documented
// convergence rule attainable on e.g. paths and trees. A zero-edge graph has
// A + I = I, so the uniform start is an exact fixed point and the degenerate
// eigenproblem resolves to uniform 1/sqrt(n) with converged=true.
//
// Convergence: L1 change between successive normalized iterates < n * tol.
// Non-converged runs return the last iterate with converged=false. The
// uniform positive start keeps every iterate nonnegative (Perron–Frobenius
// direction), so nonnegativity is structural.
CentralityVector eigenvector_centrality(const Graph &g, double tol = 1e-6, int max_iter = 1000);

} // namespace deepmap
