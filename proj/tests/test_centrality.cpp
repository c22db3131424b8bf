#include <cmath>

#include "doctest.h"

#include "deepmap/centrality.hpp"
#include "deepmap/errors.hpp"
#include "deepmap/golden.hpp"
#include "deepmap/graph.hpp"
#include "deepmap/rng.hpp"
#include "fixtures.hpp"

using namespace deepmap;

namespace {

double l2_norm(const std::vector<double> &xs) {
    double s = 0.0;
    for (double x : xs)
        s += x * x;
    return std::sqrt(s);
}

// Rayleigh residual ||(A+I)x - lambda x||_2 for the shifted matrix the
// iteration actually works with.
double residual(const Graph &g, const std::vector<double> &x) {
    const int n = g.num_vertices();
    std::vector<double> ax(static_cast<std::size_t>(n), 0.0);
    for (int v = 0; v < n; ++v) {
        double s = x[static_cast<std::size_t>(v)];
        for (int u : g.adjacency[static_cast<std::size_t>(v)])
            s += x[static_cast<std::size_t>(u)];
        ax[static_cast<std::size_t>(v)] = s;
    }
    double lambda = 0.0;
    for (int v = 0; v < n; ++v)
        lambda += x[static_cast<std::size_t>(v)] * ax[static_cast<std::size_t>(v)];
    double r = 0.0;
    for (int v = 0; v < n; ++v) {
        const double d =
            ax[static_cast<std::size_t>(v)] - lambda * x[static_cast<std::size_t>(v)];
        r += d * d;
    }
    return std::sqrt(r);
}

} // namespace

TEST_CASE("worked-example centralities match to two decimals") {
    for (bool second : {false, true}) {
        const Graph g = second ? alignment_demo_graph_b() : alignment_demo_graph_a();
        const auto expected = second ? alignment_demo_expected_b().centrality
                                     : alignment_demo_expected_a().centrality;
        const CentralityVector res = eigenvector_centrality(g);
        CHECK(res.converged);
        REQUIRE(res.scores.size() == expected.size());
        for (std::size_t v = 0; v < expected.size(); ++v)
            CHECK(std::round(res.scores[v] * 100.0) / 100.0 ==
                  doctest::Approx(expected[v]).epsilon(1e-12));
    }
}

TEST_CASE("cycle graphs have uniform centrality 1/sqrt(n)") {
    for (int n : {3, 4, 7, 12}) {
        const CentralityVector res = eigenvector_centrality(fixtures::cycle_graph(n));
        CHECK(res.converged);
        for (double s : res.scores)
            CHECK(s ==
                  doctest::Approx(1.0 / std::sqrt(static_cast<double>(n))).epsilon(1e-6));
    }
}

TEST_CASE("path P3 centrality is (0.5, 1/sqrt(2), 0.5)") {
    const CentralityVector res = eigenvector_centrality(fixtures::path_graph(3));
    CHECK(res.converged);
    CHECK(res.scores[0] == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(res.scores[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-4));
    CHECK(res.scores[2] == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("star hub dominates the leaves") {
    const CentralityVector res = eigenvector_centrality(fixtures::star_graph(6));
    CHECK(res.converged);
    for (std::size_t leaf = 1; leaf < res.scores.size(); ++leaf) {
        CHECK(res.scores[0] > res.scores[leaf]);
        CHECK(res.scores[leaf] == doctest::Approx(res.scores[1]).epsilon(1e-9));
    }
}

TEST_CASE("edgeless graph: uniform scores, converged flag set") {
    const Graph g = make_graph(5, {}, {1, 1, 1, 1, 1});
    const CentralityVector res = eigenvector_centrality(g);
    CHECK(res.converged);
    for (double s : res.scores)
        CHECK(s == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-12));
}

TEST_CASE("scores are nonnegative with unit L2 norm") {
    auto rng = keyed_rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const Graph g = fixtures::random_graph(rng, 1, 14, 3);
        const CentralityVector res = eigenvector_centrality(g);
        CHECK(res.converged);
        for (double s : res.scores)
            CHECK(s >= 0.0);
        CHECK(l2_norm(res.scores) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("permutation equivariance: c(pi(G)) = pi(c(G))") {
    auto rng = keyed_rng(32);
    for (int trial = 0; trial < 15; ++trial) {
        const Graph g = fixtures::random_graph(rng, 2, 15, 3);
        const Permutation p = fixtures::random_permutation(rng, g.num_vertices());
        const auto base = eigenvector_centrality(g).scores;
        const auto permuted = eigenvector_centrality(permute_graph(g, p)).scores;
        for (int v = 0; v < g.num_vertices(); ++v) {
            const auto image =
                static_cast<std::size_t>(p.mapping[static_cast<std::size_t>(v)]);
            CHECK(permuted[image] ==
                  doctest::Approx(base[static_cast<std::size_t>(v)]).epsilon(1e-8));
        }
    }
}

TEST_CASE("converged scores are near an eigenvector of A + I") {
    auto rng = keyed_rng(33);
    const double tol = 1e-6; // the documented default
    for (int trial = 0; trial < 15; ++trial) {
        const Graph g = fixtures::random_graph(rng, 2, 12, 3);
        const CentralityVector res = eigenvector_centrality(g, tol);
        REQUIRE(res.converged);
        CHECK(residual(g, res.scores) < 10.0 * tol * static_cast<double>(g.num_vertices()));
    }
}

TEST_CASE("bipartite even cycle still converges thanks to the +I shift") {
    const CentralityVector res = eigenvector_centrality(fixtures::cycle_graph(4));
    CHECK(res.converged);
    for (double s : res.scores)
        CHECK(s == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("centrality rejects an empty graph and a bad tolerance") {
    Graph g;
    CHECK_THROWS_AS(eigenvector_centrality(g), ArgumentError);
    CHECK_THROWS_AS(eigenvector_centrality(fixtures::path_graph(2), 0.0), ArgumentError);
}
