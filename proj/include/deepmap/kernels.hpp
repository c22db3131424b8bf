#pragma once

#include <cstdint>
#include <vector>

#include "deepmap/feature_maps.hpp"

namespace deepmap {

// Pairwise kernel values K[i][j] = <phi(G_i), phi(G_j)> over explicit count
// feature maps; symmetric positive-semidefinite by construction.
struct GramMatrix {
    int n = 0;
    std::vector<double> values; // n x n row-major
    FeatureKind kind = FeatureKind::wl_subtree;
    FeatureParams params;

    double at(int i, int j) const {
        return values[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                      static_cast<std::size_t>(j)];
    }
};

// Exact integer dot products (accumulated in 128-bit integers), converted to
// real at the end. All vectors must share one dimension.
GramMatrix gram_matrix(const std::vector<std::vector<std::int64_t>> &graph_features);

// Smallest eigenvalue by cyclic Jacobi rotations; converges to absolute
// accuracy ~ tol * ||K||_F. Input must be symmetric within 1e-9.
double min_eigenvalue(const GramMatrix &K, double tol = 1e-12);

// Unit-L2 scaling; zero vectors stay zero.
std::vector<double> normalize_features(const std::vector<double> &v);

// Sparse sample vector: sorted (column, value) pairs.
using SampleVector = std::vector<std::pair<int, double>>;

SampleVector normalize_sample(const SampleVector &v);
SampleVector to_sample_vector(const std::vector<std::int64_t> &counts);

// One-vs-rest logistic regression trained by full-batch gradient descent on
// explicit (usually L2-normalized) feature vectors. Deterministic for fixed
// inputs; `seed` is kept for interface stability (initialization is zeros).
struct LinearModel {
    int class_count = 0;
    int dimension = 0;
    std::vector<double> weights; // class_count x dimension row-major
    std::vector<double> bias;    // class_count
};

LinearModel logreg_train(const std::vector<SampleVector> &features,
                         const std::vector<int> &labels, int class_count, double l2_strength,
                         int epochs, double learning_rate, std::uint64_t seed);

std::vector<int> logreg_predict(const LinearModel &model,
                                const std::vector<SampleVector> &features);

// Binary logistic objective used per class by logreg_train, exposed for
// direct verification: mean log loss + (l2/2)*||w||^2 with its gradients.
struct BinaryLogregGrad {
    double loss = 0.0;
    std::vector<double> grad_w;
    double grad_b = 0.0;
};

BinaryLogregGrad binary_logreg_loss_grad(const std::vector<double> &w, double b,
                                         const std::vector<SampleVector> &features,
                                         const std::vector<int> &targets01, double l2_strength);

} // namespace deepmap
