#include "deepmap/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "deepmap/errors.hpp"

namespace deepmap {

GramMatrix gram_matrix(const std::vector<std::vector<std::int64_t>> &graph_features) {
    GramMatrix K;
    K.n = static_cast<int>(graph_features.size());
    const std::size_t m = graph_features.empty() ? 0 : graph_features[0].size();
    for (const auto &phi : graph_features)
        if (phi.size() != m)
            throw IntegrityError("gram_matrix: feature dimension mismatch");
    K.values.assign(static_cast<std::size_t>(K.n) * static_cast<std::size_t>(K.n), 0.0);
    for (int i = 0; i < K.n; ++i) {
        for (int j = i; j < K.n; ++j) {
            __int128 dot = 0;
            const auto &a = graph_features[static_cast<std::size_t>(i)];
            const auto &b = graph_features[static_cast<std::size_t>(j)];
            for (std::size_t c = 0; c < m; ++c)
                dot += static_cast<__int128>(a[c]) * static_cast<__int128>(b[c]);
            const double v = static_cast<double>(dot);
            K.values[static_cast<std::size_t>(i) * static_cast<std::size_t>(K.n) + static_cast<std::size_t>(j)] = v;
            K.values[static_cast<std::size_t>(j) * static_cast<std::size_t>(K.n) + static_cast<std::size_t>(i)] = v;
        }
    }
    return K;
}

double min_eigenvalue(const GramMatrix &K, double tol) {
    const int n = K.n;
    if (n == 0)
        throw ArgumentError("min_eigenvalue: empty matrix");
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(K.at(i, j) - K.at(j, i)) > 1e-9)
                throw ArgumentError("min_eigenvalue: matrix not symmetric");

    std::vector<double> a = K.values;
    auto at = [&](int i, int j) -> double & {
        return a[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
    };
    double frob = 0.0;
    for (double v : a)
        frob += v * v;
    frob = std::sqrt(frob);
    const double target = std::max(tol * frob, 1e-300);

    // cyclic Jacobi: sweep all off-diagonal pairs until their norm is spent
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                off += 2.0 * at(i, j) * at(i, j);
        if (std::sqrt(off) <= target)
            break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = at(p, q);
                if (apq == 0.0)
                    continue;
                const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = at(k, p), akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = at(p, k), aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    double min_diag = at(0, 0);
    for (int i = 1; i < n; ++i)
        min_diag = std::min(min_diag, at(i, i));
    return min_diag;
}

std::vector<double> normalize_features(const std::vector<double> &v) {
    double norm = 0.0;
    for (double x : v)
        norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0)
        return v;
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out[i] = v[i] / norm;
    return out;
}

SampleVector normalize_sample(const SampleVector &v) {
    double norm = 0.0;
    for (auto [_, x] : v)
        norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0)
        return v;
    SampleVector out = v;
    for (auto &[_, x] : out)
        x /= norm;
    return out;
}

SampleVector to_sample_vector(const std::vector<std::int64_t> &counts) {
    SampleVector out;
    for (std::size_t c = 0; c < counts.size(); ++c)
        if (counts[c] != 0)
            out.emplace_back(static_cast<int>(c), static_cast<double>(counts[c]));
    return out;
}

BinaryLogregGrad binary_logreg_loss_grad(const std::vector<double> &w, double b,
                                         const std::vector<SampleVector> &features,
                                         const std::vector<int> &targets01, double l2_strength) {
    if (features.size() != targets01.size() || features.empty())
        throw ArgumentError("binary_logreg_loss_grad: shape mismatch");
    BinaryLogregGrad out;
    out.grad_w.assign(w.size(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        double score = b;
        for (auto [col, x] : features[i])
            score += w[static_cast<std::size_t>(col)] * x;
        // numerically stable log(1 + exp(.)) split by sign
        const double y = static_cast<double>(targets01[i]);
        const double margin = score * (2.0 * y - 1.0);
        out.loss += (margin > 0 ? std::log1p(std::exp(-margin))
                                : -margin + std::log1p(std::exp(margin))) *
                    inv_n;
        const double p = 1.0 / (1.0 + std::exp(-score));
        const double delta = (p - y) * inv_n;
        out.grad_b += delta;
        for (auto [col, x] : features[i])
            out.grad_w[static_cast<std::size_t>(col)] += delta * x;
    }
    for (std::size_t c = 0; c < w.size(); ++c) {
        out.loss += 0.5 * l2_strength * w[c] * w[c];
        out.grad_w[c] += l2_strength * w[c];
    }
    return out;
}

LinearModel logreg_train(const std::vector<SampleVector> &features,
                         const std::vector<int> &labels, int class_count, double l2_strength,
                         int epochs, double learning_rate, std::uint64_t seed) {
    (void)seed; // zero init is already deterministic
    if (features.size() != labels.size() || features.empty())
        throw ArgumentError("logreg_train: shape mismatch");
    if (class_count < 2)
        throw ArgumentError("logreg_train: class_count must be >= 2");
    for (int l : labels)
        if (l < 0 || l >= class_count)
            throw ArgumentError("logreg_train: label out of range");
    std::set<int> present(labels.begin(), labels.end());
    if (present.size() < 2)
        throw TrainingError("logreg_train: training data contains a single class");

    int dim = 0;
    for (const auto &x : features)
        for (auto [col, _] : x)
            dim = std::max(dim, col + 1);

    LinearModel model;
    model.class_count = class_count;
    model.dimension = dim;
    model.weights.assign(static_cast<std::size_t>(class_count) * static_cast<std::size_t>(dim), 0.0);
    model.bias.assign(static_cast<std::size_t>(class_count), 0.0);

    std::vector<int> targets01(labels.size());
    std::vector<double> w(static_cast<std::size_t>(dim));
    for (int c = 0; c < class_count; ++c) {
        for (std::size_t i = 0; i < labels.size(); ++i)
            targets01[i] = labels[i] == c ? 1 : 0;
        std::fill(w.begin(), w.end(), 0.0);
        double b = 0.0;
        for (int e = 0; e < epochs; ++e) {
            BinaryLogregGrad g = binary_logreg_loss_grad(w, b, features, targets01, l2_strength);
            for (std::size_t j = 0; j < w.size(); ++j)
                w[j] -= learning_rate * g.grad_w[j];
            b -= learning_rate * g.grad_b;
        }
        std::copy(w.begin(), w.end(),
                  model.weights.begin() + static_cast<std::ptrdiff_t>(c) * dim);
        model.bias[static_cast<std::size_t>(c)] = b;
    }
    return model;
}

std::vector<int> logreg_predict(const LinearModel &model,
                                const std::vector<SampleVector> &features) {
    std::vector<int> out;
    out.reserve(features.size());
    for (const auto &x : features) {
        int best = 0;
        double best_score = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < model.class_count; ++c) {
            double score = model.bias[static_cast<std::size_t>(c)];
            const double *w = model.weights.data() +
                              static_cast<std::size_t>(c) * static_cast<std::size_t>(model.dimension);
            for (auto [col, v] : x)
                if (col < model.dimension)
                    score += w[col] * v;
            if (score > best_score) {
                best_score = score;
                best = c;
            }
        }
        out.push_back(best);
    }
    return out;
}

} // namespace deepmap
