#include "seqmed/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace seqmed {

Matrix knn_heat_weights(const Matrix& X, int k, double heat_width) {
    const Eigen::Index n = X.rows();
    if (n < 2) throw std::invalid_argument("knn_heat_weights: need at least two samples");
    if (k < 1 || k >= n) {
        throw std::invalid_argument("knn_heat_weights: k=" + std::to_string(k) +
                                    " must lie in [1, n-1] for n=" + std::to_string(n));
    }
    if (!(heat_width > 0.0)) throw std::invalid_argument("knn_heat_weights: heat_width must be positive");
    if (!X.allFinite()) throw std::invalid_argument("knn_heat_weights: non-finite input");

    Matrix d2 = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < j; ++i) {
            d2(i, j) = (X.row(i) - X.row(j)).squaredNorm();
            d2(j, i) = d2(i, j);
        }
    }

    Matrix W = Matrix::Zero(n, n);
    std::vector<std::pair<double, Eigen::Index>> order;
    order.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        order.clear();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i) order.emplace_back(d2(i, j), j);
        }
        std::partial_sort(order.begin(), order.begin() + k, order.end());
        for (int m = 0; m < k; ++m) {
            const Eigen::Index j = order[static_cast<std::size_t>(m)].second;
            const double w = std::exp(-d2(i, j) / heat_width);
            W(i, j) = w;
            W(j, i) = w;
        }
    }
    return W;
}

Matrix normalized_laplacian(const Matrix& W) {
    const Eigen::Index n = W.rows();
    if (W.cols() != n) throw std::invalid_argument("normalized_laplacian: weight matrix must be square");
    if (!W.allFinite()) throw std::invalid_argument("normalized_laplacian: non-finite weight");
    if ((W.array() < 0.0).any()) throw std::invalid_argument("normalized_laplacian: negative weight");
    if (n > 0 && (W - W.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw std::invalid_argument("normalized_laplacian: weight matrix is not symmetric");
    }

    Vector inv_sqrt_degree(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double degree = W.row(i).sum() - W(i, i);
        inv_sqrt_degree(i) = degree > 0.0 ? 1.0 / std::sqrt(degree) : 0.0;
    }

    // The diagonal of W is ignored; the upper triangle is mirrored so L is exactly symmetric.
    Matrix L = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        if (inv_sqrt_degree(j) == 0.0) continue;
        L(j, j) = 1.0;
        for (Eigen::Index i = 0; i < j; ++i) {
            if (inv_sqrt_degree(i) == 0.0) continue;
            L(i, j) = -W(i, j) * inv_sqrt_degree(i) * inv_sqrt_degree(j);
            L(j, i) = L(i, j);
        }
    }
    return L;
}

LaplacianMatrix build_laplacian(const Matrix& X, int k, double heat_width) {
    return {normalized_laplacian(knn_heat_weights(X, k, heat_width)), heat_width, k};
}

}  // namespace seqmed
