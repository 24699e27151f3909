#pragma once

#include "seqmed/types.hpp"

namespace seqmed {

/// Normalized graph Laplacian together with the graph parameters it was built from.
struct LaplacianMatrix {
    Matrix values;
    double heat_width = 0.0;
    int k_neighbors = 0;
};

/**
 * Heat-kernel weights w_ij = exp(-|x_i - x_j|^2 / heat_width) on the union-symmetrized
 * k-nearest-neighbor graph. Ties at the k-th distance go to the lower sample index.
 */
Matrix knn_heat_weights(const Matrix& X, int k, double heat_width);

/// L = I - D^{-1/2} W D^{-1/2}; rows and columns of isolated vertices are all zero.
Matrix normalized_laplacian(const Matrix& W);

LaplacianMatrix build_laplacian(const Matrix& X, int k, double heat_width);

}  // namespace seqmed
