#pragma once

#include <vector>

#include "seqmed/types.hpp"

namespace seqmed {

/// One time point's data. Labels are +1/-1, or 0 for an unlabeled sample.
struct Batch {
    Matrix X;
    Vector y;
    int t = 0;

    Eigen::Index size() const { return X.rows(); }
    Eigen::Index labeled_count() const { return (y.array() != 0.0).count(); }
    bool fully_labeled() const { return labeled_count() == y.size(); }
    std::vector<Eigen::Index> labeled_indices() const;

    /// Throws std::invalid_argument on shape mismatch, non-finite features or bad labels.
    void validate() const;
};

/// Rows of X listed in idx, in order.
Matrix select_rows(const Matrix& X, const std::vector<Eigen::Index>& idx);
Vector select_entries(const Vector& v, const std::vector<Eigen::Index>& idx);

/// Stacks batches row-wise; the result carries time index 1.
Batch concatenate(const std::vector<Batch>& batches);

}  // namespace seqmed
