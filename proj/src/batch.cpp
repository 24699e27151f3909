#include "seqmed/batch.hpp"

#include <stdexcept>
#include <string>

namespace seqmed {

std::vector<Eigen::Index> Batch::labeled_indices() const {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y(i) != 0.0) idx.push_back(i);
    }
    return idx;
}

void Batch::validate() const {
    if (X.rows() != y.size()) {
        throw std::invalid_argument("batch: " + std::to_string(X.rows()) + " rows but " +
                                    std::to_string(y.size()) + " labels");
    }
    if (X.rows() == 0) throw std::invalid_argument("batch: empty");
    if (!X.allFinite()) throw std::invalid_argument("batch: non-finite feature value");
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y(i) != 1.0 && y(i) != -1.0 && y(i) != 0.0) {
            throw std::invalid_argument("batch: label at row " + std::to_string(i) +
                                        " is not in {-1, 0, 1}");
        }
    }
}

Matrix select_rows(const Matrix& X, const std::vector<Eigen::Index>& idx) {
    Matrix out(static_cast<Eigen::Index>(idx.size()), X.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = X.row(idx[r]);
    return out;
}

Vector select_entries(const Vector& v, const std::vector<Eigen::Index>& idx) {
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) out(static_cast<Eigen::Index>(r)) = v(idx[r]);
    return out;
}

Batch concatenate(const std::vector<Batch>& batches) {
    Batch out;
    out.t = 1;
    if (batches.empty()) return out;
    Eigen::Index rows = 0;
    for (const auto& b : batches) rows += b.X.rows();
    out.X.resize(rows, batches.front().X.cols());
    out.y.resize(rows);
    Eigen::Index at = 0;
    for (const auto& b : batches) {
        if (b.X.cols() != out.X.cols()) throw std::invalid_argument("concatenate: feature dimension mismatch");
        out.X.middleRows(at, b.X.rows()) = b.X;
        out.y.segment(at, b.y.size()) = b.y;
        at += b.X.rows();
    }
    return out;
}

}  // namespace seqmed
