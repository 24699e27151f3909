#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "seqmed/types.hpp"

namespace seqmed {

enum class KernelKind { linear, rbf, tfidf_linear, precomputed };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(std::string_view name);

/**
 * Base kernel k(x, x') = <f(x), f(x')>.
 *
 * rbf uses exp(-|x - x'|^2 / (2 sigma^2)) with sigma = rbf_width.
 * tfidf_linear scales raw counts by idf_weights, L2-normalizes each row
 * (zero rows stay zero) and takes dot products.
 * precomputed treats each sample as a single column holding a row/column
 * index into a stored Gram matrix.
 */
struct KernelSpec {
    KernelKind kind = KernelKind::linear;
    double rbf_width = 1.0;
    Vector idf_weights;
    std::shared_ptr<const Matrix> precomputed;

    static KernelSpec linear();
    static KernelSpec rbf(double width);
    static KernelSpec from_gram(Matrix gram);

    /// Throws std::invalid_argument when the parameters violate the kind's invariants.
    void validate() const;
};

/// Gram matrix with entry (i, j) = k(a_i, b_j). Rejects mismatched widths and non-finite input.
Matrix gram(const KernelSpec& spec, const Matrix& A, const Matrix& B);

/// Symmetric Gram of A with itself; computes the upper triangle once and mirrors it.
Matrix gram(const KernelSpec& spec, const Matrix& A);

/// idf_j = ln(N / df_j), zero for terms that never occur.
KernelSpec fit_tfidf(const Matrix& counts);

/// Idf-weighted, L2-normalized rows; the explicit feature map of the tfidf kernel.
Matrix tfidf_transform(const KernelSpec& spec, const Matrix& counts);

}  // namespace seqmed
