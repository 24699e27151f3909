#include "seqmed/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace seqmed {

namespace {

void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) {
        throw std::invalid_argument(std::string("gram: non-finite entry in ") + what);
    }
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

RowMatrix feature_rows(const KernelSpec& spec, const Matrix& X) {
    if (spec.kind == KernelKind::tfidf_linear) return tfidf_transform(spec, X);
    return X;
}

// Samples as contiguous rows. Every entry is a reduction that is symmetric in its two
// arguments, so gram(A, B) and gram(B, A)' agree bit for bit.
double entry(const KernelSpec& spec, const RowMatrix& A, Eigen::Index i, const RowMatrix& B,
             Eigen::Index j) {
    switch (spec.kind) {
        case KernelKind::linear:
        case KernelKind::tfidf_linear:
            return A.row(i).dot(B.row(j));
        case KernelKind::rbf: {
            const double d2 = (A.row(i) - B.row(j)).squaredNorm();
            return std::exp(-d2 / (2.0 * spec.rbf_width * spec.rbf_width));
        }
        case KernelKind::precomputed: {
            const auto a = static_cast<Eigen::Index>(A(i, 0));
            const auto b = static_cast<Eigen::Index>(B(j, 0));
            return (*spec.precomputed)(a, b);
        }
    }
    return 0.0;
}

void check_inputs(const KernelSpec& spec, const Matrix& A, const Matrix& B) {
    spec.validate();
    if (A.cols() != B.cols()) {
        throw std::invalid_argument("gram: feature dimension mismatch (" +
                                    std::to_string(A.cols()) + " vs " +
                                    std::to_string(B.cols()) + ")");
    }
    require_finite(A, "A");
    require_finite(B, "B");
    if (spec.kind == KernelKind::tfidf_linear && A.cols() != spec.idf_weights.size()) {
        throw std::invalid_argument("gram: tfidf weights cover " +
                                    std::to_string(spec.idf_weights.size()) +
                                    " features but input has " + std::to_string(A.cols()));
    }
    if (spec.kind == KernelKind::precomputed) {
        if (A.cols() != 1) {
            throw std::invalid_argument("gram: precomputed kernel expects one index column");
        }
        const auto n = static_cast<double>(spec.precomputed->rows());
        for (const Matrix* m : {&A, &B}) {
            for (Eigen::Index i = 0; i < m->rows(); ++i) {
                const double v = (*m)(i, 0);
                if (v < 0 || v >= n || v != std::floor(v)) {
                    throw std::invalid_argument("gram: precomputed index out of range");
                }
            }
        }
    }
}

}  // namespace

std::string to_string(KernelKind kind) {
    switch (kind) {
        case KernelKind::linear: return "linear";
        case KernelKind::rbf: return "rbf";
        case KernelKind::tfidf_linear: return "tfidf-linear";
        case KernelKind::precomputed: return "precomputed";
    }
    return "unknown";
}

KernelKind kernel_kind_from_string(std::string_view name) {
    if (name == "linear") return KernelKind::linear;
    if (name == "rbf") return KernelKind::rbf;
    if (name == "tfidf-linear" || name == "tfidf") return KernelKind::tfidf_linear;
    if (name == "precomputed") return KernelKind::precomputed;
    throw std::invalid_argument("unknown kernel kind '" + std::string(name) + "'");
}

KernelSpec KernelSpec::linear() { return KernelSpec{}; }

KernelSpec KernelSpec::rbf(double width) {
    KernelSpec spec;
    spec.kind = KernelKind::rbf;
    spec.rbf_width = width;
    spec.validate();
    return spec;
}

KernelSpec KernelSpec::from_gram(Matrix g) {
    KernelSpec spec;
    spec.kind = KernelKind::precomputed;
    spec.precomputed = std::make_shared<const Matrix>(std::move(g));
    spec.validate();
    return spec;
}

void KernelSpec::validate() const {
    switch (kind) {
        case KernelKind::linear:
            break;
        case KernelKind::rbf:
            if (!(rbf_width > 0.0) || !std::isfinite(rbf_width)) {
                throw std::invalid_argument("rbf kernel requires a positive finite width");
            }
            break;
        case KernelKind::tfidf_linear:
            if (!idf_weights.allFinite() || (idf_weights.array() < 0.0).any()) {
                throw std::invalid_argument("tfidf weights must be finite and nonnegative");
            }
            break;
        case KernelKind::precomputed:
            if (!precomputed || precomputed->rows() != precomputed->cols()) {
                throw std::invalid_argument("precomputed kernel requires a square Gram matrix");
            }
            break;
    }
}

Matrix gram(const KernelSpec& spec, const Matrix& A, const Matrix& B) {
    check_inputs(spec, A, B);
    const RowMatrix FA = feature_rows(spec, A);
    const RowMatrix FB = feature_rows(spec, B);
    Matrix K(A.rows(), B.rows());
    for (Eigen::Index j = 0; j < B.rows(); ++j) {
        for (Eigen::Index i = 0; i < A.rows(); ++i) {
            K(i, j) = entry(spec, FA, i, FB, j);
        }
    }
    return K;
}

Matrix gram(const KernelSpec& spec, const Matrix& A) {
    check_inputs(spec, A, A);
    const RowMatrix FA = feature_rows(spec, A);
    const Eigen::Index n = A.rows();
    Matrix K(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i <= j; ++i) {
            K(i, j) = entry(spec, FA, i, FA, j);
            K(j, i) = K(i, j);
        }
    }
    return K;
}

KernelSpec fit_tfidf(const Matrix& counts) {
    if (counts.rows() == 0 || counts.cols() == 0) {
        throw std::invalid_argument("fit_tfidf: empty count matrix");
    }
    if (!counts.allFinite() || (counts.array() < 0.0).any()) {
        throw std::invalid_argument("fit_tfidf: counts must be finite and nonnegative");
    }
    const auto n_docs = static_cast<double>(counts.rows());
    KernelSpec spec;
    spec.kind = KernelKind::tfidf_linear;
    spec.idf_weights = Vector::Zero(counts.cols());
    for (Eigen::Index j = 0; j < counts.cols(); ++j) {
        const auto df = static_cast<double>((counts.col(j).array() > 0.0).count());
        spec.idf_weights(j) = df > 0.0 ? std::log(n_docs / df) : 0.0;
    }
    return spec;
}

Matrix tfidf_transform(const KernelSpec& spec, const Matrix& counts) {
    if (counts.cols() != spec.idf_weights.size()) {
        throw std::invalid_argument("tfidf_transform: feature dimension mismatch");
    }
    Matrix out = counts.array().rowwise() * spec.idf_weights.transpose().array();
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double norm = out.row(i).norm();
        if (norm > 0.0) out.row(i) /= norm;
    }
    return out;
}

}  // namespace seqmed
