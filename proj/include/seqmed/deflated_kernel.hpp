#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "seqmed/kernel.hpp"

namespace seqmed {

/// Thrown when a regularization step's inner system is too ill-conditioned to factor.
class RegularizationError : public std::runtime_error {
public:
    RegularizationError(int step, double condition);
    int step() const { return step_; }
    double condition() const { return condition_; }

private:
    int step_;
    double condition_;
};

/// Eigendecomposition of a symmetric Laplacian, eigenvalues ascending.
struct LaplacianSpectrum {
    Matrix vectors;
    Vector values;
};

LaplacianSpectrum laplacian_spectrum(const Matrix& L);

struct ApproxState;

/**
 * A base kernel deflated by a sequence of low-rank corrections:
 *
 *   k_s(a, b) = k_{s-1}(a, b) - U_s(a) U_s(b)',   U_s(a) = k_{s-1}(a, Z_s) W_s.
 *
 * A Laplacian step with anchors Z = X_t and M = 2 beta L_t uses W W' = F (I + F'KF)^{-1} F'
 * with F F' = M and K = k_{s-1}(X_t, X_t). This equals M (I + K M)^{-1}, the inverse-free
 * rearrangement of ((2 beta L)^{-1} + K)^{-1}, and stays defined when L is singular.
 *
 * For each anchor the factors U_r(Z_s), r < s, are cached, so evaluating the kernel on new
 * points costs one pass over the anchors instead of a recursion over earlier kernels.
 */
class DeflatedKernel {
public:
    using Factors = std::vector<Matrix>;

    struct Anchor {
        int step = 0;
        Matrix Z;
        Matrix W;
        Factors prior_factors;
    };

    DeflatedKernel() = default;
    explicit DeflatedKernel(KernelSpec base);

    void push_laplacian(const Matrix& X, const LaplacianSpectrum& spectrum, double beta, int step);

    /// Adds the averaged-spectrum surrogate as the first correction. No-op when B = 0.
    void push_spectral(const ApproxState& state, int step = 0);

    std::size_t depth() const { return anchors_.size(); }
    const std::vector<Anchor>& anchors() const { return anchors_; }
    const KernelSpec& base() const { return base_; }

    Factors factors(const Matrix& A) const;

    /// Completes f with the anchors it does not cover yet.
    void extend(const Matrix& A, Factors& f) const;

    /// Coefficients g_s with sum_s U_s(x) z_s = sum_s k(x, Z_s) g_s, by back-substitution
    /// through the cached factors. z holds one vector per anchor.
    std::vector<Vector> base_coefficients(std::vector<Vector> z) const;

    /// Gram under the first `max_anchors` corrections (all by default).
    Matrix gram(const Matrix& A, const Matrix& B, std::size_t max_anchors = npos) const;
    Matrix gram(const Matrix& A, std::size_t max_anchors = npos) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    void extend_to(const Matrix& A, Factors& f, std::size_t upto) const;

    KernelSpec base_;
    std::vector<Anchor> anchors_;
};

}  // namespace seqmed
