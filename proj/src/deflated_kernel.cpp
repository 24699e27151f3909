#include "seqmed/deflated_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "seqmed/seq_lapmed.hpp"

namespace seqmed {

namespace {

constexpr double kMaxCondition = 1e14;

Matrix symmetrized(const Matrix& M) { return 0.5 * (M + M.transpose()); }

// W with W W' = F inner^{-1} F' for symmetric positive definite inner.
Matrix inverse_sqrt_factor(const Matrix& F, const Matrix& inner, int step, bool check_condition) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(inner));
    if (eig.info() != Eigen::Success) throw RegularizationError(step, INFINITY);
    const Vector& lambda = eig.eigenvalues();
    const double lo = lambda.minCoeff();
    const double hi = lambda.maxCoeff();
    if (!(lo > 0.0)) throw RegularizationError(step, INFINITY);
    if (check_condition && hi / lo > kMaxCondition) throw RegularizationError(step, hi / lo);
    const Vector scale = lambda.cwiseSqrt().cwiseInverse();
    return F * eig.eigenvectors() * scale.asDiagonal();
}

}  // namespace

RegularizationError::RegularizationError(int step, double condition)
    : std::runtime_error([&] {
          std::ostringstream msg;
          msg << "regularization step " << step << ": inner system cannot be solved (condition "
              << condition << ")";
          return msg.str();
      }()),
      step_(step),
      condition_(condition) {}

LaplacianSpectrum laplacian_spectrum(const Matrix& L) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(L));
    if (eig.info() != Eigen::Success) throw std::runtime_error("laplacian_spectrum: eigensolver failed");
    return {eig.eigenvectors(), eig.eigenvalues()};
}

DeflatedKernel::DeflatedKernel(KernelSpec base) : base_(std::move(base)) { base_.validate(); }

void DeflatedKernel::push_laplacian(const Matrix& X, const LaplacianSpectrum& spectrum, double beta,
                                    int step) {
    if (beta < 0.0) throw std::invalid_argument("push_laplacian: beta must be nonnegative");
    if (beta == 0.0) return;
    const Vector root = (2.0 * beta * spectrum.values.cwiseMax(0.0)).cwiseSqrt();
    const Matrix F = spectrum.vectors * root.asDiagonal();

    Anchor anchor;
    anchor.step = step;
    anchor.Z = X;
    anchor.prior_factors = factors(X);
    Matrix K = ::seqmed::gram(base_, X);
    for (const auto& U : anchor.prior_factors) K.noalias() -= U * U.transpose();

    const Eigen::Index n = X.rows();
    const Matrix inner = Matrix::Identity(n, n) + F.transpose() * K * F;
    anchor.W = inverse_sqrt_factor(F, inner, step, true);
    anchors_.push_back(std::move(anchor));
}

void DeflatedKernel::push_spectral(const ApproxState& state, int step) {
    if (!anchors_.empty()) throw std::logic_error("push_spectral: the surrogate must be the first correction");
    if (state.count == 0 || state.B <= 0.0) return;
    const Eigen::Index r = state.s.size();
    Anchor anchor;
    anchor.step = step;
    anchor.Z = state.V.transpose();
    Matrix H = ::seqmed::gram(base_, anchor.Z);
    H.diagonal() += approx_diagonal(state);
    anchor.W = inverse_sqrt_factor(Matrix::Identity(r, r), H, step, false);
    anchors_.push_back(std::move(anchor));
}

DeflatedKernel::Factors DeflatedKernel::factors(const Matrix& A) const {
    Factors f;
    extend_to(A, f, anchors_.size());
    return f;
}

void DeflatedKernel::extend(const Matrix& A, Factors& f) const { extend_to(A, f, anchors_.size()); }

void DeflatedKernel::extend_to(const Matrix& A, Factors& f, std::size_t upto) const {
    for (std::size_t s = f.size(); s < upto; ++s) {
        const Anchor& anchor = anchors_[s];
        Matrix K = ::seqmed::gram(base_, A, anchor.Z);
        for (std::size_t r = 0; r < s; ++r) K.noalias() -= f[r] * anchor.prior_factors[r].transpose();
        f.push_back(K * anchor.W);
    }
}

std::vector<Vector> DeflatedKernel::base_coefficients(std::vector<Vector> z) const {
    if (z.size() != anchors_.size()) throw std::invalid_argument("base_coefficients: one vector per anchor expected");
    std::vector<Vector> g(anchors_.size());
    for (std::size_t s = anchors_.size(); s-- > 0;) {
        const Anchor& anchor = anchors_[s];
        g[s] = anchor.W * z[s];
        for (std::size_t r = 0; r < s; ++r) z[r].noalias() -= anchor.prior_factors[r].transpose() * g[s];
    }
    return g;
}

Matrix DeflatedKernel::gram(const Matrix& A, const Matrix& B, std::size_t max_anchors) const {
    Matrix K = ::seqmed::gram(base_, A, B);
    const std::size_t used = std::min(max_anchors, anchors_.size());
    if (used == 0) return K;
    Factors fa;
    Factors fb;
    extend_to(A, fa, used);
    extend_to(B, fb, used);
    for (std::size_t s = 0; s < used; ++s) K.noalias() -= fa[s] * fb[s].transpose();
    return K;
}

Matrix DeflatedKernel::gram(const Matrix& A, std::size_t max_anchors) const {
    Matrix K = ::seqmed::gram(base_, A);
    const std::size_t used = std::min(max_anchors, anchors_.size());
    if (used == 0) return K;
    Factors fa;
    extend_to(A, fa, used);
    for (std::size_t s = 0; s < used; ++s) K.noalias() -= fa[s] * fa[s].transpose();
    return symmetrized(K);
}

}  // namespace seqmed
