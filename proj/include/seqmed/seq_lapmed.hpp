#pragma once

#include <vector>

#include "seqmed/deflated_kernel.hpp"
#include "seqmed/seq_med.hpp"

namespace seqmed {

/// Per-batch C and smoothness multiplier beta.
struct StepParams {
    double C = 0.0;
    double beta = 0.0;
};

/// C_t = 1 / (2 l_t gamma_A), beta_t = gamma_I / (2 gamma_A n_t^2).
StepParams derive_hyperparams(double gamma_A, double gamma_I, Eigen::Index labeled, Eigen::Index n);

/**
 * Running averages of batch spectra: right singular vectors (columns of V, p x r),
 * singular values s, Laplacian eigenvalues d, and B = 2 * sum of beta.
 * Vectors are ordered by descending singular value and paired by rank with the
 * descending Laplacian eigenvalues.
 */
struct ApproxState {
    Matrix V;
    Vector s;
    Vector d;
    double B = 0.0;
    int count = 0;

    Eigen::Index rank() const { return s.size(); }
};

/// diag(s^2 * d)^{-1} / B, with entries of s^2 * d below 1e-12 given the inverse 1e12.
Vector approx_diagonal(const ApproxState& state);

/**
 * Folds one batch into the running averages. Each column of the batch's V is flipped
 * to agree in sign with the current average before averaging. rank = 0 uses
 * min(p, n_t). Sets *truncated when the rank had to shrink to stay consistent.
 */
ApproxState approx_update(const ApproxState& state, const Matrix& X, const Matrix& L, double beta,
                          int rank = 0, bool* truncated = nullptr);
ApproxState approx_update(const ApproxState& state, const Matrix& X, const LaplacianSpectrum& spectrum,
                          double beta, int rank = 0, bool* truncated = nullptr);

/**
 * k~(a, b) = k(a, b) - k(a, V) [diag(s^2 d)^{-1} / B + k(V, V)]^{-1} k(V, b), with the
 * columns of V used as pseudo-samples. Returns the base Gram when B = 0.
 */
Matrix approx_prior_gram(const ApproxState& state, const Matrix& A, const Matrix& B,
                         const KernelSpec& base);

enum class LapMode { exact, approx };

std::string to_string(LapMode mode);
LapMode lap_mode_from_string(std::string_view name);

struct LapConfig {
    double gamma_A = 0.005;
    double gamma_I = 0.0;
    LapMode mode = LapMode::exact;
    int knn = 20;
    double heat_width = 0.01;
    int rank = 0;             // spectral surrogate rank, 0 = min(p, n_t)
    double C_override = 0.0;  // > 0 replaces the mapped C_t
    SolverOptions solver;
};

/// Everything kept about one fitted time point.
struct LapStep {
    int t = 0;
    StepParams params;
    Matrix X;                           // full batch, unlabeled rows included
    Vector y;                           // 0 marks unlabeled
    Matrix laplacian;                   // L_t; empty when no graph was built
    std::vector<Eigen::Index> labeled;  // selector J, strictly increasing
    Matrix sv_samples;
    Vector coefficients;                // signed y * alpha on support vectors
};

/**
 * Semi-supervised sequential Laplacian MED.
 *
 * Exact mode regularizes the kernel with every batch's graph Laplacian through the
 * deflation recursion. Approx mode replaces all batches before the previous two with
 * the averaged-spectrum surrogate and applies the current batch's Laplacian exactly
 * on top of it.
 */
class SeqLapMedModel {
public:
    SeqLapMedModel(KernelSpec kernel, LapConfig config);

    FitReport partial_fit(const Batch& batch);

    Vector decision_values(const Matrix& X) const;
    IndexVector predict(const Matrix& X) const;

    /// Gram under the current regularized kernel.
    Matrix regularized_gram(const Matrix& A, const Matrix& B) const;

    /// Gram under the exact recursive kernel after `depth` steps (exact mode only).
    Matrix regularized_gram_exact(const Matrix& A, const Matrix& B, int depth) const;

    const KernelSpec& kernel() const { return base_; }
    const LapConfig& config() const { return config_; }
    const std::vector<LapStep>& steps() const { return steps_; }
    const ApproxState& running_state() const { return running_; }
    const ApproxState& prior_state() const { return prior_; }
    std::size_t prior_steps() const { return prior_steps_; }
    const DeflatedKernel& current_kernel() const { return kernel_; }
    double bias() const { return bias_; }
    int time() const { return t_; }
    std::size_t support_vector_count() const;

    static SeqLapMedModel restore(KernelSpec kernel, LapConfig config, std::vector<LapStep> steps,
                                  ApproxState running, ApproxState prior, std::size_t prior_steps,
                                  double bias, int t);

private:
    void rebuild_kernel();
    void refresh_sv_factors();
    void refresh_expansion();
    Vector decision_without_bias(const Matrix& X) const;
    Vector decision_without_bias(const Matrix& X, const DeflatedKernel::Factors& fx) const;

    KernelSpec base_;
    LapConfig config_;
    std::vector<LapStep> steps_;
    std::vector<LaplacianSpectrum> spectra_;  // parallel to steps_
    ApproxState running_;                     // averages over every stored step
    ApproxState prior_;                       // surrogate inside the current kernel
    std::size_t prior_steps_ = 0;             // steps folded into prior_
    DeflatedKernel kernel_;
    std::vector<DeflatedKernel::Factors> sv_factors_;
    // decision function as a base-kernel expansion: f(x) = k(x, expansion_points_) expansion_weights_
    Matrix expansion_points_;
    Vector expansion_weights_;
    double bias_ = 0.0;
    int t_ = 0;
};

}  // namespace seqmed
