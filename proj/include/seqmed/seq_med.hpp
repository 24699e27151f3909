#pragma once

#include <vector>

#include "seqmed/batch.hpp"
#include "seqmed/dual_solver.hpp"
#include "seqmed/kernel.hpp"

namespace seqmed {

/// C per time point; per_step[t-1] overrides the constant when present.
struct CSchedule {
    double constant = 10.0;
    std::vector<double> per_step;

    double at(int t) const;
};

/// Support vectors of one time point and their signed coefficients c = y * alpha.
struct HistoryStep {
    int t = 0;
    double C = 0.0;
    Matrix samples;
    Vector coefficients;
};

struct FitReport {
    int t = 0;
    Vector alpha;             // full multiplier vector of the solved sub-problem
    DualSolution solution;
    std::size_t n_support = 0;
    bool degenerate = false;  // single-class batch, nothing was learned
    bool converged = true;
    bool bias_kept = false;   // no support vectors, previous bias retained
};

/**
 * Supervised sequential MED classifier.
 *
 * The posterior mean after tau batches is sum_t k(., X_t) Y_t alpha_t; each
 * partial_fit solves the dual for the new batch with the prior margins as linear
 * weights, refits the bias on the new support vectors and appends the sparsified step.
 */
class SeqMedModel {
public:
    explicit SeqMedModel(KernelSpec kernel, CSchedule schedule = {}, SolverOptions options = {});

    /// 1 - Y * (sum over history of k(X, X_t) c_t); the bias is excluded.
    Vector prior_margin(const Batch& batch) const;

    FitReport partial_fit(const Batch& batch);

    Vector decision_values(const Matrix& X) const;

    /// Signs of the decision values, with 0 mapped to +1.
    IndexVector predict(const Matrix& X) const;

    const KernelSpec& kernel() const { return kernel_; }
    const CSchedule& schedule() const { return schedule_; }
    const SolverOptions& solver_options() const { return options_; }
    const std::vector<HistoryStep>& history() const { return history_; }
    double bias() const { return bias_; }
    int time() const { return t_; }
    std::size_t support_vector_count() const;
    Eigen::Index feature_dim() const;

    /// Rebuilds a model from stored state (deserialization).
    static SeqMedModel restore(KernelSpec kernel, CSchedule schedule, SolverOptions options,
                               std::vector<HistoryStep> history, double bias, int t);

private:
    Vector history_decision(const Matrix& X) const;

    KernelSpec kernel_;
    CSchedule schedule_;
    SolverOptions options_;
    std::vector<HistoryStep> history_;
    double bias_ = 0.0;
    int t_ = 0;
};

IndexVector sign_labels(const Vector& decision);

}  // namespace seqmed
