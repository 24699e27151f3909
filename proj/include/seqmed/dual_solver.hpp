#pragma once

#include <span>
#include <vector>

#include "seqmed/types.hpp"

namespace seqmed {

/**
 * One time point's dual:
 *
 *   maximize  -1/2 a'Qa + a'w + sum_i log(1 - a_i / C)
 *   subject to y'a = 0, a >= 0
 *
 * Q = Y K Y has the labels folded in. w carries the prior-margin weights
 * 1 - Y * (prior decision values); it is exactly the ones vector for a fresh model.
 */
struct DualProblem {
    Matrix Q;
    Vector w;
    Vector y;
    double C = 1.0;

    void validate() const;
};

struct SolverOptions {
    double tol = 1e-6;
    long max_iter = 100000;
    // Records the objective after every pair update (O(n^2) per step, tests only).
    bool record_trace = false;
};

enum class SolveStatus { converged, max_iter_reached, degenerate };

struct DualSolution {
    Vector alpha;
    double bias = 0.0;
    double objective = 0.0;
    double kkt_residual = 0.0;
    long iterations = 0;
    SolveStatus status = SolveStatus::converged;
    std::vector<double> trace;

    bool converged() const { return status == SolveStatus::converged; }
    bool degenerate() const { return status == SolveStatus::degenerate; }
};

/// Coefficients at or below this are treated as exactly zero.
inline double sv_threshold(double C) { return 1e-6 * C; }

/// Largest value any multiplier is allowed to take; the barrier keeps iterates below C.
inline double alpha_cap(double C) { return C * (1.0 - 1e-8); }

double dual_objective(const DualProblem& problem, const Vector& alpha);

/**
 * Maximal KKT violation max_{i in up} y_i g_i - min_{j in low} y_j g_j (clamped at 0),
 * where g is the objective gradient and up/low are the index sets along which y_i a_i
 * may increase/decrease without leaving the feasible set.
 */
double kkt_residual(const DualProblem& problem, const Vector& alpha);

/**
 * Pair-coordinate ascent: each step moves the maximal violating pair along the
 * direction that preserves y'a = 0 and solves the one-dimensional concave
 * sub-problem by safeguarded Newton. Starts from a = 0.
 */
DualSolution solve_dual(const DualProblem& problem, const SolverOptions& options = {});

struct BiasFit {
    double bias = 0.0;
    bool empty = false;
};

/// argmin_b sum_s |r_s - b|: the median, midpoint of the middle pair for even counts.
BiasFit fit_bias(std::span<const double> residuals);

}  // namespace seqmed
