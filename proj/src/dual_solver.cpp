#include "seqmed/dual_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace seqmed {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Workspace {
    const DualProblem& p;
    Vector alpha;
    Vector Qa;  // Q * alpha, maintained incrementally
    double cap;

    double gradient(Eigen::Index i) const {
        return p.w(i) - Qa(i) - 1.0 / (p.C - alpha(i));
    }
    bool can_raise(Eigen::Index i) const {  // y_i a_i may increase
        return p.y(i) > 0 ? alpha(i) < cap : alpha(i) > 0.0;
    }
    bool can_lower(Eigen::Index i) const {  // y_i a_i may decrease
        return p.y(i) > 0 ? alpha(i) > 0.0 : alpha(i) < cap;
    }
};

struct Violation {
    Eigen::Index up = -1;
    Eigen::Index low = -1;
    double up_value = -kInf;
    double low_value = kInf;
    double gap() const { return up < 0 || low < 0 ? 0.0 : std::max(0.0, up_value - low_value); }
};

Violation maximal_violation(const Workspace& ws) {
    Violation v;
    const Eigen::Index n = ws.alpha.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double yg = ws.p.y(i) * ws.gradient(i);
        if (ws.can_raise(i) && yg > v.up_value) {
            v.up_value = yg;
            v.up = i;
        }
        if (ws.can_lower(i) && yg < v.low_value) {
            v.low_value = yg;
            v.low = i;
        }
    }
    return v;
}

// Second-order choice of the partner index, using the curvature of the full objective
// (quadratic part plus barrier) along the pair direction.
Eigen::Index select_partner(const Workspace& ws, Eigen::Index i, double up_value) {
    const auto& p = ws.p;
    const double hi = 1.0 / ((p.C - ws.alpha(i)) * (p.C - ws.alpha(i)));
    Eigen::Index best = -1;
    double best_gain = -kInf;
    for (Eigen::Index j = 0; j < ws.alpha.size(); ++j) {
        if (j == i || !ws.can_lower(j)) continue;
        const double yg = p.y(j) * ws.gradient(j);
        const double b = up_value - yg;
        if (b <= 0.0) continue;
        const double hj = 1.0 / ((p.C - ws.alpha(j)) * (p.C - ws.alpha(j)));
        double a = p.Q(i, i) + p.Q(j, j) - 2.0 * p.y(i) * p.y(j) * p.Q(i, j) + hi + hj;
        a = std::max(a, 1e-12);
        const double gain = b * b / a;
        if (gain > best_gain) {
            best_gain = gain;
            best = j;
        }
    }
    return best;
}

// Moves a_i += y_i t, a_j -= y_j t to the maximizer of the objective on [0, t_max].
void pair_step(Workspace& ws, Eigen::Index i, Eigen::Index j) {
    const auto& p = ws.p;
    const double yi = p.y(i);
    const double yj = p.y(j);
    const double ai = ws.alpha(i);
    const double aj = ws.alpha(j);

    // Hard bounds come from a coordinate reaching zero, soft ones from the cap below C.
    double t_max = kInf;
    bool i_hits_zero = false;
    bool j_hits_zero = false;
    if (yi < 0) {
        t_max = ai;
        i_hits_zero = true;
    } else {
        t_max = ws.cap - ai;
    }
    const double tj = yj > 0 ? aj : ws.cap - aj;
    if (tj < t_max) {
        t_max = tj;
        i_hits_zero = false;
        j_hits_zero = yj > 0;
    } else if (tj == t_max && yj > 0) {
        j_hits_zero = true;
    }
    t_max = std::max(t_max, 0.0);

    const double base = yi * (p.w(i) - ws.Qa(i)) - yj * (p.w(j) - ws.Qa(j));
    const double eta = p.Q(i, i) + p.Q(j, j) - 2.0 * yi * yj * p.Q(i, j);
    auto slope = [&](double t) {
        const double ci = p.C - (ai + yi * t);
        const double cj = p.C - (aj - yj * t);
        return base - t * eta - yi / ci + yj / cj;
    };
    auto curvature = [&](double t) {
        const double ci = p.C - (ai + yi * t);
        const double cj = p.C - (aj - yj * t);
        return eta + 1.0 / (ci * ci) + 1.0 / (cj * cj);
    };

    double t = t_max;
    bool at_bound = true;
    if (slope(t_max) < 0.0) {
        at_bound = false;
        double lo = 0.0;
        double hi = t_max;
        t = 0.0;
        for (int it = 0; it < 200; ++it) {
            const double s = slope(t);
            if (s > 0.0) lo = t; else hi = t;
            if (s == 0.0 || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, hi)) break;
            double next = t + s / std::max(curvature(t), 1e-300);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (next == t) break;
            t = next;
        }
        t = std::clamp(t, 0.0, t_max);
    }

    double new_ai = ai + yi * t;
    double new_aj = aj - yj * t;
    if (at_bound && i_hits_zero) new_ai = 0.0;
    if (at_bound && j_hits_zero) new_aj = 0.0;
    new_ai = std::clamp(new_ai, 0.0, ws.cap);
    new_aj = std::clamp(new_aj, 0.0, ws.cap);

    const double di = new_ai - ai;
    const double dj = new_aj - aj;
    ws.alpha(i) = new_ai;
    ws.alpha(j) = new_aj;
    ws.Qa.noalias() += p.Q.col(i) * di + p.Q.col(j) * dj;
}

}  // namespace

void DualProblem::validate() const {
    const Eigen::Index n = y.size();
    if (Q.rows() != n || Q.cols() != n || w.size() != n) {
        throw std::invalid_argument("DualProblem: Q, w and y sizes disagree");
    }
    if (!(C > 0.0) || !std::isfinite(C)) throw std::invalid_argument("DualProblem: C must be positive");
    if (!Q.allFinite() || !w.allFinite()) throw std::invalid_argument("DualProblem: non-finite entries");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (y(i) != 1.0 && y(i) != -1.0) throw std::invalid_argument("DualProblem: labels must be +1/-1");
    }
    if (n > 0) {
        const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
        if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
            throw std::invalid_argument("DualProblem: Q is not symmetric");
        }
    }
}

double dual_objective(const DualProblem& p, const Vector& alpha) {
    double barrier = 0.0;
    for (Eigen::Index i = 0; i < alpha.size(); ++i) barrier += std::log1p(-alpha(i) / p.C);
    return -0.5 * alpha.dot(p.Q * alpha) + alpha.dot(p.w) + barrier;
}

double kkt_residual(const DualProblem& p, const Vector& alpha) {
    Workspace ws{p, alpha, p.Q * alpha, alpha_cap(p.C)};
    return maximal_violation(ws).gap();
}

DualSolution solve_dual(const DualProblem& problem, const SolverOptions& options) {
    problem.validate();
    const Eigen::Index n = problem.y.size();
    DualSolution sol;
    sol.alpha = Vector::Zero(n);

    const bool has_pos = (problem.y.array() > 0).any();
    const bool has_neg = (problem.y.array() < 0).any();
    if (!has_pos || !has_neg) {
        sol.status = SolveStatus::degenerate;
        return sol;
    }

    Workspace ws{problem, Vector::Zero(n), Vector::Zero(n), alpha_cap(problem.C)};
    if (options.record_trace) sol.trace.push_back(dual_objective(problem, ws.alpha));

    constexpr long kRefreshEvery = 5000;
    long iter = 0;
    sol.status = SolveStatus::max_iter_reached;
    while (iter < options.max_iter) {
        Violation v = maximal_violation(ws);
        if (v.gap() <= options.tol) {
            // Confirm against a freshly computed gradient before declaring convergence.
            ws.Qa.noalias() = problem.Q * ws.alpha;
            v = maximal_violation(ws);
            if (v.gap() <= options.tol) {
                sol.status = SolveStatus::converged;
                break;
            }
        }
        const Eigen::Index j = select_partner(ws, v.up, v.up_value);
        if (j < 0) {
            sol.status = SolveStatus::converged;
            break;
        }
        pair_step(ws, v.up, j);
        ++iter;
        if (iter % kRefreshEvery == 0) ws.Qa.noalias() = problem.Q * ws.alpha;
        if (options.record_trace) sol.trace.push_back(dual_objective(problem, ws.alpha));
    }

    ws.Qa.noalias() = problem.Q * ws.alpha;
    sol.alpha = ws.alpha;
    sol.iterations = iter;
    sol.kkt_residual = maximal_violation(ws).gap();
    sol.objective = dual_objective(problem, sol.alpha);
    return sol;
}

BiasFit fit_bias(std::span<const double> residuals) {
    if (residuals.empty()) return {0.0, true};
    std::vector<double> r(residuals.begin(), residuals.end());
    std::sort(r.begin(), r.end());
    const std::size_t m = r.size();
    const double median = m % 2 == 1 ? r[m / 2] : 0.5 * (r[m / 2 - 1] + r[m / 2]);
    return {median, false};
}

}  // namespace seqmed
