#include "seqmed/seq_med.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace seqmed {

double CSchedule::at(int t) const {
    if (t >= 1 && static_cast<std::size_t>(t) <= per_step.size()) return per_step[static_cast<std::size_t>(t - 1)];
    return constant;
}

IndexVector sign_labels(const Vector& decision) {
    IndexVector labels(decision.size());
    for (Eigen::Index i = 0; i < decision.size(); ++i) labels(i) = decision(i) < 0.0 ? -1 : 1;
    return labels;
}

SeqMedModel::SeqMedModel(KernelSpec kernel, CSchedule schedule, SolverOptions options)
    : kernel_(std::move(kernel)), schedule_(std::move(schedule)), options_(options) {
    kernel_.validate();
}

SeqMedModel SeqMedModel::restore(KernelSpec kernel, CSchedule schedule, SolverOptions options,
                                 std::vector<HistoryStep> history, double bias, int t) {
    SeqMedModel m(std::move(kernel), std::move(schedule), options);
    m.history_ = std::move(history);
    m.bias_ = bias;
    m.t_ = t;
    return m;
}

std::size_t SeqMedModel::support_vector_count() const {
    std::size_t n = 0;
    for (const auto& h : history_) n += static_cast<std::size_t>(h.samples.rows());
    return n;
}

Eigen::Index SeqMedModel::feature_dim() const {
    for (const auto& h : history_) {
        if (h.samples.rows() > 0) return h.samples.cols();
    }
    return -1;
}

Vector SeqMedModel::history_decision(const Matrix& X) const {
    Vector f = Vector::Zero(X.rows());
    for (const auto& step : history_) {
        if (step.samples.rows() == 0) continue;
        f.noalias() += gram(kernel_, X, step.samples) * step.coefficients;
    }
    return f;
}

Vector SeqMedModel::prior_margin(const Batch& batch) const {
    batch.validate();
    if (!batch.fully_labeled()) {
        throw std::invalid_argument("prior_margin: batch has unlabeled samples; use SeqLapMedModel");
    }
    return Vector::Ones(batch.size()) - batch.y.cwiseProduct(history_decision(batch.X));
}

FitReport SeqMedModel::partial_fit(const Batch& batch) {
    batch.validate();
    if (!batch.fully_labeled()) {
        throw std::invalid_argument("partial_fit: batch has unlabeled samples; use SeqLapMedModel");
    }
    if (batch.t != t_ + 1) {
        throw std::invalid_argument("partial_fit: expected batch t=" + std::to_string(t_ + 1) +
                                    ", got t=" + std::to_string(batch.t));
    }
    const Eigen::Index dim = feature_dim();
    if (dim >= 0 && dim != batch.X.cols()) {
        throw std::invalid_argument("partial_fit: feature dimension mismatch");
    }

    FitReport report;
    report.t = batch.t;
    const double C = schedule_.at(batch.t);

    DualProblem problem;
    const Matrix K = gram(kernel_, batch.X);
    problem.Q = batch.y.asDiagonal() * K * batch.y.asDiagonal();
    problem.w = prior_margin(batch);
    problem.y = batch.y;
    problem.C = C;

    report.solution = solve_dual(problem, options_);
    report.alpha = report.solution.alpha;
    t_ = batch.t;
    if (report.solution.degenerate()) {
        report.degenerate = true;
        return report;
    }
    report.converged = report.solution.converged();

    std::vector<Eigen::Index> sv;
    const double threshold = sv_threshold(C);
    for (Eigen::Index i = 0; i < report.alpha.size(); ++i) {
        if (report.alpha(i) > threshold) sv.push_back(i);
    }

    HistoryStep step;
    step.t = batch.t;
    step.C = C;
    step.samples = select_rows(batch.X, sv);
    step.coefficients = select_entries(batch.y.cwiseProduct(report.alpha), sv);

    // Residuals use the full decision value: history plus the new step.
    const Vector prior = history_decision(step.samples);
    std::vector<double> residuals(sv.size());
    if (!sv.empty()) {
        const Vector current = prior + select_rows(K, sv)(Eigen::all, sv) * step.coefficients;
        for (std::size_t s = 0; s < sv.size(); ++s) {
            residuals[s] = batch.y(sv[s]) - current(static_cast<Eigen::Index>(s));
        }
    }
    const BiasFit bias = fit_bias(residuals);
    if (bias.empty) {
        report.bias_kept = true;
    } else {
        bias_ = bias.bias;
    }
    report.solution.bias = bias_;
    report.n_support = sv.size();
    history_.push_back(std::move(step));
    return report;
}

Vector SeqMedModel::decision_values(const Matrix& X) const {
    const Eigen::Index dim = feature_dim();
    if (dim >= 0 && dim != X.cols()) {
        throw std::invalid_argument("decision_values: feature dimension mismatch (" +
                                    std::to_string(X.cols()) + " vs " + std::to_string(dim) + ")");
    }
    Vector f = history_decision(X);
    f.array() += bias_;
    return f;
}

IndexVector SeqMedModel::predict(const Matrix& X) const { return sign_labels(decision_values(X)); }

}  // namespace seqmed
