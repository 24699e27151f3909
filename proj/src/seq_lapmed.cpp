#include "seqmed/seq_lapmed.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "seqmed/graph.hpp"

namespace seqmed {

StepParams derive_hyperparams(double gamma_A, double gamma_I, Eigen::Index labeled, Eigen::Index n) {
    if (!(gamma_A > 0.0)) throw std::invalid_argument("derive_hyperparams: gamma_A must be positive");
    if (!(gamma_I >= 0.0)) throw std::invalid_argument("derive_hyperparams: gamma_I must be nonnegative");
    if (labeled < 1 || labeled > n) {
        throw std::invalid_argument("derive_hyperparams: need 1 <= labeled <= n");
    }
    const auto l = static_cast<double>(labeled);
    const auto nn = static_cast<double>(n);
    return {1.0 / (2.0 * l * gamma_A), gamma_I / (2.0 * gamma_A * nn * nn)};
}

Vector approx_diagonal(const ApproxState& state) {
    constexpr double kFloor = 1e-12;
    Vector diag(state.rank());
    for (Eigen::Index i = 0; i < state.rank(); ++i) {
        const double energy = state.s(i) * state.s(i) * state.d(i);
        diag(i) = energy < kFloor ? 1.0 / kFloor : 1.0 / energy;
    }
    return diag / state.B;
}

ApproxState approx_update(const ApproxState& state, const Matrix& X, const Matrix& L, double beta,
                          int rank, bool* truncated) {
    return approx_update(state, X, laplacian_spectrum(L), beta, rank, truncated);
}

ApproxState approx_update(const ApproxState& state, const Matrix& X, const LaplacianSpectrum& spectrum,
                          double beta, int rank, bool* truncated) {
    if (truncated) *truncated = false;
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (n == 0) throw std::invalid_argument("approx_update: empty batch");
    if (spectrum.values.size() != n) throw std::invalid_argument("approx_update: Laplacian size mismatch");
    if (beta < 0.0) throw std::invalid_argument("approx_update: beta must be nonnegative");
    if (state.count > 0 && state.V.rows() != p) {
        throw std::invalid_argument("approx_update: feature dimension changed between batches");
    }

    Eigen::Index r = std::min(n, p);
    if (rank > 0) r = std::min<Eigen::Index>(r, rank);

    ApproxState next = state;
    if (state.count > 0 && r != state.rank()) {
        const Eigen::Index common = std::min(r, state.rank());
        if (truncated) *truncated = true;
        next.V = state.V.leftCols(common);
        next.s = state.s.head(common);
        next.d = state.d.head(common);
        r = common;
    }

    Eigen::BDCSVD<Matrix> svd(X, Eigen::ComputeThinV);
    Matrix V = svd.matrixV().leftCols(r);
    const Vector s = svd.singularValues().head(r);
    Vector d(r);
    for (Eigen::Index i = 0; i < r; ++i) d(i) = std::max(0.0, spectrum.values(n - 1 - i));

    if (state.count == 0) {
        next.V = V;
        next.s = s;
        next.d = d;
    } else {
        for (Eigen::Index i = 0; i < r; ++i) {
            if (V.col(i).dot(next.V.col(i)) < 0.0) V.col(i) = -V.col(i);
        }
        const double count_new = static_cast<double>(state.count + 1);
        next.V += (V - next.V) / count_new;
        next.s += (s - next.s) / count_new;
        next.d += (d - next.d) / count_new;
    }
    next.B = state.B + 2.0 * beta;
    next.count = state.count + 1;
    return next;
}

Matrix approx_prior_gram(const ApproxState& state, const Matrix& A, const Matrix& B, const KernelSpec& base) {
    Matrix K = gram(base, A, B);
    if (state.count == 0 || state.B <= 0.0) return K;
    const Matrix Z = state.V.transpose();
    Matrix H = gram(base, Z);
    H.diagonal() += approx_diagonal(state);
    const Matrix right = gram(base, Z, B);
    K.noalias() -= gram(base, A, Z) * H.ldlt().solve(right);
    return K;
}

std::string to_string(LapMode mode) { return mode == LapMode::exact ? "exact" : "approx"; }

LapMode lap_mode_from_string(std::string_view name) {
    if (name == "exact") return LapMode::exact;
    if (name == "approx") return LapMode::approx;
    throw std::invalid_argument("unknown Laplacian mode '" + std::string(name) + "'");
}

SeqLapMedModel::SeqLapMedModel(KernelSpec kernel, LapConfig config)
    : base_(std::move(kernel)), config_(config), kernel_(base_) {
    if (!(config_.gamma_A > 0.0)) throw std::invalid_argument("SeqLapMedModel: gamma_A must be positive");
    if (!(config_.gamma_I >= 0.0)) throw std::invalid_argument("SeqLapMedModel: gamma_I must be nonnegative");
    if (config_.knn < 1) throw std::invalid_argument("SeqLapMedModel: knn must be positive");
    if (!(config_.heat_width > 0.0)) throw std::invalid_argument("SeqLapMedModel: heat_width must be positive");
}

std::size_t SeqLapMedModel::support_vector_count() const {
    std::size_t n = 0;
    for (const auto& s : steps_) n += static_cast<std::size_t>(s.sv_samples.rows());
    return n;
}

void SeqLapMedModel::rebuild_kernel() {
    kernel_ = DeflatedKernel(base_);
    if (prior_steps_ > 0) kernel_.push_spectral(prior_, 0);
    for (std::size_t i = prior_steps_; i < steps_.size(); ++i) {
        const LapStep& step = steps_[i];
        if (step.laplacian.size() > 0) kernel_.push_laplacian(step.X, spectra_[i], step.params.beta, step.t);
    }
    sv_factors_.clear();
    refresh_sv_factors();
}

void SeqLapMedModel::refresh_sv_factors() {
    sv_factors_.resize(steps_.size());
    for (std::size_t i = 0; i < steps_.size(); ++i) {
        if (steps_[i].sv_samples.rows() > 0) kernel_.extend(steps_[i].sv_samples, sv_factors_[i]);
    }
}

void SeqLapMedModel::refresh_expansion() {
    std::vector<Vector> z(kernel_.depth());
    for (std::size_t s = 0; s < kernel_.depth(); ++s) {
        z[s] = Vector::Zero(kernel_.anchors()[s].W.cols());
        for (std::size_t t = 0; t < steps_.size(); ++t) {
            if (steps_[t].sv_samples.rows() == 0) continue;
            z[s].noalias() += sv_factors_[t][s].transpose() * steps_[t].coefficients;
        }
    }
    const std::vector<Vector> g = kernel_.base_coefficients(std::move(z));

    Eigen::Index rows = 0;
    for (const auto& step : steps_) rows += step.sv_samples.rows();
    for (const auto& anchor : kernel_.anchors()) rows += anchor.Z.rows();
    const Eigen::Index p = steps_.empty() ? 0 : steps_.front().X.cols();
    expansion_points_.resize(rows, p);
    expansion_weights_.resize(rows);
    Eigen::Index at = 0;
    for (const auto& step : steps_) {
        const Eigen::Index n = step.sv_samples.rows();
        expansion_points_.middleRows(at, n) = step.sv_samples;
        expansion_weights_.segment(at, n) = step.coefficients;
        at += n;
    }
    for (std::size_t s = 0; s < kernel_.depth(); ++s) {
        const Eigen::Index n = kernel_.anchors()[s].Z.rows();
        expansion_points_.middleRows(at, n) = kernel_.anchors()[s].Z;
        expansion_weights_.segment(at, n) = -g[s];
        at += n;
    }
}

Vector SeqLapMedModel::decision_without_bias(const Matrix& X) const {
    if (kernel_.depth() == 0) return decision_without_bias(X, {});
    return decision_without_bias(X, kernel_.factors(X));
}

Vector SeqLapMedModel::decision_without_bias(const Matrix& X, const DeflatedKernel::Factors& fx) const {
    Vector f = Vector::Zero(X.rows());
    for (const auto& step : steps_) {
        if (step.sv_samples.rows() == 0) continue;
        f.noalias() += gram(base_, X, step.sv_samples) * step.coefficients;
    }
    for (std::size_t s = 0; s < kernel_.depth(); ++s) {
        Vector z = Vector::Zero(fx[s].cols());
        for (std::size_t t = 0; t < steps_.size(); ++t) {
            if (steps_[t].sv_samples.rows() == 0) continue;
            z.noalias() += sv_factors_[t][s].transpose() * steps_[t].coefficients;
        }
        f.noalias() -= fx[s] * z;
    }
    return f;
}

FitReport SeqLapMedModel::partial_fit(const Batch& batch) {
    batch.validate();
    if (batch.t != t_ + 1) {
        throw std::invalid_argument("partial_fit: expected batch t=" + std::to_string(t_ + 1) +
                                    ", got t=" + std::to_string(batch.t));
    }
    if (!steps_.empty() && steps_.front().X.cols() != batch.X.cols()) {
        throw std::invalid_argument("partial_fit: feature dimension mismatch");
    }

    FitReport report;
    report.t = batch.t;
    t_ = batch.t;

    const std::vector<Eigen::Index> labeled = batch.labeled_indices();
    const Vector y_lab = select_entries(batch.y, labeled);
    const bool degenerate = labeled.empty() || !(y_lab.array() > 0).any() || !(y_lab.array() < 0).any();

    // A batch without both classes still contributes its graph to the kernel.
    LapStep step;
    step.t = batch.t;
    step.params = derive_hyperparams(config_.gamma_A, config_.gamma_I,
                                     std::max<Eigen::Index>(1, static_cast<Eigen::Index>(labeled.size())),
                                     batch.size());
    if (config_.C_override > 0.0) step.params.C = config_.C_override;
    if (labeled.empty()) step.params.C = 0.0;
    step.X = batch.X;
    step.y = batch.y;
    step.labeled = labeled;
    step.sv_samples.resize(0, batch.X.cols());
    LaplacianSpectrum spectrum;
    if (step.params.beta > 0.0 && batch.size() >= 2) {
        const int k = std::min<int>(config_.knn, static_cast<int>(batch.size()) - 1);
        step.laplacian = build_laplacian(batch.X, k, config_.heat_width).values;
        spectrum = laplacian_spectrum(step.laplacian);
    }

    // Approx mode folds everything before this batch into the surrogate once two
    // batches have been seen; earlier steps use the exact recursion.
    const bool fold = config_.mode == LapMode::approx && steps_.size() >= 2;
    if (fold) {
        prior_ = running_;
        prior_steps_ = steps_.size();
    }
    steps_.push_back(std::move(step));
    spectra_.push_back(spectrum);
    LapStep& current = steps_.back();
    if (fold) {
        rebuild_kernel();
    } else {
        if (current.laplacian.size() > 0) {
            kernel_.push_laplacian(current.X, spectrum, current.params.beta, current.t);
        }
        refresh_sv_factors();
    }

    if (degenerate) {
        report.degenerate = true;
        report.solution.status = SolveStatus::degenerate;
        report.solution.bias = bias_;
        report.alpha = Vector::Zero(y_lab.size());
        report.solution.alpha = report.alpha;
        if (config_.mode == LapMode::approx && current.laplacian.size() > 0) {
            running_ = approx_update(running_, current.X, spectrum, current.params.beta, config_.rank);
        }
        refresh_expansion();
        return report;
    }

    const Matrix X_lab = select_rows(batch.X, labeled);
    DualProblem problem;
    const Matrix K = kernel_.gram(X_lab);
    problem.Q = y_lab.asDiagonal() * K * y_lab.asDiagonal();
    problem.w = Vector::Ones(y_lab.size()) - y_lab.cwiseProduct(decision_without_bias(X_lab));
    problem.y = y_lab;
    problem.C = current.params.C;

    report.solution = solve_dual(problem, config_.solver);
    report.alpha = report.solution.alpha;
    report.converged = report.solution.converged();

    std::vector<Eigen::Index> sv;
    const double threshold = sv_threshold(problem.C);
    for (Eigen::Index i = 0; i < report.alpha.size(); ++i) {
        if (report.alpha(i) > threshold) sv.push_back(i);
    }
    current.sv_samples = select_rows(X_lab, sv);
    current.coefficients = select_entries(y_lab.cwiseProduct(report.alpha), sv);
    if (!sv.empty()) sv_factors_.back() = kernel_.factors(current.sv_samples);

    const Vector fitted = decision_without_bias(current.sv_samples);
    std::vector<double> residuals(sv.size());
    for (std::size_t s = 0; s < sv.size(); ++s) {
        residuals[s] = y_lab(sv[s]) - fitted(static_cast<Eigen::Index>(s));
    }
    const BiasFit bias = fit_bias(residuals);
    if (bias.empty) {
        report.bias_kept = true;
    } else {
        bias_ = bias.bias;
    }
    report.solution.bias = bias_;
    report.n_support = sv.size();

    if (config_.mode == LapMode::approx && current.laplacian.size() > 0) {
        running_ = approx_update(running_, current.X, spectrum, current.params.beta, config_.rank);
    }
    refresh_expansion();
    return report;
}

Vector SeqLapMedModel::decision_values(const Matrix& X) const {
    if (!steps_.empty() && steps_.front().X.cols() != X.cols()) {
        throw std::invalid_argument("decision_values: feature dimension mismatch");
    }
    if (expansion_points_.rows() == 0) return Vector::Constant(X.rows(), bias_);
    Vector f = gram(base_, X, expansion_points_) * expansion_weights_;
    f.array() += bias_;
    return f;
}

IndexVector SeqLapMedModel::predict(const Matrix& X) const { return sign_labels(decision_values(X)); }

Matrix SeqLapMedModel::regularized_gram(const Matrix& A, const Matrix& B) const { return kernel_.gram(A, B); }

Matrix SeqLapMedModel::regularized_gram_exact(const Matrix& A, const Matrix& B, int depth) const {
    if (config_.mode != LapMode::exact) {
        throw std::logic_error("regularized_gram_exact: model runs in approx mode");
    }
    std::size_t used = 0;
    for (const auto& anchor : kernel_.anchors()) {
        if (anchor.step <= depth) ++used;
    }
    return kernel_.gram(A, B, used);
}

SeqLapMedModel SeqLapMedModel::restore(KernelSpec kernel, LapConfig config, std::vector<LapStep> steps,
                                       ApproxState running, ApproxState prior, std::size_t prior_steps,
                                       double bias, int t) {
    SeqLapMedModel m(std::move(kernel), config);
    if (prior_steps > steps.size()) throw std::invalid_argument("restore: prior covers more steps than stored");
    m.steps_ = std::move(steps);
    for (const auto& step : m.steps_) {
        m.spectra_.push_back(step.laplacian.size() > 0 ? laplacian_spectrum(step.laplacian) : LaplacianSpectrum{});
    }
    m.running_ = std::move(running);
    m.prior_ = std::move(prior);
    m.prior_steps_ = prior_steps;
    m.bias_ = bias;
    m.t_ = t;
    m.rebuild_kernel();
    m.refresh_expansion();
    return m;
}

}  // namespace seqmed
