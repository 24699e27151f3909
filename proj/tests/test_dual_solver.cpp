#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "seqmed/dual_solver.hpp"

using namespace seqmed;

namespace {

DualProblem random_problem(std::mt19937_64& rng, int n, double C, bool random_w) {
    const Matrix F = oracle::random_matrix(rng, n, 4);
    Vector y(n);
    for (int i = 0; i < n; ++i) y(i) = i % 2 == 0 ? 1.0 : -1.0;
    std::shuffle(y.data(), y.data() + n, rng);
    DualProblem p;
    p.Q = y.asDiagonal() * (F * F.transpose()) * y.asDiagonal();
    std::uniform_real_distribution<double> u(-0.5, 1.5);
    p.w = Vector::Ones(n);
    if (random_w)
        for (int i = 0; i < n; ++i) p.w(i) = u(rng);
    p.y = y;
    p.C = C;
    return p;
}

// Objective gradient computed here from scratch.
Vector gradient(const DualProblem& p, const Vector& a) {
    Vector g = p.w - p.Q * a;
    for (Eigen::Index i = 0; i < a.size(); ++i) g(i) -= 1.0 / (p.C - a(i));
    return g;
}

}  // namespace

TEST_SUITE("dual_solver") {

TEST_CASE("single-class problems have only the zero solution") {
    DualProblem p;
    p.Q = Matrix::Identity(3, 3);
    p.w = Vector::Ones(3);
    p.y = Vector::Ones(3);
    p.C = 5;
    const DualSolution s = solve_dual(p);
    CHECK(s.alpha.isZero(0.0));
    CHECK(s.degenerate());
}

TEST_CASE("symmetric two-point problem") {
    // x = +1 / -1, linear kernel, w = 1, C = 10: a is the small root of 2a^2 - 21a + 9 = 0.
    // Bisection on the derivative of the symmetric 1-D objective.
    auto slope = [](double a) { return -4.0 * a + 2.0 - 2.0 / (10.0 - a); };
    double lo = 0.0, hi = 9.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (slope(mid) > 0 ? lo : hi) = mid;
    }
    const double reference = 0.5 * (lo + hi);
    CHECK(reference == doctest::Approx((21.0 - std::sqrt(369.0)) / 4.0).epsilon(1e-12));
    CHECK(reference == doctest::Approx(0.447657).epsilon(1e-6));
    CHECK(reference == doctest::Approx((21.0 - std::sqrt(369.0)) / 4.0).epsilon(1e-14));

    DualProblem p;
    p.Q.resize(2, 2);
    p.Q << 1, 1, 1, 1;
    p.w = Vector::Ones(2);
    p.y.resize(2);
    p.y << 1, -1;
    p.C = 10;
    SolverOptions opt;
    opt.tol = 1e-12;
    const DualSolution s = solve_dual(p, opt);
    CHECK(s.converged());
    CHECK(s.alpha(0) == doctest::Approx(reference).epsilon(1e-10));
    CHECK(s.alpha(1) == doctest::Approx(reference).epsilon(1e-10));
}

TEST_CASE("large C approaches the hard-margin SVM") {
    std::mt19937_64 rng(2);
    Vector y;
    const Matrix X = oracle::gaussian_blobs(rng, 10, y, 4.0);
    DualProblem p;
    p.Q = y.asDiagonal() * (X * X.transpose()) * y.asDiagonal();
    p.w = Vector::Ones(10);
    p.y = y;
    p.C = 1e6;
    SolverOptions opt;
    opt.tol = 1e-10;
    const Vector med = solve_dual(p, opt).alpha;
    const Vector svm = oracle::svm_dual(p.Q, y, 1e6, 400000);
    CHECK((med - svm).cwiseAbs().maxCoeff() <= 1e-3 * (1.0 + svm.maxCoeff()));
}

TEST_CASE("barrier solution converges to the box QP as C grows") {
    std::mt19937_64 rng(4);
    Vector y;
    const Matrix X = oracle::gaussian_blobs(rng, 8, y, 1.0);
    DualProblem p;
    p.Q = y.asDiagonal() * (X * X.transpose()) * y.asDiagonal();
    p.w = Vector::Ones(8);
    p.y = y;
    SolverOptions opt;
    opt.tol = 1e-10;
    double previous = 1e300;
    for (double C : {1.0, 10.0, 100.0, 1000.0}) {
        p.C = C;
        const Vector med = solve_dual(p, opt).alpha;
        const Vector svm = oracle::svm_dual(p.Q, y, C, 200000);
        const double dist = (med - svm).norm() / C;
        CAPTURE(C);
        CHECK(dist < previous);
        previous = dist;
    }
}

TEST_CASE("solutions agree with an interior-point reference") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const double C = std::array<double, 3>{0.5, 3.0, 20.0}[trial % 3];
        DualProblem p = random_problem(rng, 6 + trial, C, true);
        SolverOptions opt;
        opt.tol = 1e-10;
        const DualSolution s = solve_dual(p, opt);
        const Vector ref = oracle::med_dual(p.Q, p.w, p.y, C);
        CAPTURE(trial);
        CHECK((s.alpha - ref).cwiseAbs().maxCoeff() <= 1e-6 * C);
        CHECK(s.objective >= oracle::med_objective(p.Q, p.w, C, ref) - 1e-9);
    }
}

TEST_CASE("KKT properties on random instances") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 60; ++trial) {
        const double C = std::array<double, 3>{0.1, 1.0, 10.0}[trial % 3];
        const DualProblem p = random_problem(rng, 2 + trial % 49, C, trial % 2 == 0);
        const DualSolution s = solve_dual(p);
        REQUIRE(s.converged());
        CHECK(s.alpha.minCoeff() >= 0.0);
        CHECK(s.alpha.maxCoeff() < C);
        CHECK(std::abs(p.y.dot(s.alpha)) <= 1e-8);
        CHECK(s.kkt_residual <= 1e-6);
        CHECK(kkt_residual(p, s.alpha) <= 1e-6);
        // free multipliers share one value of y_i g_i up to the tolerance
        const Vector g = gradient(p, s.alpha);
        double lo = 1e300, hi = -1e300;
        for (Eigen::Index i = 0; i < s.alpha.size(); ++i) {
            if (s.alpha(i) > 0.0 && s.alpha(i) < C * (1 - 1e-6)) {
                lo = std::min(lo, p.y(i) * g(i));
                hi = std::max(hi, p.y(i) * g(i));
            }
        }
        if (hi >= lo) CHECK(hi - lo <= 1e-6);
        CHECK(s.objective == doctest::Approx(oracle::med_objective(p.Q, p.w, C, s.alpha)).epsilon(1e-12));
    }
}

TEST_CASE("objective never decreases across pair updates") {
    std::mt19937_64 rng(21);
    const DualProblem p = random_problem(rng, 30, 10.0, true);
    SolverOptions opt;
    opt.record_trace = true;
    const DualSolution s = solve_dual(p, opt);
    REQUIRE(s.trace.size() > 5);
    for (std::size_t i = 1; i < s.trace.size(); ++i) CHECK(s.trace[i] >= s.trace[i - 1] - 1e-12);
}

TEST_CASE("iteration cap is reported") {
    std::mt19937_64 rng(22);
    const DualProblem p = random_problem(rng, 40, 10.0, true);
    SolverOptions opt;
    opt.max_iter = 3;
    const DualSolution s = solve_dual(p, opt);
    CHECK(s.status == SolveStatus::max_iter_reached);
    CHECK(s.iterations == 3);
    CHECK(std::abs(p.y.dot(s.alpha)) <= 1e-8);
}

TEST_CASE("malformed problems are rejected") {
    DualProblem p;
    p.Q = Matrix::Identity(2, 2);
    p.w = Vector::Ones(2);
    p.y = Vector::Ones(2);
    p.C = 0;
    CHECK_THROWS_AS(solve_dual(p), std::invalid_argument);
    p.C = 1;
    p.y(1) = 0.5;
    CHECK_THROWS_AS(solve_dual(p), std::invalid_argument);
    p.y(1) = 1;
    p.w = Vector::Ones(3);
    CHECK_THROWS_AS(solve_dual(p), std::invalid_argument);
}

TEST_CASE("bias examples") {
    const std::vector<double> one{1.0}, two{0.0, 2.0}, three{-1.0, 0.0, 5.0};
    CHECK(fit_bias(one).bias == 1.0);
    CHECK(fit_bias(two).bias == 1.0);
    CHECK(fit_bias(three).bias == 0.0);
    const BiasFit empty = fit_bias(std::span<const double>{});
    CHECK(empty.empty);
    CHECK(empty.bias == 0.0);
}

TEST_CASE("bias minimizes the L1 objective") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> N(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> r(1 + trial % 12);
        for (double& x : r) x = N(rng);
        const double b = fit_bias(r).bias;
        const double g = oracle::bias_grid(r, 1e-4);
        CHECK(oracle::l1_cost(r, b) <= oracle::l1_cost(r, g) + 1e-12);
        CHECK(std::abs(b - g) <= 1e-4);
    }
}

}
