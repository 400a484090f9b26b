#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tpemimo/channel.hpp"
#include "tpemimo/optimizer.hpp"
#include "tpemimo/rng.hpp"

using namespace tpemimo;

namespace {

AsymptoticMatrices exp_matrices(int M, int K, int J, double tau) {
    const CovarianceOperator cov =
        build_covariance(CovarianceSpec::exponential(0.1, M));
    DerivativeTables tb = derivative_cascade(cov, K, J);
    return assemble_matrices(tb, tau, J);
}

MatR random_psd(int n, std::uint64_t seed, double ridge) {
    GaussianStream rng(seed);
    MatC g(n, n);
    rng.fill(g);
    MatR s = (g * g.adjoint()).real() / n;
    s = 0.5 * (s + s.transpose()).eval();
    s.diagonal().array() += ridge;
    return s;
}

// scale-invariant objective of the coefficient problem
double objective(const VecR& w, const MatR& A, const MatR& B, const MatR& C,
                 double sigma2, double P) {
    return w.dot(A * w) / (w.dot(B * w) + sigma2 / P * w.dot(C * w));
}

}  // namespace

TEST_CASE("scalar closed form at J = 1") {
    const AsymptoticMatrices m = exp_matrices(32, 8, 1, 0.2);
    const double P = 5.0, sigma2 = 1.0;
    const PowerAllocation alloc = uniform_power(P, 8);
    const OptimizationResult r = optimal_weights(m, P, sigma2, alloc);
    CHECK(r.weights.w(0) ==
          doctest::Approx(std::sqrt(P / (alloc.trace() * m.C(0, 0))))
              .epsilon(1e-12));
    CHECK(r.lambda_max ==
          doctest::Approx(m.A(0, 0) / (m.B(0, 0) + sigma2 / P * m.C(0, 0)))
              .epsilon(1e-12));
    CHECK(r.weights.provenance == TpeWeights::Provenance::asymptotic_optimal);
}

TEST_CASE("uniform power gives identical per-user limits") {
    const AsymptoticMatrices m = exp_matrices(32, 8, 3, 0.3);
    const PowerAllocation alloc = uniform_power(2.0, 8);
    const OptimizationResult r = optimal_weights(m, 2.0, 1.0, alloc);
    for (int k = 0; k < 8; ++k)
        CHECK(r.gamma_k(k) == doctest::Approx(r.lambda_max).epsilon(1e-14));
}

TEST_CASE("deterministic power constraint holds") {
    const AsymptoticMatrices m = exp_matrices(48, 12, 3, 0.4);
    const double P = 10.0;
    const PowerAllocation alloc = uniform_power(P, 12);
    const OptimizationResult r = optimal_weights(m, P, 1.0, alloc);
    const double quad = r.weights.w.dot(m.C * r.weights.w);
    CHECK(std::abs(alloc.trace() * quad - P) / P < 1e-8);
}

TEST_CASE("closed form beats random search") {
    const double P = 4.0, sigma2 = 1.0;
    for (std::uint64_t seed : {1, 2, 3}) {
        const int J = 3;
        const MatR A = random_psd(J, seed * 10 + 1, 0.0);
        const MatR B = random_psd(J, seed * 10 + 2, 0.1);
        const MatR C = random_psd(J, seed * 10 + 3, 0.1);
        AsymptoticMatrices m;
        m.A = A;
        m.B = B;
        m.C = C;
        const PowerAllocation alloc = uniform_power(P, 4);
        const OptimizationResult r = optimal_weights(m, P, sigma2, alloc);
        const double best = objective(r.weights.w, A, B, C, sigma2, P);

        GaussianStream rng(seed);
        for (int i = 0; i < 1000; ++i) {
            VecR w(J);
            for (int j = 0; j < J; ++j) w(j) = rng.complex_normal().real();
            CHECK(objective(w, A, B, C, sigma2, P) <= best * (1 + 1e-10));
        }
    }
}

TEST_CASE("empirical path with identical inputs gives identical weights") {
    const AsymptoticMatrices m = exp_matrices(32, 8, 3, 0.3);
    const double P = 2.0, sigma2 = 1.0;
    const PowerAllocation alloc = uniform_power(P, 8);
    const OptimizationResult a = optimal_weights(m, P, sigma2, alloc);
    const OptimizationResult b =
        empirical_optimal_weights(m.A.cast<cxd>(), m.B.cast<cxd>(),
                                  m.C.cast<cxd>(), P, sigma2, alloc.trace());
    CHECK((a.weights.w - b.weights.w).norm() < 1e-13 * a.weights.w.norm());
    CHECK(b.weights.provenance == TpeWeights::Provenance::empirical_optimal);
}

TEST_CASE("scale invariance of the signal matrix") {
    AsymptoticMatrices m = exp_matrices(32, 8, 3, 0.3);
    const PowerAllocation alloc = uniform_power(1.0, 8);
    const OptimizationResult r1 = optimal_weights(m, 1.0, 1.0, alloc);
    m.A *= 7.0;
    const OptimizationResult r2 = optimal_weights(m, 1.0, 1.0, alloc);
    CHECK(r2.lambda_max == doctest::Approx(7.0 * r1.lambda_max).epsilon(1e-10));
    CHECK((r1.weights.w - r2.weights.w).norm() < 1e-10 * r1.weights.w.norm());
}

TEST_CASE("clamped whitening stays consistent") {
    // near-singular B + (sigma2/P) C still yields a usable solution
    AsymptoticMatrices m;
    m.A = random_psd(3, 5, 0.0);
    m.B = MatR::Zero(3, 3);
    m.B(0, 0) = 1.0;  // rank-1
    m.C = random_psd(3, 6, 0.2);
    const PowerAllocation alloc = uniform_power(1.0, 4);
    const OptimizationResult r = optimal_weights(m, 1.0, 1.0, alloc);
    CHECK(std::isfinite(r.lambda_max));
    const double quad = r.weights.w.dot(m.C * r.weights.w);
    CHECK(std::abs(alloc.trace() * quad - 1.0) < 1e-8);
}

TEST_CASE("indefinite denominator is rejected") {
    AsymptoticMatrices m;
    m.A = random_psd(3, 7, 0.1);
    m.B = -MatR::Identity(3, 3);
    m.C = MatR::Identity(3, 3) * 1e-3;
    const PowerAllocation alloc = uniform_power(1.0, 4);
    CHECK_THROWS_AS(optimal_weights(m, 1.0, 1.0, alloc), NumericError);
}
