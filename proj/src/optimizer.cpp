#include "tpemimo/optimizer.hpp"

#include <cmath>

namespace tpemimo {

namespace {

// S^{-1/2} and C^{1/2} via Hermitian eigendecomposition.  Eigenvalues of S
// below 1e-12 * lambda_max are clamped to that floor: finite-order tables
// can be marginally indefinite from rounding.  Anything clearly negative
// signals broken inputs and is rejected.
MatR inverse_sqrt_clamped(const MatR& S) {
    Eigen::SelfAdjointEigenSolver<MatR> es(S);
    if (es.info() != Eigen::Success)
        throw NumericError("optimal_weights: eigendecomposition of S failed");
    VecR ev = es.eigenvalues();
    const double top = ev.maxCoeff();
    if (!(top > 0.0))
        throw NumericError("optimal_weights: S has no positive eigenvalue");
    const double floor = 1e-12 * top;
    for (int i = 0; i < ev.size(); ++i) {
        if (ev(i) < -1e-8 * top)
            throw NumericError("optimal_weights: S is indefinite beyond clamp");
        if (ev(i) < floor) ev(i) = floor;
    }
    return es.eigenvectors() * ev.cwiseInverse().cwiseSqrt().asDiagonal() *
           es.eigenvectors().transpose();
}

MatR psd_sqrt(const MatR& C) {
    Eigen::SelfAdjointEigenSolver<MatR> es(C);
    if (es.info() != Eigen::Success)
        throw NumericError("optimal_weights: eigendecomposition of C failed");
    VecR ev = es.eigenvalues();
    for (int i = 0; i < ev.size(); ++i)
        if (ev(i) < 0.0) ev(i) = 0.0;
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
           es.eigenvectors().transpose();
}

OptimizationResult solve_quotient(const MatR& A, const MatR& B, const MatR& C,
                                  double P, double sigma2, double trP,
                                  TpeWeights::Provenance prov) {
    if (!(P > 0.0) || !(sigma2 > 0.0) || !(trP > 0.0))
        throw ConfigError("optimal_weights: P, sigma2 and trP must be positive");

    const MatR S = B + (sigma2 / P) * C;
    const MatR S_isqrt = inverse_sqrt_clamped(0.5 * (S + S.transpose()));

    MatR Q = S_isqrt * A * S_isqrt;
    Q = 0.5 * (Q + Q.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<MatR> es(Q);
    if (es.info() != Eigen::Success)
        throw NumericError("optimal_weights: eigendecomposition failed");

    const int top = static_cast<int>(Q.rows()) - 1;
    VecR a = es.eigenvectors().col(top);
    // Deterministic sign: dominant entry positive.
    int imax = 0;
    a.cwiseAbs().maxCoeff(&imax);
    if (a(imax) < 0.0) a = -a;

    OptimizationResult r;
    r.lambda_max = es.eigenvalues()(top);
    const VecR s_a = S_isqrt * a;
    r.alpha = (psd_sqrt(C) * s_a).squaredNorm();
    if (!(r.alpha > 0.0))
        throw NumericError("optimal_weights: degenerate power constraint");
    r.weights.w = std::sqrt(P / (r.alpha * trP)) * s_a;
    r.weights.provenance = prov;
    return r;
}

}  // namespace

OptimizationResult optimal_weights(const AsymptoticMatrices& mats, double P,
                                   double sigma2, const PowerAllocation& alloc) {
    OptimizationResult r =
        solve_quotient(mats.A, mats.B, mats.C, P, sigma2, alloc.trace(),
                       TpeWeights::Provenance::asymptotic_optimal);
    const int K = static_cast<int>(alloc.p.size());
    r.gamma_k.resize(K);
    for (int k = 0; k < K; ++k)
        r.gamma_k(k) = K * alloc.p(k) * r.lambda_max / alloc.trace();
    return r;
}

OptimizationResult empirical_optimal_weights(const MatC& A, const MatC& B,
                                             const MatC& C, double P,
                                             double sigma2, double trP_context) {
    // Real coefficients only see the real (symmetric) parts of the
    // Hermitian quadratic forms.
    auto sym_real = [](const MatC& m) {
        MatR s = m.real();
        return MatR(0.5 * (s + s.transpose()));
    };
    return solve_quotient(sym_real(A), sym_real(B), sym_real(C), P, sigma2,
                          trP_context, TpeWeights::Provenance::empirical_optimal);
}

}  // namespace tpemimo
