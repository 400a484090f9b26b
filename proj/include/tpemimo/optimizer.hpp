#pragma once

#include "tpemimo/asymptotics.hpp"
#include "tpemimo/config.hpp"
#include "tpemimo/precoding.hpp"
#include "tpemimo/types.hpp"

namespace tpemimo {

// Output of the coefficient optimization
//   maximize  w' A w / (w' B w + (sigma2/P) w' C w)
//   s.t.      trP * w' C w = P,
// solved as a Rayleigh quotient: with S = B + (sigma2/P) C and `a` the
// unit top eigenvector of S^{-1/2} A S^{-1/2},
//   w = sqrt(P / (alpha trP)) S^{-1/2} a,  alpha = ||C^{1/2} S^{-1/2} a||^2.
struct OptimizationResult {
    TpeWeights weights;
    double lambda_max = 0.0;
    double alpha = 0.0;
    VecR gamma_k;  // per-user large-system SINR K p_k lambda_max / trP
};

// Weights from the deterministic matrices; gamma_k is filled from alloc.
OptimizationResult optimal_weights(const AsymptoticMatrices& mats, double P,
                                   double sigma2, const PowerAllocation& alloc);

// Same closed form on per-realization (Hermitian) matrices; only the real
// parts enter since the coefficients are real.  trP_context scales the
// power constraint exactly as in the deterministic problem and defaults
// to 1 (the per-realization C already carries the allocation).
OptimizationResult empirical_optimal_weights(const MatC& A, const MatC& B,
                                             const MatC& C, double P,
                                             double sigma2,
                                             double trP_context = 1.0);

}  // namespace tpemimo
