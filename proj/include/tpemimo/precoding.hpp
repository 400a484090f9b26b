#pragma once

#include <string>

#include "tpemimo/config.hpp"
#include "tpemimo/types.hpp"

namespace tpemimo {

// Scalar coefficients w_0..w_{J-1} of the matrix-polynomial precoder,
// tagged with how they were obtained.
struct TpeWeights {
    enum class Provenance {
        asymptotic_optimal,
        empirical_optimal,
        truncation_derived,
        manual,
    };

    VecR w;
    Provenance provenance = Provenance::manual;

    int order() const { return static_cast<int>(w.size()); }
};

std::string provenance_name(TpeWeights::Provenance p);
TpeWeights::Provenance provenance_from_name(const std::string& name);

std::string weights_to_json(const TpeWeights& w);
TpeWeights weights_from_json(const std::string& text);

struct PrecodingMatrix {
    enum class Scheme { rzf, tpe, mrt };

    MatC G;
    Scheme scheme = Scheme::tpe;
    double power_used = 0.0;  // tr(G G^H)
};

// Regularized zero-forcing precoder
//   G = (beta/sqrt(K)) Hhat (Hhat^H Hhat / K + xi I_K)^{-1} P^{1/2},
// with beta chosen so that tr(G G^H) = P.  The K x K system is solved by
// a Hermitian positive-definite (Cholesky) factorization.
PrecodingMatrix rzf_matrix(const MatC& Hhat, double xi,
                           const PowerAllocation& alloc, double P);

// Per-symbol evaluation order of the same precoder: applies the cached
// factorization to one symbol vector instead of forming G.  beta must be
// supplied since the power normalization needs the full matrix.
VecC rzf_apply(const MatC& Hhat, double xi, const PowerAllocation& alloc,
               double beta, const VecC& s);

// Matrix-free TPE transmit vector
//   x = sum_l w_l xtilde_l,   xtilde_0 = (Hhat/sqrt(K)) P^{1/2} s,
//   xtilde_l = (Hhat/sqrt(K)) ((Hhat^H/sqrt(K)) xtilde_{l-1}),
// using only matrix-vector products.
VecC tpe_apply(const MatC& Hhat, const TpeWeights& weights,
               const PowerAllocation& alloc, const VecC& s);

// Explicit M x K TPE precoding matrix
//   G = sum_l w_l (Hhat Hhat^H / K)^l (Hhat/sqrt(K)) P^{1/2},
// built by iterated products, never by forming dense matrix powers.
// The result is not power-normalized; power_used reports tr(G G^H).
PrecodingMatrix tpe_matrix(const MatC& Hhat, const TpeWeights& weights,
                           const PowerAllocation& alloc);

// Coefficients obtained by truncating the Neumann/Taylor expansion of the
// regularized inverse:  w_l = beta kappa (-kappa)^l
//   * sum_{n=l}^{J-1} binom(n,l) (1 - kappa xi)^{n-l}.
// Valid for 0 < kappa < 2 / lambda_max(Hhat Hhat^H / K + xi I).
TpeWeights truncation_coefficients(double xi, double kappa, double beta, int J);

// Rescales G so that tr(G G^H) = P.  Rejects the zero matrix.
PrecodingMatrix normalize_power(PrecodingMatrix G, double P);

}  // namespace tpemimo
