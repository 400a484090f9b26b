#pragma once

#include <string>
#include <vector>

#include "tpemimo/channel.hpp"
#include "tpemimo/types.hpp"

namespace tpemimo {

// Solution of the scalar fixed point
//   delta(t) = (1/K) tr( Phi (I_M + t Phi / (1 + t delta(t)))^{-1} )
// together with the matrix T(t) = (I_M + t Phi/(1+t delta))^{-1}.
// delta(0) = tr(Phi)/K and T(0) = I exactly.
struct FixedPointResult {
    double t = 0.0;
    double delta = 0.0;
    MatC T;
    int iterations = 0;
    double residual = 0.0;
};

FixedPointResult solve_delta(const CovarianceOperator& cov, int K, double t,
                             double tol = 1e-12, int max_iter = 10000,
                             std::vector<double>* residual_trace = nullptr);

// t = 0 derivative tables of delta(t), f(t) = -1/(1+t delta(t)), T(t) and
// Tau(t) = -f(t) T(t), through order J, plus the bivariate derivative
// tables built on top of them:
//   beta[l][m] : mixed derivatives of the interference kernel
//                beta(t,u) = (1/K) tr(Phi T(u) Phi T(t))
//                          / ((1+t d(t))(1+u d(u)) - (tu/K) tr(Phi T(u) Phi T(t)))
//   c[l][m]    : mixed derivatives of the power kernel
//                c(t,u) = (1/K) tr(Phi T(u) T(t)) (1 + tu beta(t,u))
//                         / ((1+t d(t))(1+u d(u)))
//   Xbar, bbar : CSI-quality weighted tables filled by assemble_matrices.
// All tables are (J+1) x (J+1) and indexed from order 0.
struct DerivativeTables {
    int J = 0;
    VecR delta_q;
    VecR f_q;
    std::vector<MatC> T_q;
    std::vector<MatC> Tau_q;
    // (1/K) tr(Phi Tau^(a) Phi Tau^(b)) and (1/K) tr(Phi Tau^(a) Tau^(b))
    MatR trace_ptpt;
    MatR trace_ptt;
    MatR beta;
    MatR c;
    MatR Xbar;
    MatR bbar;
};

// Runs the order-by-order recursion seeded with delta^(0) = tr(Phi)/K,
// f^(0) = -1, T^(0) = I and fills every t-only table including beta and c.
// J is capped at 8; the dense M x M tables put the practical limit on M
// at roughly 2048.
DerivativeTables derivative_cascade(const CovarianceOperator& cov, int K, int J);

// Standalone beta recursion from precomputed Tau derivatives (the cascade
// calls the same recursion internally).
MatR beta_table(const CovarianceOperator& cov, int K,
                const std::vector<MatC>& Tau_q);

// J x J coefficient-optimization matrices
//   [A]_{l,m} = (-1)^{l+m} Xbar^(l,m) / (l! m!)   (signal)
//   [B]_{l,m} = (-1)^{l+m} bbar^(l,m) / (l! m!)   (interference)
//   [C]_{l,m} = (-1)^{l+m} c^(l,m)    / (l! m!)   (transmit power)
struct AsymptoticMatrices {
    MatR A;
    MatR B;
    MatR C;
    double tau = 0.0;
};

// Builds the matrices for one CSI quality tau; also (re)fills the
// tau-dependent Xbar/bbar tables inside `tables`.  J_out defaults to
// tables.J and must not exceed tables.J + 1.
AsymptoticMatrices assemble_matrices(DerivativeTables& tables, double tau,
                                     int J_out = -1);

// Large-system SINR of the regularized zero-forcing precoder with
// regularization xi, evaluated at T = T(1/xi), delta = delta(1/xi).
double rzf_asymptotic_sinr(const CovarianceOperator& cov, int K, double xi,
                           double tau, double rho, double p_k, double trP);

// Positive fixed point xi* maximizing the large-system RZF SINR under
// uniform power allocation.  tau = 0 collapses to xi* = 1/rho.
double rzf_optimal_regularization(const CovarianceOperator& cov, int K,
                                  double tau, double rho, double tol = 1e-10,
                                  int max_iter = 10000);

// Scalar-table snapshot (delta_q, f_q, beta, c, Xbar, bbar) keyed
// "delta_q/2", "beta/1,2", ... for regression comparisons.
std::string tables_to_json(const DerivativeTables& tables);

}  // namespace tpemimo
