#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tpemimo/asymptotics.hpp"
#include "tpemimo/channel.hpp"
#include "tpemimo/config.hpp"
#include "tpemimo/optimizer.hpp"
#include "tpemimo/precoding.hpp"
#include "tpemimo/types.hpp"

namespace tpemimo {

enum class Scheme { rzf, tpe, tpeopt, mrt };

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

// Per-user SINR and rate for one realization.
struct SinrReport {
    VecR per_user_sinr;
    VecR per_user_rate_bits;  // log2(1 + SINR_k)
    double mean_rate_bits = 0.0;
    std::string scheme;
    std::uint64_t seed = 0;
    double snr_db = 0.0;
    int trial = -1;
};

// SINR_k = |h_k^H g_k|^2 / (sum_{n != k} |h_k^H g_n|^2 + sigma2).
SinrReport empirical_sinr_direct(const MatC& H, const MatC& G, double sigma2);

// Realization-level quadratic forms of the polynomial precoder,
//   [A_k]_{l,m} = (p_k/K) u_l u_m^*,  u_l = h_k^H (Hhat Hhat^H/K)^l hhat_k
//   [B_k]_{l,m} = (1/K) v_l^H Hhat P Hhat^H v_m - [A_k]_{l,m},
//                 v_l = (Hhat Hhat^H/K)^l h_k
//   [C]_{l,m}   = (1/K) tr(Hhat^H (Hhat Hhat^H/K)^{l+m} Hhat P),
// computed with iterated matrix-vector products, never dense matrix
// powers.  A_k has rank <= 1 and C depends on (l,m) only through l+m.
struct QuadraticForms {
    MatC A;
    MatC B;
    MatR C;
    int user = -1;
};

QuadraticForms quadratic_forms(const MatC& H, const MatC& Hhat,
                               const PowerAllocation& alloc, int J, int k);

// SINR_k = w^H A_k w / (w^H B_k w + sigma2).
double sinr_from_quadratics(const TpeWeights& w, const QuadraticForms& qf,
                            double sigma2);

// All users' forms for one realization plus the shared power matrix and
// the per-user averages used by the per-realization optimizer.
struct TrialForms {
    std::vector<MatC> A;
    std::vector<MatC> B;
    MatC A_mean;
    MatC B_mean;
    MatR C;
};

TrialForms trial_quadratic_forms(const MatC& H, const MatC& Hhat,
                                 const PowerAllocation& alloc, int J);

// A Monte Carlo scenario; the transmit power is set per sweep point from
// the SNR grid (P = sigma2 * 10^(snr/10)).
struct Scenario {
    int M = 0;
    int K = 0;
    int J = 1;
    double tau = 0.0;
    double sigma2 = 1.0;
    CovarianceSpec cov_spec;
    std::vector<double> class_weights;  // empty = uniform allocation
    std::optional<TpeWeights> pinned_weights;  // overrides tpe coefficients
};

struct RateStats {
    Scheme scheme = Scheme::tpe;
    double snr_db = 0.0;
    double tau = 0.0;
    int J = 1;
    int trials = 0;
    std::uint64_t seed = 0;
    double mean_rate_bits = 0.0;
    double stderr_bits = 0.0;
    VecR class_mean_bits;  // one entry per class (single entry if uniform)
    VecR de_class_bits;    // large-system prediction; empty if unavailable
    double de_rate_bits = std::numeric_limits<double>::quiet_NaN();
    double mean_prenorm_power = std::numeric_limits<double>::quiet_NaN();
};

// Seeded sweep over an SNR grid for several schemes with common random
// numbers: trial t draws the same (H, Hhat) for every scheme and SNR.
// Trials are independent tasks fanned over `threads` workers; per-trial
// results are reduced in trial order, so serial and parallel runs agree
// bit for bit.
std::vector<RateStats> run_sweep(const Scenario& sc,
                                 const std::vector<double>& snr_grid,
                                 const std::vector<Scheme>& schemes, int trials,
                                 std::uint64_t seed, int threads = 1);

RateStats monte_carlo_rate(const Scenario& sc, Scheme scheme, double snr_db,
                           int trials, std::uint64_t seed, int threads = 1);

// Large-system prediction vs Monte Carlo, per class and SNR point.
struct DeMcRow {
    Scheme scheme = Scheme::tpe;
    double snr_db = 0.0;
    int class_id = 0;
    double de_rate_bits = 0.0;
    double mc_rate_bits = 0.0;
    double gap_abs = 0.0;
    double gap_rel = 0.0;
};

std::vector<DeMcRow> asymptotic_vs_empirical(const Scenario& sc,
                                             const std::vector<double>& snr_grid,
                                             int trials, std::uint64_t seed,
                                             int threads = 1);

}  // namespace tpemimo
