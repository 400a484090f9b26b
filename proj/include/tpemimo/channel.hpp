#pragma once

#include <cstdint>
#include <string>

#include "tpemimo/config.hpp"
#include "tpemimo/rng.hpp"
#include "tpemimo/types.hpp"

namespace tpemimo {

// Channel covariance Phi together with its principal square root and
// eigendecomposition.  The square root is computed from the Hermitian
// eigendecomposition with negative eigenvalues clamped at zero, so
// rank-deficient user-supplied covariances are accepted.
struct CovarianceOperator {
    MatC phi;
    MatC sqrt;
    MatC eigvecs;
    VecR eigvals;  // clamped, ascending
    double spectral_norm = 0.0;
    int M = 0;
};

CovarianceOperator build_covariance(const CovarianceSpec& spec);

// True channels H and transmitter-side estimates Hhat for one coherence
// period.  Columns are per-user vectors; tau = 0 makes Hhat == H.
struct ChannelSample {
    MatC H;
    MatC Hhat;
    double tau = 0.0;
};

// Draws K i.i.d. columns h_k = Phi^{1/2} z_k with z_k ~ CN(0, I_M).
MatC sample_channel(const CovarianceOperator& cov, int K, GaussianStream& rng);

// Gauss-Markov estimate hhat_k = sqrt(1-tau^2) h_k + tau * Phi^{1/2} v_k
// with fresh v_k.  The error draws must come from a stream independent of
// the one that produced H.
MatC corrupt_csi(const MatC& H, const CovarianceOperator& cov, double tau,
                 GaussianStream& rng);

// One coherence period drawn from the trial-indexed substreams: channel
// draws use substream 0 and estimation-error draws substream 1, so tau
// sweeps at a fixed trial index reuse the same H realization.
ChannelSample sample_pair(const CovarianceOperator& cov, int K, double tau,
                          std::uint64_t master_seed, std::uint64_t trial);

// Debug dump: header line (M, K, tau, seed) then row-major "re im" pairs,
// H first, Hhat second.
void dump_channel_sample(const ChannelSample& s, std::uint64_t seed,
                         const std::string& path);

}  // namespace tpemimo
