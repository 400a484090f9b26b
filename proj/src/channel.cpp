#include "tpemimo/channel.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace tpemimo {

static MatC exponential_phi(double a, int M) {
    MatC phi(M, M);
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j)
            phi(i, j) = std::pow(a, std::abs(j - i));
    return phi;
}

CovarianceOperator build_covariance(const CovarianceSpec& spec) {
    if (spec.M < 1) throw ConfigError("covariance dimension must be >= 1");

    CovarianceOperator op;
    op.M = spec.M;
    switch (spec.kind) {
        case CovarianceSpec::Kind::exponential:
            if (!(std::abs(spec.a) < 1.0))
                throw ConfigError("exponential correlation needs |a| < 1");
            op.phi = exponential_phi(spec.a, spec.M);
            break;
        case CovarianceSpec::Kind::identity:
            op.phi = MatC::Identity(spec.M, spec.M);
            break;
        case CovarianceSpec::Kind::explicit_matrix: {
            const MatC& m = spec.matrix;
            if (m.rows() != spec.M || m.cols() != spec.M)
                throw ConfigError("explicit covariance is not square");
            const double scale = std::max(1.0, m.norm());
            if ((m - m.adjoint()).norm() > 1e-10 * scale)
                throw ConfigError("explicit covariance is not Hermitian");
            op.phi = 0.5 * (m + m.adjoint());
            break;
        }
    }

    Eigen::SelfAdjointEigenSolver<MatC> es(op.phi);
    if (es.info() != Eigen::Success)
        throw NumericError("covariance eigendecomposition failed");
    op.eigvals = es.eigenvalues();
    op.eigvecs = es.eigenvectors();
    op.spectral_norm = op.eigvals.cwiseAbs().maxCoeff();

    const double floor = -1e-12 * std::max(1.0, op.spectral_norm);
    for (int i = 0; i < op.M; ++i) {
        if (op.eigvals(i) < floor)
            throw ConfigError("explicit covariance is not positive semi-definite");
        if (op.eigvals(i) < 0.0) op.eigvals(i) = 0.0;
    }

    op.sqrt = op.eigvecs * op.eigvals.cwiseSqrt().asDiagonal() *
              op.eigvecs.adjoint();
    return op;
}

MatC sample_channel(const CovarianceOperator& cov, int K, GaussianStream& rng) {
    if (K < 1) throw ConfigError("sample_channel: K must be >= 1");
    MatC z(cov.M, K);
    rng.fill(z);
    return cov.sqrt * z;
}

MatC corrupt_csi(const MatC& H, const CovarianceOperator& cov, double tau,
                 GaussianStream& rng) {
    if (!(tau >= 0.0 && tau <= 1.0))
        throw ConfigError("corrupt_csi: tau must lie in [0,1]");
    if (tau == 0.0) return H;
    MatC v(cov.M, H.cols());
    rng.fill(v);
    return std::sqrt(1.0 - tau * tau) * H + tau * (cov.sqrt * v);
}

ChannelSample sample_pair(const CovarianceOperator& cov, int K, double tau,
                          std::uint64_t master_seed, std::uint64_t trial) {
    GaussianStream chan = GaussianStream::for_trial(master_seed, trial, 0);
    GaussianStream err = GaussianStream::for_trial(master_seed, trial, 1);
    ChannelSample s;
    s.tau = tau;
    s.H = sample_channel(cov, K, chan);
    s.Hhat = corrupt_csi(s.H, cov, tau, err);
    return s;
}

void dump_channel_sample(const ChannelSample& s, std::uint64_t seed,
                         const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open dump file: " + path);
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%ld %ld %.17g %llu\n", long(s.H.rows()),
                  long(s.H.cols()), s.tau, (unsigned long long)seed);
    out << buf;
    auto write_mat = [&](const MatC& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                std::snprintf(buf, sizeof(buf), "%.17g %.17g%c", m(i, j).real(),
                              m(i, j).imag(), j + 1 == m.cols() ? '\n' : ' ');
                out << buf;
            }
        }
    };
    write_mat(s.H);
    write_mat(s.Hhat);
}

}  // namespace tpemimo
