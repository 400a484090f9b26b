#pragma once

#include <string>
#include <vector>

#include "tpemimo/types.hpp"

namespace tpemimo {

// System model parameters shared by every module: a base station with M
// antennas serves K single-antenna users under a total transmit power
// budget P, receiver noise variance sigma2, channel-estimate quality
// tau in [0,1] (0 = perfect, 1 = statistics only) and polynomial order J.
struct SystemConfig {
    int M = 0;
    int K = 0;
    double P = 0.0;
    double sigma2 = 1.0;
    double tau = 0.0;
    int J = 1;

    double rho() const { return P / sigma2; }
    double snr_db() const { return 10.0 * std::log10(rho()); }
};

// Per-user power weights, the diagonal of the allocation matrix.
struct PowerAllocation {
    VecR p;
    // 0-based class id per user; empty when the allocation is uniform.
    std::vector<int> class_of_user;
    int num_classes = 1;

    double trace() const { return p.sum(); }
};

// Antenna covariance specification.  The exponential model has unit
// diagonal and [Phi]_{ij} = a^{j-i} for i <= j.
struct CovarianceSpec {
    enum class Kind { exponential, identity, explicit_matrix };
    Kind kind = Kind::identity;
    double a = 0.0;
    int M = 0;
    MatC matrix;  // only for explicit_matrix

    static CovarianceSpec exponential(double a, int M);
    static CovarianceSpec identity(int M);
    static CovarianceSpec explicit_mat(MatC phi);
};

PowerAllocation uniform_power(double P, int K);

// Splits K users into equal-size contiguous classes with weights c and
// sets p_k = c_class(k) / K.  K must be divisible by the class count.
PowerAllocation class_power(const std::vector<double>& class_weights, int K);

// Checks all invariants and returns the pair unchanged.  The scaling
// guard rejects allocations with p_k * K above `scaling_guard`; it only
// exists to catch gross misconfiguration.
void validate_config(const SystemConfig& cfg, const PowerAllocation& alloc,
                     double scaling_guard = 100.0);

// Resolved contents of a JSON config document.
struct LoadedConfig {
    SystemConfig cfg;
    CovarianceSpec cov;
    PowerAllocation alloc;
    std::vector<double> class_weights;  // empty for uniform power
};

LoadedConfig load_config_json(const std::string& text);
LoadedConfig load_config_file(const std::string& path);
std::string config_to_json(const LoadedConfig& lc);

}  // namespace tpemimo
