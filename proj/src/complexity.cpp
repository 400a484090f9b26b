#include "tpemimo/complexity.hpp"

#include <cmath>

namespace tpemimo {

std::string prec_scheme_name(PrecScheme s) {
    switch (s) {
        case PrecScheme::rzf: return "rzf";
        case PrecScheme::rzf2: return "rzf2";
        case PrecScheme::tpe: return "tpe";
    }
    return "tpe";
}

PrecScheme prec_scheme_from_name(const std::string& name) {
    if (name == "rzf") return PrecScheme::rzf;
    if (name == "rzf2") return PrecScheme::rzf2;
    if (name == "tpe") return PrecScheme::tpe;
    throw ConfigError("unknown precoder scheme: " + name);
}

double data_symbols(double T_coherence, double eta_DL, double mu,
                    std::int64_t K) {
    if (!(eta_DL > 0.0 && eta_DL <= 1.0))
        throw ConfigError("data_symbols: eta_DL must lie in (0,1]");
    if (mu < 1.0) throw ConfigError("data_symbols: mu must be >= 1");
    if (T_coherence < 0.0) throw ConfigError("data_symbols: negative period");
    const double t = eta_DL * T_coherence - mu * double(K);
    if (t < 0.0)
        throw ConfigError("coherence period too short for pilot overhead");
    return t;
}

namespace {

std::int64_t integral_t_data(const ComplexityInputs& in) {
    if (in.M < 1 || in.K < 1 || in.J < 1)
        throw ConfigError("ops_per_coherence: invalid dimensions");
    if (in.T_data < 0.0)
        throw ConfigError("coherence period too short for pilot overhead");
    const double r = std::round(in.T_data);
    if (std::abs(in.T_data - r) > 1e-9)
        throw ConfigError("ops_per_coherence: T_data must be an integer");
    return static_cast<std::int64_t>(r);
}

// base + kc * K^3 / 3, rounded to the nearest integer.
std::int64_t with_thirds(std::int64_t base, std::int64_t kc, std::int64_t K,
                         bool* rounded) {
    const std::int64_t k3 = kc * K * K * K;
    *rounded = (k3 % 3) != 0;
    return base + (k3 + 1) / 3;
}

}  // namespace

ComplexityReport ops_per_coherence(PrecScheme scheme,
                                   const ComplexityInputs& in) {
    const std::int64_t M = in.M, K = in.K, J = in.J;
    const std::int64_t T = integral_t_data(in);

    ComplexityReport rep;
    rep.scheme = scheme;
    switch (scheme) {
        case PrecScheme::rzf: {
            const std::int64_t base =
                4 * K * K * M + K * (M + 2) - K * K + T * (2 * M * K - M);
            rep.per_coherence_ops = with_thirds(base, 1, K, &rep.rounded);
            rep.breakdown = {
                {"gram", double(K * K * (2 * M - 1))},
                {"regularize", double(K)},
                {"factor_and_solve", double(K) * K * K / 3.0 +
                                         double(2 * K * K * M)},
                {"power_scale", double(M * K + K)},
                {"per_symbol", double(T) * double(2 * M * K - M)},
            };
            break;
        }
        case PrecScheme::rzf2: {
            const std::int64_t base =
                2 * K * K * M - K * K + 2 * K + T * (4 * M * K - 2 * M + K);
            rep.per_coherence_ops = with_thirds(base, 4, K, &rep.rounded);
            rep.breakdown = {
                {"gram", double(2 * K * K * M - K * K)},
                {"factor", 4.0 * double(K) * K * K / 3.0},
                {"scaling", double(2 * K)},
                {"per_symbol", double(T) * double(4 * M * K - 2 * M + K)},
            };
            break;
        }
        case PrecScheme::tpe: {
            rep.per_coherence_ops =
                T * ((4 * J - 2) * M * K + (J - 1) * M + K * (2 - J));
            rep.rounded = false;
            rep.breakdown = {
                {"matched_filter_stage", double(T) * double(K + M * (2 * K - 1))},
                {"chain_stages", double(T) * double(J - 1) *
                                     double(M * (2 * K - 1) + K * (2 * M - 1))},
                {"combine", double(T) * double(M * (2 * J - 1))},
            };
            break;
        }
    }
    return rep;
}

std::int64_t rzf_sweep_offset(std::int64_t M, std::int64_t K) {
    return 2 * M * K * K;
}

std::int64_t first_symbol_delay(PrecScheme scheme, std::int64_t M,
                                std::int64_t K, std::int64_t J) {
    if (M < 1 || K < 1 || J < 1)
        throw ConfigError("first_symbol_delay: invalid dimensions");
    switch (scheme) {
        case PrecScheme::rzf: return 4 * M * K * K;
        case PrecScheme::rzf2: return 2 * M * K * K;
        case PrecScheme::tpe: return 4 * J * M * K;
    }
    return 0;
}

double first_symbol_ratio(PrecScheme numerator, PrecScheme denominator,
                          std::int64_t M, std::int64_t K, std::int64_t J) {
    return double(first_symbol_delay(numerator, M, K, J)) /
           double(first_symbol_delay(denominator, M, K, J));
}

BreakEven break_even(std::int64_t M, std::int64_t K, std::int64_t J) {
    if (M < 1 || K < 1 || J < 1) throw ConfigError("break_even: invalid input");
    // Precompute cost of rzf over the slope difference of the two counts.
    const double precompute = 4.0 * K * K * M + double(K) * K * K / 3.0 +
                              double(K * (M + 2)) - double(K * K);
    const double slope_diff =
        4.0 * (J - 1) * M * K + double(J * M) + double((2 - J) * K);
    BreakEven be;
    be.exact = precompute / slope_diff;
    if (J >= 2) be.approx = double(K) / double(J - 1);
    return be;
}

}  // namespace tpemimo
