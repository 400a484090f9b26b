#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tpemimo/types.hpp"

namespace tpemimo {

enum class PrecScheme { rzf, rzf2, tpe };

std::string prec_scheme_name(PrecScheme s);
PrecScheme prec_scheme_from_name(const std::string& name);

// Abstract complex-operation tallies (additions + multiplications), not
// flops; hardware-dependent constants are out of scope.
struct ComplexityInputs {
    std::int64_t M = 0;
    std::int64_t K = 0;
    std::int64_t J = 1;
    double T_data = 0.0;  // downlink data channel uses per coherence period
};

struct ComplexityReport {
    PrecScheme scheme = PrecScheme::tpe;
    std::int64_t per_coherence_ops = 0;
    // true when a K^3/3 term did not divide evenly and the total was
    // rounded to the nearest integer
    bool rounded = false;
    std::vector<std::pair<std::string, double>> breakdown;
};

// Number of data channel uses, T_data = eta_DL * T_coherence - mu * K.
// Negative results are rejected; fractional values are possible.
double data_symbols(double T_coherence, double eta_DL, double mu,
                    std::int64_t K);

// Operations per coherence period:
//   rzf : 4K^2M + K^3/3 + K(M+2) - K^2 + T_data (2MK - M)
//   rzf2: 2K^2M + 4K^3/3 - K^2 + 2K + T_data (4MK - 2M + K)
//   tpe : T_data ((4J-2)MK + (J-1)M + K(2-J))
ComplexityReport ops_per_coherence(PrecScheme scheme,
                                   const ComplexityInputs& in);

// Bookkeeping offset between the rzf formula above and the published
// operation-count sweep it is compared against: the sweep counts one
// extra Gram-product pass, 2MK^2, at every point.  Kept separate so the
// formula stays citable.
std::int64_t rzf_sweep_offset(std::int64_t M, std::int64_t K);

// Operations before the first transmitted symbol:
//   rzf: 4MK^2,  rzf2: 2MK^2,  tpe: 4JMK.
std::int64_t first_symbol_delay(PrecScheme scheme, std::int64_t M,
                                std::int64_t K, std::int64_t J);

double first_symbol_ratio(PrecScheme numerator, PrecScheme denominator,
                          std::int64_t M, std::int64_t K, std::int64_t J);

// T_data threshold below which the tpe count beats the rzf count, plus
// the K/(J-1) rule of thumb (undefined for J = 1).
struct BreakEven {
    double exact = 0.0;
    std::optional<double> approx;
};

BreakEven break_even(std::int64_t M, std::int64_t K, std::int64_t J);

}  // namespace tpemimo
