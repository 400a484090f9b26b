#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "tpemimo/types.hpp"

namespace tpemimo {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Collapses (master seed, trial index, substream id) into one engine seed.
// Every Monte Carlo worker derives its own stream this way, so results do
// not depend on scheduling order.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t trial,
                                    std::uint64_t substream) {
    std::uint64_t s = master;
    splitmix64(s);
    s ^= 0x2545f4914f6cdd1dULL * (trial + 1);
    splitmix64(s);
    s ^= 0x9e3779b97f4a7c15ULL * (substream + 1);
    return splitmix64(s);
}

// Seeded stream of circularly symmetric complex Gaussians, CN(0,1).
// Real and imaginary parts carry variance 1/2 each.  Box-Muller is done
// by hand so draws do not depend on the standard library's distribution
// internals.
class GaussianStream {
  public:
    explicit GaussianStream(std::uint64_t seed) : eng_(seed) {}

    static GaussianStream for_trial(std::uint64_t master, std::uint64_t trial,
                                    std::uint64_t substream) {
        return GaussianStream(substream_seed(master, trial, substream));
    }

    // Uniform on (0,1]; never returns 0 so log() below is safe.
    double uniform_pos() {
        return 1.0 - static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    // Uniform on [0,1).
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    cxd complex_normal() {
        const double r = std::sqrt(-std::log(uniform_pos()));
        const double phase = 2.0 * std::numbers::pi * uniform();
        return cxd(r * std::cos(phase), r * std::sin(phase));
    }

    void fill(MatC& a) {
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            for (Eigen::Index i = 0; i < a.rows(); ++i)
                a(i, j) = complex_normal();
    }

  private:
    std::mt19937_64 eng_;
};

}  // namespace tpemimo
