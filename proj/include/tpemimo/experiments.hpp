#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tpemimo/evaluation.hpp"
#include "tpemimo/types.hpp"

namespace tpemimo {

inline constexpr const char* kToolVersion = "tpemimo 1.0.0";

// Named experiment presets:
//   fig2 : per-coherence operation counts vs coherence period
//          (M=500, K=100, eta_DL=1/2, mu=2, rzf/rzf2/tpe J=1..5)
//   fig3 : rate vs SNR for tau in {0.1,0.4,0.7} (M=128, K=32, J=3)
//   fig4 : rate vs SNR for J in {2,3,4} (M=512, K=128, tau=0.1)
//   fig5 : per-user rate loss tpe vs rzf over K in {8..64}, M=4K,
//          J in {3,4,5} at 10 dB plus J=4 at 12 dB (tau=0.1)
//   fig6 : rzf vs tpe vs tpeopt (M=128, K=32, J=3, tau=0.4)
//   fig7 : per-class rate with four power classes, prediction vs Monte
//          Carlo (M=256, K=64, J=3, tau=0.1, weights 1:2:3:4)
//   custom : scenario from a JSON config file
struct RunOptions {
    std::string preset;
    std::string config_path;    // required for "custom"
    std::string weights_path;   // optional pinned tpe coefficients
    int trials = -1;            // -1 = preset default
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    std::string format = "csv";  // csv | json
    int threads = 1;
    std::vector<double> snr_grid;          // custom only
    std::vector<std::string> scheme_names; // custom only
};

struct RunResult {
    std::vector<std::string> files;
    double wall_time_s = 0.0;
};

std::vector<std::string> preset_names();

// Human-readable sheet of every resolved parameter of a preset.
std::string describe(const std::string& preset,
                     const std::string& config_path = "");

// Executes a preset and writes the result table plus a JSON manifest
// (resolved config, seed, tool version, wall time).  Given the same seed
// and options, the result table is byte-identical across reruns and
// independent of the thread count.
RunResult run(const RunOptions& options);

std::string sha1_hex(const std::string& data);
std::string format_double(double v);

}  // namespace tpemimo
