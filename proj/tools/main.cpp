#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tpemimo/experiments.hpp"
#include "tpemimo/types.hpp"

namespace {

// Parses "lo:step:hi" or a comma-separated list of dB values.
std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    if (text.empty()) return grid;
    if (text.find(':') != std::string::npos) {
        double lo, step, hi;
        if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &lo, &step, &hi) != 3 ||
            step <= 0.0)
            throw tpemimo::ConfigError("bad snr grid: " + text);
        for (double v = lo; v <= hi + 1e-9; v += step) grid.push_back(v);
        return grid;
    }
    std::string token;
    std::stringstream ss(text);
    while (std::getline(ss, token, ','))
        grid.push_back(std::stod(token));
    return grid;
}

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> out;
    std::string token;
    std::stringstream ss(text);
    while (std::getline(ss, token, ',')) out.push_back(token);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(tpemimo::kToolVersion) +
                 " - polynomial-expansion precoding experiments"};
    app.require_subcommand(1);

    tpemimo::RunOptions opt;
    std::string snr_text, scheme_text;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--trials", opt.trials, "Monte Carlo trials per point");
        cmd->add_option("--seed", opt.seed, "master random seed");
        cmd->add_option("--out", opt.out_dir, "output directory");
        cmd->add_option("--format", opt.format, "csv or json");
        cmd->add_option("--threads", opt.threads, "worker threads for trials");
        cmd->add_option("--weights", opt.weights_path,
                        "JSON file pinning the tpe coefficients");
    };

    CLI::App* cmd_run = app.add_subcommand("run", "run a named preset");
    cmd_run->add_option("--preset", opt.preset, "preset name")->required();
    cmd_run->add_option("--config", opt.config_path,
                        "scenario file (custom preset)");
    cmd_run->add_option("--snr", snr_text, "snr grid, lo:step:hi or list");
    cmd_run->add_option("--schemes", scheme_text, "comma-separated schemes");
    add_common(cmd_run);

    CLI::App* cmd_sweep =
        app.add_subcommand("sweep", "run a custom scenario from a config file");
    cmd_sweep->add_option("--config", opt.config_path, "scenario file")
        ->required();
    cmd_sweep->add_option("--snr", snr_text, "snr grid, lo:step:hi or list");
    cmd_sweep->add_option("--schemes", scheme_text, "comma-separated schemes");
    add_common(cmd_sweep);

    std::string describe_preset, describe_config;
    CLI::App* cmd_describe =
        app.add_subcommand("describe", "print a preset parameter sheet");
    cmd_describe->add_option("--preset", describe_preset, "preset name")
        ->required();
    cmd_describe->add_option("--config", describe_config,
                             "scenario file (custom preset)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (cmd_describe->parsed()) {
            std::cout << tpemimo::describe(describe_preset, describe_config);
            return 0;
        }
        if (cmd_sweep->parsed()) opt.preset = "custom";
        opt.snr_grid = parse_grid(snr_text);
        if (!scheme_text.empty()) opt.scheme_names = split_csv(scheme_text);

        const tpemimo::RunResult res = tpemimo::run(opt);
        for (const auto& f : res.files) std::cout << f << "\n";
        return 0;
    } catch (const tpemimo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const tpemimo::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
