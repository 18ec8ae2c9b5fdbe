#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "softbokeh/fusion.hpp"
#include "softbokeh/render.hpp"

namespace softbokeh {

/// Every tunable of the command-line tool. Defaults are the reference
/// configuration; a TOML file given with --config is overridden by flags.
struct CliConfig {
    double alpha = 3.0;
    double beta = 5.0;
    double bright_threshold = 0.99;
    std::string base_map = "identity";
    bool any_channel = false;
    double gamma = 100.0;
    double sigma = 0.25;
    double phi = 0.5;
    int layers = 15;
    std::string schedule = "growing";
    int uniform_step = 4;
    std::string shape = "soft";
    double eps_div = 1e-6;
    std::string normalization = "fixed_range";
    int scales = 4;
    double theta = 0.25;
    double zeta = 10.0;
    int feather_radius = 5;
    int steps = 200;
    double lr = 0.05;
    std::string method = "poisson_optimized";
    int pyramid_levels = 4;
    std::uint64_t seed = 0;
    unsigned threads = 0;

    RenderConfig render_config() const;
    FusionConfig fusion_config() const;
};

/// Runs one command (`args` excludes the program name). Returns the process
/// exit code; failures print a single diagnostic line to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace softbokeh
