#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ptycho/forward.hpp"
#include "ptycho/io.hpp"
#include "ptycho/priors.hpp"
#include "ptycho/recon.hpp"
#include "ptycho/scan.hpp"

namespace ptycho::cli {

/// Everything needed to generate a noiseless dataset.
struct SimSettings {
    std::string phantom = "chip-like";
    std::string object_file;  // overrides the phantom when set
    std::size_t object_size = 128;
    double probe_sigma = 16.0;
    std::size_t probe_size = 0;  // 0: round(4 * sigma)
    std::string plan = "raster";
    std::size_t step = 8;
    std::size_t jitter = 0;
    std::size_t n_points = 175;
    double spacing = 17.5;
    std::size_t keep = 0;  // 0: keep every fermat point
    std::uint64_t seed = 0;
    Optics optics;
};

struct Simulation {
    ComplexField2D object;
    ComplexField2D probe;
    DiffractionSet dataset;
    DatasetManifest manifest;
    double overlap = 0.0;
};

Simulation simulate(const SimSettings& s);

/// Nominal overlap of a plan: from the raster step, or from the mean
/// nearest-neighbour spacing for other plans.
double plan_overlap(const SimSettings& s, const ScanPlan& plan);

/// Image-prior weight used when none is given explicitly.
double auto_lambda_x(double overlap, double high_overlap_value, double low_overlap_value);

/// Worker count from PTYCHO_THREADS (default 1). Throws on a malformed value.
unsigned threads_from_env();

/// Runs one subcommand. `args` excludes the program name. Returns the exit code;
/// diagnostics go to `err` as a single line.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace ptycho::cli
