#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace ptycho {

struct Extent {
    std::size_t rows = 0;
    std::size_t cols = 0;
    bool operator==(const Extent&) const = default;
};

/// Top-left corner of a probe window in object pixel coordinates.
struct Position {
    std::size_t row = 0;
    std::size_t col = 0;
    auto operator<=>(const Position&) const = default;
};

/// Ordered probe positions plus the geometry they refer to.
struct ScanPlan {
    std::vector<Position> positions;
    Extent probe;
    Extent object;

    [[nodiscard]] std::size_t size() const noexcept { return positions.size(); }
    [[nodiscard]] bool in_bounds(const Position& p) const noexcept {
        return probe.rows <= object.rows && probe.cols <= object.cols &&
               p.row <= object.rows - probe.rows && p.col <= object.cols - probe.cols;
    }
    /// Throws std::invalid_argument on empty extents, out-of-bounds or duplicate positions.
    void validate() const;

    bool operator==(const ScanPlan&) const = default;
};

/// Row-major grid with spacing `step` from (0,0). Rejects a probe larger than the object.
ScanPlan raster_plan(Extent object, Extent probe, std::size_t step);

/// raster_plan with each position displaced by independent integers drawn from
/// [-jitter, jitter] (seeded), then clamped in bounds. Breaks the periodic
/// object/probe ambiguity of a perfect grid. Requires 2*jitter < step.
ScanPlan jittered_raster_plan(Extent object, Extent probe, std::size_t step, std::size_t jitter,
                              std::uint64_t seed);

/// Gaussian full width at half maximum, 2*sqrt(2 ln 2)*sigma.
double gaussian_fwhm(double sigma);

/// max(0, 1 - step / FWHM) for a Gaussian probe magnitude of width `probe_sigma`.
double overlap_ratio(double step, double probe_sigma);

struct PointF {
    double row = 0.0;
    double col = 0.0;
};

/// Golden-angle (Vogel) spiral about `center`, scaled so its mean nearest-neighbour
/// spacing equals `spacing`. Points are rounded, clamped in bounds and de-duplicated.
ScanPlan fermat_plan(std::size_t n_points, double spacing, PointF center, Extent object, Extent probe);

/// Index-uniform thinning; keeps round(j*(n-1)/(keep-1)) for j in [0, keep).
ScanPlan thin_plan(const ScanPlan& plan, std::size_t keep);

/// Mean distance from each position to its nearest neighbour; 0 for fewer than 2 points.
double mean_nearest_neighbor_spacing(const ScanPlan& plan);

/// Per-pixel flag (row-major, object-sized) set when any probe window covers the pixel.
std::vector<bool> coverage_mask(const ScanPlan& plan);

}  // namespace ptycho
