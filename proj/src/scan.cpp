#include "ptycho/scan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>
#include <string>

namespace ptycho {
namespace {

constexpr double kGoldenAngleDeg = 137.508;

void require_fits(Extent object, Extent probe, const char* what) {
    if (object.rows == 0 || object.cols == 0 || probe.rows == 0 || probe.cols == 0) {
        throw std::invalid_argument(std::string(what) + ": extents must be positive");
    }
    if (probe.rows > object.rows || probe.cols > object.cols) {
        throw std::invalid_argument(std::string(what) + ": probe larger than object");
    }
}

double mean_nn(const std::vector<PointF>& pts) {
    if (pts.size() < 2) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (i == j) continue;
            best = std::min(best, std::hypot(pts[i].row - pts[j].row, pts[i].col - pts[j].col));
        }
        total += best;
    }
    return total / static_cast<double>(pts.size());
}

}  // namespace

void ScanPlan::validate() const {
    require_fits(object, probe, "ScanPlan");
    std::set<Position> seen;
    for (const auto& p : positions) {
        if (!in_bounds(p)) {
            throw std::invalid_argument("ScanPlan: position (" + std::to_string(p.row) + "," +
                                        std::to_string(p.col) + ") out of bounds");
        }
        if (!seen.insert(p).second) {
            throw std::invalid_argument("ScanPlan: duplicate position (" + std::to_string(p.row) +
                                        "," + std::to_string(p.col) + ")");
        }
    }
}

ScanPlan raster_plan(Extent object, Extent probe, std::size_t step) {
    require_fits(object, probe, "raster_plan");
    if (step < 1) throw std::invalid_argument("raster_plan: step must be >= 1");
    ScanPlan plan{{}, probe, object};
    const auto row_span = object.rows - probe.rows;
    const auto col_span = object.cols - probe.cols;
    for (std::size_t r = 0; r <= row_span; r += step) {
        for (std::size_t c = 0; c <= col_span; c += step) plan.positions.push_back({r, c});
    }
    return plan;
}

ScanPlan jittered_raster_plan(Extent object, Extent probe, std::size_t step, std::size_t jitter,
                              std::uint64_t seed) {
    ScanPlan plan = raster_plan(object, probe, step);
    if (jitter == 0) return plan;
    if (2 * jitter >= step) throw std::invalid_argument("jittered_raster_plan: jitter must be < step/2");
    std::mt19937_64 rng(seed);
    const auto j = static_cast<long long>(jitter);
    std::uniform_int_distribution<long long> offset(-j, j);
    auto shift = [&](std::size_t v, std::size_t max) {
        const long long moved = static_cast<long long>(v) + offset(rng);
        return static_cast<std::size_t>(std::clamp<long long>(moved, 0, static_cast<long long>(max)));
    };
    for (auto& p : plan.positions) {
        p.row = shift(p.row, object.rows - probe.rows);
        p.col = shift(p.col, object.cols - probe.cols);
    }
    return plan;
}

double gaussian_fwhm(double sigma) { return 2.0 * std::sqrt(2.0 * std::log(2.0)) * sigma; }

double overlap_ratio(double step, double probe_sigma) {
    if (step < 0.0) throw std::invalid_argument("overlap_ratio: step must be >= 0");
    if (!(probe_sigma > 0.0)) throw std::invalid_argument("overlap_ratio: probe_sigma must be > 0");
    return std::max(0.0, 1.0 - step / gaussian_fwhm(probe_sigma));
}

ScanPlan fermat_plan(std::size_t n_points, double spacing, PointF center, Extent object, Extent probe) {
    require_fits(object, probe, "fermat_plan");
    if (n_points < 1) throw std::invalid_argument("fermat_plan: n_points must be >= 1");
    if (!(spacing > 0.0)) throw std::invalid_argument("fermat_plan: spacing must be > 0");

    const double golden = kGoldenAngleDeg * std::acos(-1.0) / 180.0;
    std::vector<PointF> unit(n_points);
    for (std::size_t n = 0; n < n_points; ++n) {
        const double radius = std::sqrt(static_cast<double>(n));
        const double theta = static_cast<double>(n) * golden;
        unit[n] = {radius * std::sin(theta), radius * std::cos(theta)};
    }
    const double unit_spacing = mean_nn(unit);
    const double scale = unit_spacing > 0.0 ? spacing / unit_spacing : 0.0;

    const double max_row = static_cast<double>(object.rows - probe.rows);
    const double max_col = static_cast<double>(object.cols - probe.cols);
    ScanPlan plan{{}, probe, object};
    std::set<Position> seen;
    for (const auto& u : unit) {
        const double r = std::clamp(std::round(center.row + scale * u.row), 0.0, max_row);
        const double c = std::clamp(std::round(center.col + scale * u.col), 0.0, max_col);
        const Position p{static_cast<std::size_t>(r), static_cast<std::size_t>(c)};
        if (seen.insert(p).second) plan.positions.push_back(p);
    }
    if (2 * plan.positions.size() < n_points) {
        throw std::invalid_argument("fermat_plan: only " + std::to_string(plan.positions.size()) +
                                    " of " + std::to_string(n_points) + " points remain in bounds");
    }
    return plan;
}

ScanPlan thin_plan(const ScanPlan& plan, std::size_t keep) {
    const auto n = plan.positions.size();
    if (keep < 1 || keep > n) {
        throw std::invalid_argument("thin_plan: keep=" + std::to_string(keep) + " outside [1, " +
                                    std::to_string(n) + "]");
    }
    ScanPlan out{{}, plan.probe, plan.object};
    out.positions.reserve(keep);
    for (std::size_t j = 0; j < keep; ++j) {
        const std::size_t idx =
            keep == 1 ? 0
                      : static_cast<std::size_t>(std::llround(static_cast<double>(j) *
                                                              static_cast<double>(n - 1) /
                                                              static_cast<double>(keep - 1)));
        out.positions.push_back(plan.positions[idx]);
    }
    return out;
}

double mean_nearest_neighbor_spacing(const ScanPlan& plan) {
    std::vector<PointF> pts;
    pts.reserve(plan.positions.size());
    for (const auto& p : plan.positions) pts.push_back({double(p.row), double(p.col)});
    return mean_nn(pts);
}

std::vector<bool> coverage_mask(const ScanPlan& plan) {
    std::vector<bool> mask(plan.object.rows * plan.object.cols, false);
    for (const auto& p : plan.positions) {
        for (std::size_t r = 0; r < plan.probe.rows; ++r) {
            for (std::size_t c = 0; c < plan.probe.cols; ++c) {
                mask[(p.row + r) * plan.object.cols + p.col + c] = true;
            }
        }
    }
    return mask;
}

}  // namespace ptycho
