#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptycho/field.hpp"
#include "ptycho/forward.hpp"
#include "ptycho/metrics.hpp"
#include "ptycho/recon.hpp"

namespace ptycho {

/// Raised for malformed or inconsistent files; the message names the file and the problem.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kDatasetFormatVersion = 1;
inline constexpr int kFieldFormatVersion = 1;

/// Everything in manifest.json besides the pattern payload.
struct DatasetManifest {
    int format_version = kDatasetFormatVersion;
    Extent object;
    Extent probe;
    std::vector<Position> positions;
    std::string pattern_dtype = "f64le";
    std::size_t pattern_count = 0;
    std::string provenance;
    /// Scalar scan metadata (e.g. probe_sigma, step, overlap).
    std::map<std::string, double> scan;
    /// Plan kind such as "raster" or "fermat"; empty when unknown.
    std::string plan_kind;
};

/// Writes `dir/manifest.json` and `dir/patterns.bin` (row-major little-endian f64,
/// patterns concatenated in plan order). Creates `dir` if needed.
void write_dataset(const DiffractionSet& dataset, const std::filesystem::path& dir,
                   const DatasetManifest& extra = {});
DiffractionSet read_dataset(const std::filesystem::path& dir);
DatasetManifest read_manifest(const std::filesystem::path& dir);

/// Single-line JSON header (rows, cols, dtype "c128le") followed by interleaved
/// little-endian re/im doubles.
void write_field(const ComplexField2D& field, const std::filesystem::path& path);
ComplexField2D read_field(const std::filesystem::path& path);

struct RangePolicy {
    /// Fixed [low, high] when set; otherwise the channel's own min/max.
    std::optional<double> low;
    std::optional<double> high;

    static RangePolicy min_max() { return {}; }
    static RangePolicy fixed(double low, double high) { return {low, high}; }
};

/// 16-bit binary PGM (P5, maxval 65535, big-endian samples), linear map of the range.
void export_image(const RealField2D& channel, const std::filesystem::path& path,
                  const RangePolicy& policy = RangePolicy::min_max());

void write_history_csv(const std::vector<HistoryRow>& history, const std::filesystem::path& path);
void write_residual_csv(double initial, const std::vector<double>& residuals,
                        const std::filesystem::path& path);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

/// Round-trip text for a double ("%.17g").
std::string format_double(double v);
/// RFC 4180 quoting when the cell needs it.
std::string csv_cell(const std::string& text);

}  // namespace ptycho
