#include "ptycho/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ptycho {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void put_f64(std::string& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
}

double get_f64(const char* p) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= std::uint64_t(static_cast<unsigned char>(p[b])) << (8 * b);
    return std::bit_cast<double>(bits);
}

std::string read_all(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path.string() + ": cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_all(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string() + ": cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError(path.string() + ": write failed");
}

json manifest_json(const DiffractionSet& d, const DatasetManifest& extra) {
    json positions = json::array();
    for (const auto& p : d.plan.positions) positions.push_back({p.row, p.col});
    json j;
    j["format_version"] = kDatasetFormatVersion;
    j["object_rows"] = d.plan.object.rows;
    j["object_cols"] = d.plan.object.cols;
    j["probe_rows"] = d.plan.probe.rows;
    j["probe_cols"] = d.plan.probe.cols;
    j["positions"] = std::move(positions);
    j["pattern_dtype"] = "f64le";
    j["pattern_count"] = d.patterns.size();
    j["provenance"] = extra.provenance;
    if (!extra.plan_kind.empty()) j["plan"] = extra.plan_kind;
    if (!extra.scan.empty()) j["scan"] = extra.scan;
    return j;
}

template <typename T>
T field_of(const json& j, const char* key, const fs::path& file) {
    if (!j.contains(key)) throw IoError(file.string() + ": missing key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw IoError(file.string() + ": bad value for '" + key + "': " + e.what());
    }
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_cell(const std::string& text) {
    if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
    std::string out = "\"";
    for (char ch : text) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

void write_dataset(const DiffractionSet& dataset, const fs::path& dir, const DatasetManifest& extra) {
    dataset.validate();
    fs::create_directories(dir);
    std::string blob;
    blob.reserve(dataset.size() * dataset.plan.probe.rows * dataset.plan.probe.cols * 8);
    for (const auto& p : dataset.patterns) {
        for (double v : p) put_f64(blob, v);
    }
    write_all(dir / "patterns.bin", blob);
    write_all(dir / "manifest.json", manifest_json(dataset, extra).dump(2) + "\n");
}

DatasetManifest read_manifest(const fs::path& dir) {
    const fs::path file = dir / "manifest.json";
    json j;
    try {
        j = json::parse(read_all(file));
    } catch (const json::parse_error& e) {
        throw IoError(file.string() + ": invalid JSON: " + e.what());
    }
    DatasetManifest m;
    m.format_version = field_of<int>(j, "format_version", file);
    if (m.format_version != kDatasetFormatVersion) {
        throw IoError(file.string() + ": unsupported format_version " + std::to_string(m.format_version) +
                      " (expected " + std::to_string(kDatasetFormatVersion) + ")");
    }
    m.object = {field_of<std::size_t>(j, "object_rows", file), field_of<std::size_t>(j, "object_cols", file)};
    m.probe = {field_of<std::size_t>(j, "probe_rows", file), field_of<std::size_t>(j, "probe_cols", file)};
    m.pattern_dtype = field_of<std::string>(j, "pattern_dtype", file);
    if (m.pattern_dtype != "f64le") throw IoError(file.string() + ": unsupported pattern_dtype '" + m.pattern_dtype + "'");
    m.pattern_count = field_of<std::size_t>(j, "pattern_count", file);
    for (const auto& p : field_of<std::vector<std::vector<std::size_t>>>(j, "positions", file)) {
        if (p.size() != 2) throw IoError(file.string() + ": position entries must be [row, col]");
        m.positions.push_back({p[0], p[1]});
    }
    if (m.positions.size() != m.pattern_count) {
        throw IoError(file.string() + ": pattern_count " + std::to_string(m.pattern_count) + " but " +
                      std::to_string(m.positions.size()) + " positions");
    }
    if (j.contains("provenance")) m.provenance = field_of<std::string>(j, "provenance", file);
    if (j.contains("plan")) m.plan_kind = field_of<std::string>(j, "plan", file);
    if (j.contains("scan")) m.scan = field_of<std::map<std::string, double>>(j, "scan", file);
    return m;
}

DiffractionSet read_dataset(const fs::path& dir) {
    const DatasetManifest m = read_manifest(dir);
    const fs::path blob_file = dir / "patterns.bin";
    const std::string blob = read_all(blob_file);
    const std::size_t per_pattern = m.probe.rows * m.probe.cols;
    const std::size_t expected = m.pattern_count * per_pattern * 8;
    if (blob.size() != expected) {
        throw IoError(blob_file.string() + ": length mismatch, expected " + std::to_string(expected) +
                      " bytes, found " + std::to_string(blob.size()));
    }
    DiffractionSet d{{m.positions, m.probe, m.object}, {}};
    d.patterns.reserve(m.pattern_count);
    const char* p = blob.data();
    for (std::size_t i = 0; i < m.pattern_count; ++i) {
        RealField2D pattern(m.probe.rows, m.probe.cols);
        for (std::size_t k = 0; k < per_pattern; ++k, p += 8) {
            const double v = get_f64(p);
            if (!std::isfinite(v)) {
                throw IoError(blob_file.string() + ": non-finite value in pattern " + std::to_string(i));
            }
            pattern[k] = v;
        }
        d.patterns.push_back(std::move(pattern));
    }
    try {
        d.validate();
    } catch (const std::invalid_argument& e) {
        throw IoError(dir.string() + ": " + e.what());
    }
    return d;
}

void write_field(const ComplexField2D& field, const fs::path& path) {
    json header;
    header["format_version"] = kFieldFormatVersion;
    header["rows"] = field.rows();
    header["cols"] = field.cols();
    header["dtype"] = "c128le";
    std::string bytes = header.dump() + "\n";
    bytes.reserve(bytes.size() + field.size() * 16);
    for (const auto& v : field) {
        put_f64(bytes, v.real());
        put_f64(bytes, v.imag());
    }
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_all(path, bytes);
}

ComplexField2D read_field(const fs::path& path) {
    const std::string bytes = read_all(path);
    const auto newline = bytes.find('\n');
    if (newline == std::string::npos) throw IoError(path.string() + ": missing header line");
    json header;
    try {
        header = json::parse(bytes.substr(0, newline));
    } catch (const json::parse_error& e) {
        throw IoError(path.string() + ": invalid header: " + e.what());
    }
    const int version = field_of<int>(header, "format_version", path);
    if (version != kFieldFormatVersion) {
        throw IoError(path.string() + ": unsupported format_version " + std::to_string(version));
    }
    const auto dtype = field_of<std::string>(header, "dtype", path);
    if (dtype != "c128le") throw IoError(path.string() + ": unsupported dtype '" + dtype + "'");
    const auto rows = field_of<std::size_t>(header, "rows", path);
    const auto cols = field_of<std::size_t>(header, "cols", path);
    if (rows == 0 || cols == 0) throw IoError(path.string() + ": rows and cols must be positive");
    const std::size_t payload = bytes.size() - newline - 1;
    if (payload != rows * cols * 16) {
        throw IoError(path.string() + ": length mismatch, header " + std::to_string(rows) + "x" +
                      std::to_string(cols) + " needs " + std::to_string(rows * cols * 16) +
                      " payload bytes, found " + std::to_string(payload));
    }
    ComplexField2D f(rows, cols);
    const char* p = bytes.data() + newline + 1;
    for (std::size_t i = 0; i < f.size(); ++i, p += 16) {
        f[i] = Complex(get_f64(p), get_f64(p + 8));
    }
    if (!f.all_finite()) throw IoError(path.string() + ": non-finite sample");
    return f;
}

void export_image(const RealField2D& channel, const fs::path& path, const RangePolicy& policy) {
    double lo = policy.low.value_or(0.0);
    double hi = policy.high.value_or(0.0);
    if (!policy.low || !policy.high) {
        const auto [mn, mx] = std::minmax_element(channel.begin(), channel.end());
        if (!policy.low) lo = *mn;
        if (!policy.high) hi = *mx;
    }
    const double span = hi - lo;
    std::string bytes = "P5\n" + std::to_string(channel.cols()) + " " + std::to_string(channel.rows()) + "\n65535\n";
    bytes.reserve(bytes.size() + channel.size() * 2);
    for (double v : channel) {
        const double t = span > 0.0 ? (v - lo) / span : 0.5;
        const auto level = static_cast<std::uint16_t>(std::lround(std::clamp(t, 0.0, 1.0) * 65535.0));
        bytes.push_back(static_cast<char>(level >> 8));
        bytes.push_back(static_cast<char>(level & 0xffu));
    }
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_all(path, bytes);
}

void write_history_csv(const std::vector<HistoryRow>& history, const fs::path& path) {
    std::string out = "epoch,E_o,E_total\n";
    for (const auto& h : history) {
        out += std::to_string(h.epoch) + "," + format_double(h.fidelity) + "," + format_double(h.total) + "\n";
    }
    write_all(path, out);
}

void write_residual_csv(double initial, const std::vector<double>& residuals, const fs::path& path) {
    std::string out = "sweep,residual\n0," + format_double(initial) + "\n";
    for (std::size_t i = 0; i < residuals.size(); ++i) {
        out += std::to_string(i + 1) + "," + format_double(residuals[i]) + "\n";
    }
    write_all(path, out);
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const fs::path& path) {
    std::string out = "overlap,prior,ssim_phase,ssim_magnitude,final_E_o\n";
    for (const auto& r : rows) {
        out += format_double(r.overlap) + "," + csv_cell(r.prior) + "," + format_double(r.ssim_phase) + "," +
               format_double(r.ssim_magnitude) + "," + format_double(r.final_fidelity) + "\n";
    }
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_all(path, out);
}

}  // namespace ptycho
