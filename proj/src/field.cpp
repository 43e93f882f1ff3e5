#include "ptycho/field.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace ptycho {
namespace {

// FFTW planning is not thread-safe, execution with the new-array interface is.
// Plans are made once per (shape, direction) and kept for the process lifetime.
class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(std::size_t rows, std::size_t cols, int sign) {
        const auto key = std::make_tuple(rows, cols, sign);
        std::lock_guard lock(mutex_);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        std::vector<Complex> scratch_in(rows * cols), scratch_out(rows * cols);
        fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols),
                                          reinterpret_cast<fftw_complex*>(scratch_in.data()),
                                          reinterpret_cast<fftw_complex*>(scratch_out.data()),
                                          sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (plan == nullptr) throw std::runtime_error("fftw: failed to create plan");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

ComplexField2D unitary_transform(const ComplexField2D& f, int sign) {
    ComplexField2D out(f.rows(), f.cols());
    fftw_plan plan = plan_cache().get(f.rows(), f.cols(), sign);
    // Out-of-place complex transforms leave the input untouched.
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(f.data())),
                     reinterpret_cast<fftw_complex*>(out.data()));
    const double scale = 1.0 / std::sqrt(static_cast<double>(f.size()));
    for (auto& v : out) v *= scale;
    return out;
}

}  // namespace

ComplexField2D fft2(const ComplexField2D& f) { return unitary_transform(f, FFTW_FORWARD); }

ComplexField2D ifft2(const ComplexField2D& f) { return unitary_transform(f, FFTW_BACKWARD); }

ComplexField2D fresnel_propagate(const ComplexField2D& f, double distance, double wavelength,
                                 double pixel_pitch) {
    if (!(wavelength > 0.0)) throw std::invalid_argument("fresnel_propagate: wavelength must be > 0");
    if (!(pixel_pitch > 0.0)) throw std::invalid_argument("fresnel_propagate: pixel_pitch must be > 0");
    if (distance == 0.0) return f;

    ComplexField2D spectrum = fft2(f);
    const double rows = static_cast<double>(f.rows());
    const double cols = static_cast<double>(f.cols());
    const double coeff = -std::numbers::pi * wavelength * distance;
    for (std::size_t r = 0; r < f.rows(); ++r) {
        const double v = fft_frequency_index(r, f.rows()) / (rows * pixel_pitch);
        for (std::size_t c = 0; c < f.cols(); ++c) {
            const double u = fft_frequency_index(c, f.cols()) / (cols * pixel_pitch);
            spectrum(r, c) *= std::polar(1.0, coeff * (u * u + v * v));
        }
    }
    return ifft2(spectrum);
}

Gradient2D grad2(const RealField2D& f) {
    const auto rows = f.rows();
    const auto cols = f.cols();
    Gradient2D g{RealField2D(rows, cols), RealField2D(rows, cols)};
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (c + 1 < cols) g.along_cols(r, c) = f(r, c + 1) - f(r, c);
            if (r + 1 < rows) g.along_rows(r, c) = f(r + 1, c) - f(r, c);
        }
    }
    return g;
}

RealField2D grad2_adjoint(const RealField2D& d_cols, const RealField2D& d_rows) {
    d_cols.require_same_shape(d_rows, "grad2_adjoint");
    const auto rows = d_cols.rows();
    const auto cols = d_cols.cols();
    RealField2D out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (c + 1 < cols) {
                out(r, c + 1) += d_cols(r, c);
                out(r, c) -= d_cols(r, c);
            }
            if (r + 1 < rows) {
                out(r + 1, c) += d_rows(r, c);
                out(r, c) -= d_rows(r, c);
            }
        }
    }
    return out;
}

Polar split(const ComplexField2D& f) {
    Polar p{RealField2D(f.rows(), f.cols()), RealField2D(f.rows(), f.cols())};
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double m = std::abs(f[i]);
        p.magnitude[i] = m;
        // std::arg returns [-pi, pi]; fold -pi onto pi.
        double phi = m == 0.0 ? 0.0 : std::arg(f[i]);
        if (phi == -std::numbers::pi) phi = std::numbers::pi;
        p.phase[i] = phi;
    }
    return p;
}

ComplexField2D polar_field(const RealField2D& magnitude, const RealField2D& phase) {
    magnitude.require_same_shape(phase, "polar_field");
    ComplexField2D out(magnitude.rows(), magnitude.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = Complex(magnitude[i] * std::cos(phase[i]), magnitude[i] * std::sin(phase[i]));
    }
    return out;
}

ComplexField2D join(const RealField2D& magnitude, const RealField2D& phase) {
    magnitude.require_same_shape(phase, "join");
    for (double m : magnitude) {
        if (!(m >= 0.0)) throw std::invalid_argument("join: magnitude must be non-negative");
    }
    return polar_field(magnitude, phase);
}

double squared_norm(const ComplexField2D& f) {
    double s = 0.0;
    for (const auto& v : f) s += std::norm(v);
    return s;
}

double squared_norm(const RealField2D& f) {
    double s = 0.0;
    for (double v : f) s += v * v;
    return s;
}

double norm2(const ComplexField2D& f) { return std::sqrt(squared_norm(f)); }

ComplexField2D fftshift(const ComplexField2D& f) {
    ComplexField2D out(f.rows(), f.cols());
    const auto dr = f.rows() / 2;
    const auto dc = f.cols() / 2;
    for (std::size_t r = 0; r < f.rows(); ++r) {
        for (std::size_t c = 0; c < f.cols(); ++c) {
            out((r + dr) % f.rows(), (c + dc) % f.cols()) = f(r, c);
        }
    }
    return out;
}

}  // namespace ptycho
