#pragma once

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <string>

#include "ptycho/field.hpp"

namespace testing_support {

using ptycho::Complex;
using ptycho::ComplexField2D;
using ptycho::RealField2D;

inline RealField2D random_real(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double lo = -1.0,
                               double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    RealField2D f(rows, cols);
    for (auto& v : f) v = u(rng);
    return f;
}

inline ComplexField2D random_complex(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    ComplexField2D f(rows, cols);
    for (auto& v : f) v = {n(rng), n(rng)};
    return f;
}

/// Unitary DFT by direct summation; sign -1 forward, +1 inverse.
inline ComplexField2D direct_dft(const ComplexField2D& x, int sign) {
    const std::size_t R = x.rows(), C = x.cols();
    ComplexField2D out(R, C);
    const double scale = 1.0 / std::sqrt(static_cast<double>(R * C));
    for (std::size_t k = 0; k < R; ++k) {
        for (std::size_t l = 0; l < C; ++l) {
            Complex acc{};
            for (std::size_t m = 0; m < R; ++m) {
                for (std::size_t n = 0; n < C; ++n) {
                    const double ang = sign * 2.0 * std::numbers::pi *
                                       (double(k * m) / double(R) + double(l * n) / double(C));
                    acc += x(m, n) * std::polar(1.0, ang);
                }
            }
            out(k, l) = acc * scale;
        }
    }
    return out;
}

inline double max_abs_diff(const ComplexField2D& a, const ComplexField2D& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double max_abs_diff(const RealField2D& a, const RealField2D& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// |fd - g| / max(|fd|, |g|, floor).
inline double relative_error(double fd, double g, double floor = 1e-3) {
    return std::abs(fd - g) / std::max({std::abs(fd), std::abs(g), floor});
}

/// Floor for relative_error in gradient checks: 1e-3 of the largest partial
/// (at least 1e-3), so partials far below the gradient's scale are judged
/// against it rather than against their own rounding noise.
template <typename Field>
double fd_floor(const Field& analytic) {
    double m = 1.0;
    for (const auto& v : analytic) m = std::max({m, std::abs(std::real(v)), std::abs(std::imag(v))});
    return 1e-3 * m;
}

/// Worst relative error of `analytic` against central differences of `energy`
/// with respect to every entry of `x` (x is restored after each probe).
inline double worst_fd_error(RealField2D& x, const RealField2D& analytic, const std::function<double()>& energy,
                             double h = 1e-6) {
    const double floor = fd_floor(analytic);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + h;
        const double up = energy();
        x[i] = keep - h;
        const double down = energy();
        x[i] = keep;
        worst = std::max(worst, relative_error((up - down) / (2.0 * h), analytic[i], floor));
    }
    return worst;
}

/// Same for a complex field with packed dE/dRe + i dE/dIm gradients.
inline double worst_fd_error(ComplexField2D& x, const ComplexField2D& analytic,
                             const std::function<double()>& energy, double h = 1e-6) {
    const double floor = fd_floor(analytic);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const Complex keep = x[i];
        for (const Complex step : {Complex(h, 0.0), Complex(0.0, h)}) {
            x[i] = keep + step;
            const double up = energy();
            x[i] = keep - step;
            const double down = energy();
            x[i] = keep;
            const double g = step.real() != 0.0 ? analytic[i].real() : analytic[i].imag();
            worst = std::max(worst, relative_error((up - down) / (2.0 * h), g, floor));
        }
    }
    return worst;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("ptycho_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testing_support
