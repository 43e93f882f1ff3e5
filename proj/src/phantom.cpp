#include "ptycho/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace ptycho {

ComplexField2D chip_like_phantom(Extent size, std::uint64_t seed, const PhantomLevels& levels) {
    if (size.rows < 8 || size.cols < 8) throw std::invalid_argument("chip_like_phantom: size must be >= 8x8");
    std::mt19937_64 rng(seed);
    auto uniform = [&](std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, std::max(lo, hi))(rng);
    };
    std::vector<bool> feature(size.rows * size.cols, false);
    auto paint = [&](std::size_t r0, std::size_t c0, std::size_t h, std::size_t w) {
        for (std::size_t r = r0; r < std::min(size.rows, r0 + h); ++r) {
            for (std::size_t c = c0; c < std::min(size.cols, c0 + w); ++c) feature[r * size.cols + c] = true;
        }
    };

    const std::size_t short_side = std::min(size.rows, size.cols);
    const std::size_t area = size.rows * size.cols;
    const std::size_t wire_count = std::max<std::size_t>(4, area / 1500);
    const std::size_t pad_count = std::max<std::size_t>(2, area / 4000);
    const std::size_t max_width = std::max<std::size_t>(3, short_side / 20);

    for (std::size_t i = 0; i < wire_count; ++i) {
        const std::size_t width = uniform(2, max_width);
        const bool horizontal = uniform(0, 1) == 0;
        const std::size_t along = horizontal ? size.cols : size.rows;
        const std::size_t across = horizontal ? size.rows : size.cols;
        const std::size_t length = uniform(along / 4, (4 * along) / 5);
        const std::size_t start = uniform(0, along - length);
        const std::size_t offset = uniform(0, across - width);
        if (horizontal) {
            paint(offset, start, width, length);
        } else {
            paint(start, offset, length, width);
        }
    }
    for (std::size_t i = 0; i < pad_count; ++i) {
        const std::size_t h = uniform(short_side / 16 + 2, short_side / 6 + 2);
        const std::size_t w = uniform(short_side / 16 + 2, short_side / 6 + 2);
        paint(uniform(0, size.rows - std::min(h, size.rows)), uniform(0, size.cols - std::min(w, size.cols)), h, w);
    }

    ComplexField2D out(size.rows, size.cols);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const bool on = feature[i];
        out[i] = std::polar(on ? levels.feature_magnitude : levels.background_magnitude,
                            on ? levels.feature_phase : levels.background_phase);
    }
    return out;
}

double defocus_curvature(const Optics& optics) {
    if (optics.defocus == 0.0) return 0.0;
    if (!(optics.wavelength > 0.0) || !(optics.pixel_pitch > 0.0)) {
        throw std::invalid_argument("defocus_curvature: wavelength and pixel_pitch must be > 0");
    }
    return std::numbers::pi * optics.pixel_pitch * optics.pixel_pitch / (optics.wavelength * optics.defocus);
}

ComplexField2D gaussian_probe(Extent size, double sigma, double curvature, double amplitude) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_probe: sigma must be > 0");
    ComplexField2D p(size.rows, size.cols);
    const double cr = 0.5 * static_cast<double>(size.rows);
    const double cc = 0.5 * static_cast<double>(size.cols);
    for (std::size_t r = 0; r < size.rows; ++r) {
        for (std::size_t c = 0; c < size.cols; ++c) {
            const double dr = static_cast<double>(r) - cr;
            const double dc = static_cast<double>(c) - cc;
            const double r2 = dr * dr + dc * dc;
            p(r, c) = std::polar(amplitude * std::exp(-0.5 * r2 / (sigma * sigma)), curvature * r2);
        }
    }
    return p;
}

}  // namespace ptycho
