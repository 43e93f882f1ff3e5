#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace ptycho {

using Complex = std::complex<double>;

/// Dense row-major 2-D grid of samples. Shape is fixed at construction and
/// must be non-empty.
template <typename T>
class Field2D {
public:
    using value_type = T;

    Field2D() = default;

    Field2D(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), values_(checked_size(rows, cols), fill) {}

    Field2D(std::size_t rows, std::size_t cols, std::vector<T> values)
        : rows_(rows), cols_(cols), values_(std::move(values)) {
        if (values_.size() != checked_size(rows, cols)) {
            throw std::invalid_argument("Field2D: value count " + std::to_string(values_.size()) +
                                        " does not match shape " + std::to_string(rows) + "x" +
                                        std::to_string(cols));
        }
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] bool empty() const noexcept { return values_.empty(); }

    T& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const noexcept { return values_[r * cols_ + c]; }
    T& operator[](std::size_t i) noexcept { return values_[i]; }
    const T& operator[](std::size_t i) const noexcept { return values_[i]; }

    T* data() noexcept { return values_.data(); }
    const T* data() const noexcept { return values_.data(); }
    std::span<T> values() noexcept { return values_; }
    std::span<const T> values() const noexcept { return values_; }

    auto begin() noexcept { return values_.begin(); }
    auto end() noexcept { return values_.end(); }
    auto begin() const noexcept { return values_.begin(); }
    auto end() const noexcept { return values_.end(); }

    [[nodiscard]] bool same_shape(const Field2D& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    [[nodiscard]] bool all_finite() const noexcept {
        return std::all_of(values_.begin(), values_.end(), [](const T& v) {
            if constexpr (std::is_floating_point_v<T>) {
                return std::isfinite(v);
            } else {
                return std::isfinite(v.real()) && std::isfinite(v.imag());
            }
        });
    }

    Field2D& operator+=(const Field2D& other) {
        require_same_shape(other, "operator+=");
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
        return *this;
    }
    Field2D& operator-=(const Field2D& other) {
        require_same_shape(other, "operator-=");
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
        return *this;
    }
    Field2D& operator*=(T scale) noexcept {
        for (auto& v : values_) v *= scale;
        return *this;
    }

    friend Field2D operator+(Field2D a, const Field2D& b) { return a += b; }
    friend Field2D operator-(Field2D a, const Field2D& b) { return a -= b; }
    friend Field2D operator*(Field2D a, T scale) { return a *= scale; }
    friend Field2D operator*(T scale, Field2D a) { return a *= scale; }

    bool operator==(const Field2D&) const = default;

    void require_same_shape(const Field2D& other, const char* what) const {
        if (!same_shape(other)) {
            throw std::invalid_argument(std::string(what) + ": shape mismatch " + shape_string() +
                                        " vs " + other.shape_string());
        }
    }

    [[nodiscard]] std::string shape_string() const {
        return std::to_string(rows_) + "x" + std::to_string(cols_);
    }

private:
    static std::size_t checked_size(std::size_t rows, std::size_t cols) {
        if (rows == 0 || cols == 0) {
            throw std::invalid_argument("Field2D: rows and cols must be positive");
        }
        return rows * cols;
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> values_;
};

using ComplexField2D = Field2D<Complex>;
using RealField2D = Field2D<double>;

/// Unitary 2-D DFT (1/sqrt(N) normalization), zero frequency at index (0,0).
ComplexField2D fft2(const ComplexField2D& f);
/// Exact inverse of fft2.
ComplexField2D ifft2(const ComplexField2D& f);

/// Paraxial transfer-function propagation over `distance`. All lengths share
/// one unit. Throws std::invalid_argument for non-positive wavelength or pitch.
ComplexField2D fresnel_propagate(const ComplexField2D& f, double distance, double wavelength,
                                 double pixel_pitch);

/// Forward differences with a zero trailing edge.
/// `along_cols` differentiates across columns: f(i, j+1) - f(i, j).
/// `along_rows` differentiates across rows: f(i+1, j) - f(i, j).
struct Gradient2D {
    RealField2D along_cols;
    RealField2D along_rows;
};

Gradient2D grad2(const RealField2D& f);

/// Adjoint of grad2: returns the field g with <grad2(f), (dc, dr)> == <f, g>.
RealField2D grad2_adjoint(const RealField2D& d_cols, const RealField2D& d_rows);

struct Polar {
    RealField2D magnitude;
    RealField2D phase;
};

/// Magnitude and phase in (-pi, pi]; zero samples report phase 0.
Polar split(const ComplexField2D& f);
/// Throws std::invalid_argument on negative magnitude or shape mismatch.
ComplexField2D join(const RealField2D& magnitude, const RealField2D& phase);

/// magnitude * exp(i * phase) with no sign restriction on magnitude.
ComplexField2D polar_field(const RealField2D& magnitude, const RealField2D& phase);

double norm2(const ComplexField2D& f);
double squared_norm(const ComplexField2D& f);
double squared_norm(const RealField2D& f);

/// Circular shift by half the extent on each axis (moves index (0,0) to the centre).
ComplexField2D fftshift(const ComplexField2D& f);

/// FFT-order frequency index: k for k < ceil(n/2), k - n otherwise.
inline double fft_frequency_index(std::size_t k, std::size_t n) noexcept {
    const auto half = (n + 1) / 2;
    return k < half ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
}

}  // namespace ptycho
