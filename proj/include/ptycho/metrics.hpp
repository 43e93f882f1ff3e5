#pragma once

#include <string>
#include <vector>

#include "ptycho/field.hpp"
#include "ptycho/priors.hpp"

namespace ptycho {

/// Region selector for metrics: row-major flags, empty means "every pixel".
using PixelMask = std::vector<bool>;

/// est * c with c = sum(ref conj(est)) / (sum |est|^2 + eps), the least-squares
/// complex scale and phase. Sums run over `mask` when given.
ComplexField2D align(const ComplexField2D& est, const ComplexField2D& ref, const PixelMask& mask = {});

inline constexpr std::size_t kSsimWindow = 7;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

/// Mean SSIM over every 7x7 window placement (uniform weights) lying fully
/// inside the image and, when a mask is given, fully inside the mask. The
/// dynamic range L is max - min of `b` over the region.
double ssim(const RealField2D& a, const RealField2D& b, const PixelMask& mask = {});

struct Evaluation {
    double ssim_phase = 0.0;
    double ssim_magnitude = 0.0;
};

/// Aligns `est` to `ref` and compares phase and magnitude channels over `mask`.
Evaluation evaluate(const ComplexField2D& est, const ComplexField2D& ref, const PixelMask& mask = {});

/// One line of an overlap sweep. `prior` is "none", "tv", "stp" or "epie".
struct SweepRow {
    double overlap = 0.0;
    std::string prior;
    double ssim_phase = 0.0;
    double ssim_magnitude = 0.0;
    double final_fidelity = 0.0;
};

}  // namespace ptycho
