#pragma once

#include <cstdint>

#include "ptycho/field.hpp"
#include "ptycho/recon.hpp"
#include "ptycho/scan.hpp"

namespace ptycho {

/// Two-level values of the chip-like phantom.
struct PhantomLevels {
    double background_magnitude = 0.95;
    double feature_magnitude = 0.55;
    double background_phase = -0.25;
    double feature_phase = 0.35;
};

/// Seeded piecewise-constant layout of Manhattan wires and pads.
ComplexField2D chip_like_phantom(Extent size, std::uint64_t seed, const PhantomLevels& levels = {});

/// Paraxial wavefront curvature pi * pitch^2 / (wavelength * defocus) in rad/px^2;
/// 0 for zero defocus.
double defocus_curvature(const Optics& optics);

/// Gaussian magnitude exp(-r^2 / (2 sigma^2)) with peak `amplitude`, times the
/// quadratic phase exp(i * curvature * r^2), centred in the window.
ComplexField2D gaussian_probe(Extent size, double sigma, double curvature, double amplitude = 1.0);

}  // namespace ptycho
