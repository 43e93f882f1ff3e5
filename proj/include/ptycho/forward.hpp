#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ptycho/field.hpp"
#include "ptycho/scan.hpp"

namespace ptycho {

/// Far-field intensities, one probe-sized pattern per plan position.
struct DiffractionSet {
    ScanPlan plan;
    std::vector<RealField2D> patterns;

    [[nodiscard]] std::size_t size() const noexcept { return patterns.size(); }
    [[nodiscard]] bool empty() const noexcept { return patterns.empty(); }
    /// Throws std::invalid_argument when counts, shapes or values break the invariants.
    void validate() const;

    bool operator==(const DiffractionSet&) const = default;
};

/// Stabilizer for |.| in the fidelity term so its gradient exists at zero.
inline constexpr double kMagnitudeEpsilon = 1e-12;

/// probe * object window at `pos`; throws std::out_of_range outside the object.
ComplexField2D exit_wave(const ComplexField2D& object, const ComplexField2D& probe, Position pos);

/// |fft2(psi)|^2.
RealField2D diffract(const ComplexField2D& psi);

/// Noiseless diffraction patterns for every plan position.
DiffractionSet simulate(const ComplexField2D& object, const ComplexField2D& probe, const ScanPlan& plan);

/// Amplitude misfit sum_k (|F psi|_k - sqrt(I_k))^2 of one pattern.
double pattern_energy(const ComplexField2D& object, const ComplexField2D& probe,
                      const RealField2D& pattern, Position pos);

/// Mean of pattern_energy over `batch`. Throws on an empty batch or bad indices.
double data_fidelity(const ComplexField2D& object, const ComplexField2D& probe,
                     const DiffractionSet& dataset, std::span<const std::size_t> batch);

/// Gradients are packed as dE/dRe + i dE/dIm.
struct FidelityGradient {
    double energy = 0.0;
    ComplexField2D d_object;
    ComplexField2D d_probe;
};

/// data_fidelity plus its exact gradient. Per-pattern work may run on `threads`
/// workers; window contributions are summed in batch order so the result does
/// not depend on the thread count.
FidelityGradient data_fidelity_gradient(const ComplexField2D& object, const ComplexField2D& probe,
                                        const DiffractionSet& dataset,
                                        std::span<const std::size_t> batch, unsigned threads = 1);

/// Every index of the dataset in order.
std::vector<std::size_t> all_indices(const DiffractionSet& dataset);

}  // namespace ptycho
