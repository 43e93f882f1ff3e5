#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ptycho/field.hpp"
#include "ptycho/forward.hpp"
#include "ptycho/recon.hpp"

namespace ptycho {

inline constexpr double kEpieEpsilon = 1e-12;

/// One ePIE pass over `order`, updating object and probe in place.
/// Throws std::invalid_argument for alpha/beta outside (0, 1] or an all-zero probe.
void epie_sweep(ComplexField2D& object, ComplexField2D& probe, const DiffractionSet& dataset,
                double alpha, double beta, std::span<const std::size_t> order);

struct EpieResult {
    ComplexField2D object;
    ComplexField2D probe;
    double initial_residual = 0.0;
    /// Mean data fidelity over the dataset after each sweep.
    std::vector<double> residual_history;
};

/// Starts from init_object(seed) and init_probe(optics); every sweep visits the
/// positions in a fresh seeded permutation.
EpieResult epie_run(const DiffractionSet& dataset, std::size_t sweeps, std::uint64_t seed,
                    double alpha = 1.0, double beta = 1.0, const Optics& optics = {});

}  // namespace ptycho
