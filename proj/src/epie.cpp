#include "ptycho/epie.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <string>

namespace ptycho {

void epie_sweep(ComplexField2D& object, ComplexField2D& probe, const DiffractionSet& dataset,
                double alpha, double beta, std::span<const std::size_t> order) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("epie: alpha must be in (0, 1]");
    if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("epie: beta must be in (0, 1]");
    const auto prows = probe.rows();
    const auto pcols = probe.cols();

    for (const auto i : order) {
        if (i >= dataset.size()) throw std::out_of_range("epie: index " + std::to_string(i) + " out of range");
        const Position pos = dataset.plan.positions[i];
        const RealField2D& pattern = dataset.patterns[i];

        double probe_power = 0.0;
        for (const auto& v : probe) probe_power = std::max(probe_power, std::norm(v));
        if (probe_power < kEpieEpsilon) throw std::invalid_argument("epie: probe is all zero");

        const ComplexField2D psi = exit_wave(object, probe, pos);
        ComplexField2D spectrum = fft2(psi);
        for (std::size_t k = 0; k < spectrum.size(); ++k) {
            spectrum[k] *= std::sqrt(pattern[k]) / std::max(std::abs(spectrum[k]), kEpieEpsilon);
        }
        const ComplexField2D revised = ifft2(spectrum);

        ComplexField2D window(prows, pcols);
        double object_power = 0.0;
        for (std::size_t r = 0; r < prows; ++r) {
            for (std::size_t c = 0; c < pcols; ++c) {
                window(r, c) = object(pos.row + r, pos.col + c);
                object_power = std::max(object_power, std::norm(window(r, c)));
            }
        }
        object_power = std::max(object_power, kEpieEpsilon);

        for (std::size_t r = 0; r < prows; ++r) {
            for (std::size_t c = 0; c < pcols; ++c) {
                const Complex delta = revised(r, c) - psi(r, c);
                object(pos.row + r, pos.col + c) += alpha * std::conj(probe(r, c)) * delta / probe_power;
                probe(r, c) += beta * std::conj(window(r, c)) * delta / object_power;
            }
        }
    }
}

EpieResult epie_run(const DiffractionSet& dataset, std::size_t sweeps, std::uint64_t seed, double alpha,
                    double beta, const Optics& optics) {
    if (dataset.empty()) throw std::invalid_argument("epie_run: empty dataset");
    dataset.validate();
    const auto& plan = dataset.plan;
    const Polar init = init_object(plan.object.rows, plan.object.cols, seed);
    EpieResult result{join(init.magnitude, init.phase),
                      init_probe(dataset, optics.defocus, optics.wavelength, optics.pixel_pitch),
                      0.0,
                      {}};
    const auto everything = all_indices(dataset);
    result.initial_residual = data_fidelity(result.object, result.probe, dataset, everything);

    std::seed_seq order_seed{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0xe91eu};
    std::mt19937_64 rng(order_seed);
    std::vector<std::size_t> order = everything;
    result.residual_history.reserve(sweeps);
    for (std::size_t s = 0; s < sweeps; ++s) {
        std::shuffle(order.begin(), order.end(), rng);
        epie_sweep(result.object, result.probe, dataset, alpha, beta, order);
        result.residual_history.push_back(data_fidelity(result.object, result.probe, dataset, everything));
    }
    return result;
}

}  // namespace ptycho
