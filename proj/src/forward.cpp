#include "ptycho/forward.hpp"

#include <stdexcept>
#include <string>

#include "parallel.hpp"

namespace ptycho {
namespace {

void require_window(const ComplexField2D& object, const ComplexField2D& probe, Position pos) {
    if (probe.rows() > object.rows() || probe.cols() > object.cols() ||
        pos.row > object.rows() - probe.rows() || pos.col > object.cols() - probe.cols()) {
        throw std::out_of_range("probe window at (" + std::to_string(pos.row) + "," +
                                std::to_string(pos.col) + ") exceeds object " + object.shape_string());
    }
}

void require_batch(const DiffractionSet& dataset, std::span<const std::size_t> batch) {
    if (batch.empty()) throw std::invalid_argument("data_fidelity: empty batch");
    for (auto i : batch) {
        if (i >= dataset.size()) {
            throw std::out_of_range("data_fidelity: batch index " + std::to_string(i) +
                                    " >= dataset size " + std::to_string(dataset.size()));
        }
    }
}

double stabilized_abs(const Complex& z) {
    return std::sqrt(std::norm(z) + kMagnitudeEpsilon * kMagnitudeEpsilon);
}

struct PatternGradient {
    double energy = 0.0;
    ComplexField2D d_window;  // with respect to the object window
    ComplexField2D d_probe;
};

// E = sum_k (A_k - s_k)^2 with A = sqrt(|Psi|^2 + eps^2), Psi = F(P * O_w).
// dE/dPsi* = (A - s) Psi / A; the unitary F pulls back through F^H = ifft2.
PatternGradient pattern_gradient(const ComplexField2D& object, const ComplexField2D& probe,
                                 const RealField2D& pattern, Position pos) {
    const ComplexField2D psi = exit_wave(object, probe, pos);
    ComplexField2D spectrum = fft2(psi);
    long double energy = 0.0;
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        const double amplitude = stabilized_abs(spectrum[k]);
        const double residual = amplitude - std::sqrt(pattern[k]);
        energy += residual * residual;
        spectrum[k] *= 2.0 * residual / amplitude;
    }
    const ComplexField2D d_psi = ifft2(spectrum);

    PatternGradient out{static_cast<double>(energy), ComplexField2D(probe.rows(), probe.cols()),
                        ComplexField2D(probe.rows(), probe.cols())};
    for (std::size_t r = 0; r < probe.rows(); ++r) {
        for (std::size_t c = 0; c < probe.cols(); ++c) {
            const Complex g = d_psi(r, c);
            out.d_window(r, c) = std::conj(probe(r, c)) * g;
            out.d_probe(r, c) = std::conj(object(pos.row + r, pos.col + c)) * g;
        }
    }
    return out;
}

}  // namespace

void DiffractionSet::validate() const {
    plan.validate();
    if (patterns.size() != plan.positions.size()) {
        throw std::invalid_argument("DiffractionSet: " + std::to_string(patterns.size()) +
                                    " patterns for " + std::to_string(plan.positions.size()) +
                                    " positions");
    }
    for (std::size_t i = 0; i < patterns.size(); ++i) {
        const auto& p = patterns[i];
        if (p.rows() != plan.probe.rows || p.cols() != plan.probe.cols) {
            throw std::invalid_argument("DiffractionSet: pattern " + std::to_string(i) +
                                        " has shape " + p.shape_string());
        }
        for (double v : p) {
            if (!std::isfinite(v) || v < 0.0) {
                throw std::invalid_argument("DiffractionSet: pattern " + std::to_string(i) +
                                            " has a negative or non-finite intensity");
            }
        }
    }
}

ComplexField2D exit_wave(const ComplexField2D& object, const ComplexField2D& probe, Position pos) {
    require_window(object, probe, pos);
    ComplexField2D psi(probe.rows(), probe.cols());
    for (std::size_t r = 0; r < probe.rows(); ++r) {
        for (std::size_t c = 0; c < probe.cols(); ++c) {
            psi(r, c) = probe(r, c) * object(pos.row + r, pos.col + c);
        }
    }
    return psi;
}

RealField2D diffract(const ComplexField2D& psi) {
    const ComplexField2D spectrum = fft2(psi);
    RealField2D intensity(psi.rows(), psi.cols());
    for (std::size_t k = 0; k < spectrum.size(); ++k) intensity[k] = std::norm(spectrum[k]);
    return intensity;
}

DiffractionSet simulate(const ComplexField2D& object, const ComplexField2D& probe, const ScanPlan& plan) {
    DiffractionSet set{plan, {}};
    set.patterns.reserve(plan.size());
    for (const auto& pos : plan.positions) set.patterns.push_back(diffract(exit_wave(object, probe, pos)));
    return set;
}

double pattern_energy(const ComplexField2D& object, const ComplexField2D& probe,
                      const RealField2D& pattern, Position pos) {
    const ComplexField2D spectrum = fft2(exit_wave(object, probe, pos));
    if (pattern.rows() != spectrum.rows() || pattern.cols() != spectrum.cols()) {
        throw std::invalid_argument("pattern_energy: pattern " + pattern.shape_string() +
                                    " does not match probe " + spectrum.shape_string());
    }
    long double energy = 0.0;
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        const double residual = stabilized_abs(spectrum[k]) - std::sqrt(pattern[k]);
        energy += residual * residual;
    }
    return static_cast<double>(energy);
}

double data_fidelity(const ComplexField2D& object, const ComplexField2D& probe,
                     const DiffractionSet& dataset, std::span<const std::size_t> batch) {
    require_batch(dataset, batch);
    double total = 0.0;
    for (auto i : batch) {
        total += pattern_energy(object, probe, dataset.patterns[i], dataset.plan.positions[i]);
    }
    return total / static_cast<double>(batch.size());
}

FidelityGradient data_fidelity_gradient(const ComplexField2D& object, const ComplexField2D& probe,
                                        const DiffractionSet& dataset,
                                        std::span<const std::size_t> batch, unsigned threads) {
    require_batch(dataset, batch);
    std::vector<PatternGradient> parts(batch.size());
    detail::parallel_for(batch.size(), threads, [&](std::size_t j) {
        const auto i = batch[j];
        parts[j] = pattern_gradient(object, probe, dataset.patterns[i], dataset.plan.positions[i]);
    });

    const double inv = 1.0 / static_cast<double>(batch.size());
    FidelityGradient out{0.0, ComplexField2D(object.rows(), object.cols()),
                         ComplexField2D(probe.rows(), probe.cols())};
    for (std::size_t j = 0; j < parts.size(); ++j) {
        const auto pos = dataset.plan.positions[batch[j]];
        out.energy += parts[j].energy;
        for (std::size_t r = 0; r < probe.rows(); ++r) {
            for (std::size_t c = 0; c < probe.cols(); ++c) {
                out.d_object(pos.row + r, pos.col + c) += inv * parts[j].d_window(r, c);
            }
        }
        for (std::size_t k = 0; k < out.d_probe.size(); ++k) out.d_probe[k] += inv * parts[j].d_probe[k];
    }
    out.energy *= inv;
    return out;
}

std::vector<std::size_t> all_indices(const DiffractionSet& dataset) {
    std::vector<std::size_t> idx(dataset.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return idx;
}

}  // namespace ptycho
