#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "ptycho/field.hpp"
#include "ptycho/forward.hpp"
#include "ptycho/priors.hpp"

namespace ptycho {

/// Optics used to defocus the initial probe. Lengths in metres.
struct Optics {
    double defocus = 2e-3;
    double wavelength = 1.24e-10;
    double pixel_pitch = 40e-9;
};

struct AdamSettings {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct ReconConfig {
    PriorWeights weights;
    double lr_object = 0.1;
    double lr_probe = 0.01;
    std::size_t batch_size = 16;
    std::size_t epochs = 500;
    std::uint64_t seed = 0;
    AdamSettings adam;
    bool fix_probe = false;
    /// Epochs at the start during which only the object is updated.
    std::size_t probe_warmup_epochs = 0;
    Optics optics;
    /// Starting probe; when unset the probe is estimated from the data.
    std::optional<ComplexField2D> initial_probe;
    /// Workers for per-pattern gradient evaluation; results do not depend on it.
    unsigned threads = 1;

    void validate() const;
};

struct AdamMoments {
    RealField2D first;
    RealField2D second;
};

/// Optimization variables: object as (magnitude, phase), probe as (real, imag).
struct ReconState {
    RealField2D obj_magnitude;
    RealField2D obj_phase;
    RealField2D probe_re;
    RealField2D probe_im;
    AdamMoments m_magnitude, m_phase, m_probe_re, m_probe_im;
    std::size_t step_count = 0;
    std::size_t probe_step_count = 0;
    std::mt19937_64 rng;

    [[nodiscard]] ComplexField2D object() const;
    [[nodiscard]] ComplexField2D probe() const;
};

ReconState make_state(const Polar& object, const ComplexField2D& probe, std::uint64_t seed);

/// Magnitude ~ U[0.9, 1.0] and phase ~ U[-0.1, 0.1] per pixel.
Polar init_object(std::size_t rows, std::size_t cols, std::uint64_t seed);

/// Probe estimate from the mean far-field amplitude: the inverse transform of
/// mean_i sqrt(I_i), centred in the window and Fresnel propagated by `defocus`.
ComplexField2D init_probe(const DiffractionSet& dataset, double defocus, double wavelength,
                          double pixel_pitch);

struct Gradients {
    RealField2D obj_magnitude;
    RealField2D obj_phase;
    RealField2D probe_re;
    RealField2D probe_im;
    ObjectiveTerms energy;
};

/// Exact gradient of the regularized objective on `batch` with respect to
/// every parameter field. Probe gradients are zero when `fix_probe` is set.
Gradients gradients(const ReconState& state, const DiffractionSet& dataset,
                    std::span<const std::size_t> batch, const PriorWeights& weights,
                    bool fix_probe = false, unsigned threads = 1);

/// One bias-corrected Adam update; clamps the object magnitude at 0. The probe
/// keeps its own step count so a delayed start gets fresh bias correction.
void adam_step(ReconState& state, const Gradients& grads, const ReconConfig& config, bool update_probe = true);

struct HistoryRow {
    std::size_t epoch = 0;
    double fidelity = 0.0;
    double total = 0.0;
};

struct ReconResult {
    ComplexField2D object;
    ComplexField2D probe;
    std::vector<HistoryRow> history;
};

/// Minibatch Adam reconstruction. Each epoch visits a fresh seeded permutation
/// of the positions in batches of batch_size (the last batch may be short) and
/// then records the full-dataset energies.
ReconResult reconstruct(const DiffractionSet& dataset, const ReconConfig& config);

}  // namespace ptycho
