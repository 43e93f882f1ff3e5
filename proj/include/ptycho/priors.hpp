#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ptycho/field.hpp"
#include "ptycho/forward.hpp"

namespace ptycho {

enum class PriorKind { None, TV, STP };

std::string to_string(PriorKind kind);
/// Accepts "none", "tv", "stp" (case-insensitive); throws std::invalid_argument otherwise.
PriorKind parse_prior_kind(std::string_view text);

/// Weights of the regularized objective
///   E = E_o + lambda_pr * E_pr + lambda_cc * E_cc + lambda_x * E_x,
/// where E_x is the TV or structure-tensor energy selected by `kind`.
struct PriorWeights {
    double lambda_pr = 0.0;
    double lambda_cc = 0.0;
    double lambda_x = 0.0;
    PriorKind kind = PriorKind::None;
    double stp_sigma = 1.5;

    void validate() const;
};

inline constexpr double kTvEpsilon = 1e-8;
inline constexpr double kCrossChannelEpsilon = 1e-8;
inline constexpr double kProbeSmoothnessEpsilon = 1e-12;

/// Isotropic TV over both channels, sum_p (sqrt(gc^2 + gr^2 + eps^2) - eps).
double tv_energy(const RealField2D& magnitude, const RealField2D& phase);

/// Mean over pixels of |l+| + |l-| of the Gaussian-smoothed gradient outer product,
/// summed over both channels.
double stp_energy(const RealField2D& magnitude, const RealField2D& phase, double sigma);

/// sum over directions and pixels of |g(phase) m - g(m) phase|, smoothed as
/// sqrt(x^2 + eps^2) - eps.
double cc_energy(const RealField2D& magnitude, const RealField2D& phase);

/// sqrt(sum |grad |P||^2 + eps^2).
double probe_smoothness(const ComplexField2D& probe);

/// Normalized Gaussian taps at offsets -radius..radius, radius = max(1, floor(3 sigma)).
std::vector<double> gaussian_kernel(double sigma);

/// Separable convolution with `kernel` (odd length), replicate boundary.
RealField2D smooth(const RealField2D& f, std::span<const double> kernel);
/// Adjoint of smooth() for the same kernel.
RealField2D smooth_adjoint(const RealField2D& f, std::span<const double> kernel);

struct ChannelGradient {
    double energy = 0.0;
    RealField2D d_magnitude;
    RealField2D d_phase;
};

ChannelGradient tv_energy_gradient(const RealField2D& magnitude, const RealField2D& phase);
ChannelGradient stp_energy_gradient(const RealField2D& magnitude, const RealField2D& phase, double sigma);
ChannelGradient cc_energy_gradient(const RealField2D& magnitude, const RealField2D& phase);

struct ProbeGradient {
    double energy = 0.0;
    ComplexField2D d_probe;  // dE/dRe + i dE/dIm
};

ProbeGradient probe_smoothness_gradient(const ComplexField2D& probe);

/// Individual terms (unweighted) and the weighted total.
struct ObjectiveTerms {
    double fidelity = 0.0;
    double probe_smoothness = 0.0;
    double cross_channel = 0.0;
    double image_prior = 0.0;
    double total = 0.0;
};

/// Objective for an object given in (magnitude, phase) parameter form. Terms
/// with zero weight are not evaluated and reported as 0.
ObjectiveTerms objective_terms(const RealField2D& magnitude, const RealField2D& phase,
                               const ComplexField2D& probe, const DiffractionSet& dataset,
                               std::span<const std::size_t> batch, const PriorWeights& weights);

/// total of objective_terms with the object split into magnitude and wrapped phase.
double total_objective(const ComplexField2D& object, const ComplexField2D& probe,
                       const DiffractionSet& dataset, std::span<const std::size_t> batch,
                       const PriorWeights& weights);

}  // namespace ptycho
