#include "ptycho/priors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace ptycho {
namespace {

double smoothed_abs(double x, double eps) { return std::sqrt(x * x + eps * eps) - eps; }

std::size_t clamp_index(std::ptrdiff_t i, std::size_t n) {
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(n) - 1));
}

double channel_tv(const RealField2D& f, RealField2D* d_out) {
    const Gradient2D g = grad2(f);
    long double energy = 0.0;
    RealField2D wc, wr;
    if (d_out) {
        wc = RealField2D(f.rows(), f.cols());
        wr = RealField2D(f.rows(), f.cols());
    }
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double gc = g.along_cols[i];
        const double gr = g.along_rows[i];
        const double norm = std::sqrt(gc * gc + gr * gr + kTvEpsilon * kTvEpsilon);
        energy += norm - kTvEpsilon;
        if (d_out) {
            wc[i] = gc / norm;
            wr[i] = gr / norm;
        }
    }
    if (d_out) *d_out = grad2_adjoint(wc, wr);
    return static_cast<double>(energy);
}

double channel_stp(const RealField2D& f, std::span<const double> kernel, RealField2D* d_out) {
    const Gradient2D g = grad2(f);
    const auto n = f.size();
    RealField2D p11(f.rows(), f.cols()), p12(f.rows(), f.cols()), p22(f.rows(), f.cols());
    for (std::size_t i = 0; i < n; ++i) {
        const double ix = g.along_cols[i];
        const double iy = g.along_rows[i];
        p11[i] = ix * ix;
        p12[i] = ix * iy;
        p22[i] = iy * iy;
    }
    const RealField2D j11 = smooth(p11, kernel);
    const RealField2D j12 = smooth(p12, kernel);
    const RealField2D j22 = smooth(p22, kernel);

    const double inv_n = 1.0 / static_cast<double>(n);
    long double energy = 0.0;
    RealField2D d11, d12, d22;
    if (d_out) {
        d11 = RealField2D(f.rows(), f.cols());
        d12 = RealField2D(f.rows(), f.cols());
        d22 = RealField2D(f.rows(), f.cols());
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double tr = j11[i] + j22[i];
        const double det = j11[i] * j22[i] - j12[i] * j12[i];
        const double sq = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
        const double hi = 0.5 * (tr + sq);
        const double lo = 0.5 * (tr - sq);
        energy += std::abs(hi) + std::abs(lo);
        if (!d_out) continue;
        const double s_hi = hi >= 0.0 ? 1.0 : -1.0;
        const double s_lo = lo >= 0.0 ? 1.0 : -1.0;
        const double d_tr = 0.5 * (s_hi + s_lo) * inv_n;
        // The discriminant term cancels whenever both eigenvalues share a sign.
        const double d_sq = 0.5 * (s_hi - s_lo) * inv_n;
        d11[i] = d_tr;
        d22[i] = d_tr;
        if (d_sq != 0.0 && sq > 0.0) {
            d11[i] += d_sq * (j11[i] - j22[i]) / sq;
            d22[i] += d_sq * (j22[i] - j11[i]) / sq;
            d12[i] = d_sq * 4.0 * j12[i] / sq;
        }
    }
    if (d_out) {
        const RealField2D a11 = smooth_adjoint(d11, kernel);
        const RealField2D a12 = smooth_adjoint(d12, kernel);
        const RealField2D a22 = smooth_adjoint(d22, kernel);
        RealField2D dix(f.rows(), f.cols()), diy(f.rows(), f.cols());
        for (std::size_t i = 0; i < n; ++i) {
            const double ix = g.along_cols[i];
            const double iy = g.along_rows[i];
            dix[i] = 2.0 * ix * a11[i] + iy * a12[i];
            diy[i] = 2.0 * iy * a22[i] + ix * a12[i];
        }
        *d_out = grad2_adjoint(dix, diy);
    }
    return static_cast<double>(energy) * inv_n;
}

double cross_channel(const RealField2D& m, const RealField2D& phi, RealField2D* d_m, RealField2D* d_phi) {
    m.require_same_shape(phi, "cc_energy");
    const Gradient2D gm = grad2(m);
    const Gradient2D gp = grad2(phi);
    const bool want_grad = d_m != nullptr;
    RealField2D dm_direct, dp_direct, dgm_c, dgm_r, dgp_c, dgp_r;
    if (want_grad) {
        dm_direct = dp_direct = dgm_c = dgm_r = dgp_c = dgp_r = RealField2D(m.rows(), m.cols());
    }
    long double energy = 0.0;
    auto accumulate = [&](const RealField2D& g_m, const RealField2D& g_p, RealField2D& dg_m,
                          RealField2D& dg_p) {
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double x = g_p[i] * m[i] - g_m[i] * phi[i];
            energy += smoothed_abs(x, kCrossChannelEpsilon);
            if (!want_grad) continue;
            const double w = x / std::sqrt(x * x + kCrossChannelEpsilon * kCrossChannelEpsilon);
            dm_direct[i] += w * g_p[i];
            dp_direct[i] -= w * g_m[i];
            dg_p[i] = w * m[i];
            dg_m[i] = -w * phi[i];
        }
    };
    accumulate(gm.along_cols, gp.along_cols, dgm_c, dgp_c);
    accumulate(gm.along_rows, gp.along_rows, dgm_r, dgp_r);
    if (want_grad) {
        *d_m = dm_direct + grad2_adjoint(dgm_c, dgm_r);
        *d_phi = dp_direct + grad2_adjoint(dgp_c, dgp_r);
    }
    return static_cast<double>(energy);
}

RealField2D stabilized_magnitude(const ComplexField2D& p) {
    RealField2D mag(p.rows(), p.cols());
    for (std::size_t i = 0; i < p.size(); ++i) {
        mag[i] = std::sqrt(std::norm(p[i]) + kMagnitudeEpsilon * kMagnitudeEpsilon);
    }
    return mag;
}

}  // namespace

std::string to_string(PriorKind kind) {
    switch (kind) {
        case PriorKind::None: return "none";
        case PriorKind::TV: return "tv";
        case PriorKind::STP: return "stp";
    }
    return "none";
}

PriorKind parse_prior_kind(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (lower == "none") return PriorKind::None;
    if (lower == "tv") return PriorKind::TV;
    if (lower == "stp") return PriorKind::STP;
    throw std::invalid_argument("unknown prior '" + std::string(text) + "' (expected none, tv or stp)");
}

void PriorWeights::validate() const {
    auto check = [](double v, const char* name) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument(std::string(name) + " must be a finite value >= 0");
        }
    };
    check(lambda_pr, "lambda_pr");
    check(lambda_cc, "lambda_cc");
    check(lambda_x, "lambda_x");
    if (!(stp_sigma > 0.0) || !std::isfinite(stp_sigma)) {
        throw std::invalid_argument("stp_sigma must be > 0");
    }
}

std::vector<double> gaussian_kernel(double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_kernel: sigma must be > 0");
    const auto radius = std::max<std::ptrdiff_t>(1, static_cast<std::ptrdiff_t>(std::floor(3.0 * sigma)));
    std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (std::ptrdiff_t q = -radius; q <= radius; ++q) {
        const double w = std::exp(-0.5 * double(q * q) / (sigma * sigma));
        taps[static_cast<std::size_t>(q + radius)] = w;
        sum += w;
    }
    for (auto& w : taps) w /= sum;
    return taps;
}

RealField2D smooth(const RealField2D& f, std::span<const double> kernel) {
    const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
    RealField2D tmp(f.rows(), f.cols());
    for (std::size_t r = 0; r < f.rows(); ++r) {
        for (std::size_t c = 0; c < f.cols(); ++c) {
            double acc = 0.0;
            for (std::ptrdiff_t q = -radius; q <= radius; ++q) {
                acc += kernel[q + radius] * f(r, clamp_index(std::ptrdiff_t(c) + q, f.cols()));
            }
            tmp(r, c) = acc;
        }
    }
    RealField2D out(f.rows(), f.cols());
    for (std::size_t r = 0; r < f.rows(); ++r) {
        for (std::size_t c = 0; c < f.cols(); ++c) {
            double acc = 0.0;
            for (std::ptrdiff_t q = -radius; q <= radius; ++q) {
                acc += kernel[q + radius] * tmp(clamp_index(std::ptrdiff_t(r) + q, f.rows()), c);
            }
            out(r, c) = acc;
        }
    }
    return out;
}

RealField2D smooth_adjoint(const RealField2D& f, std::span<const double> kernel) {
    const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
    RealField2D tmp(f.rows(), f.cols());
    for (std::size_t r = 0; r < f.rows(); ++r) {
        for (std::size_t c = 0; c < f.cols(); ++c) {
            for (std::ptrdiff_t q = -radius; q <= radius; ++q) {
                tmp(clamp_index(std::ptrdiff_t(r) + q, f.rows()), c) += kernel[q + radius] * f(r, c);
            }
        }
    }
    RealField2D out(f.rows(), f.cols());
    for (std::size_t r = 0; r < f.rows(); ++r) {
        for (std::size_t c = 0; c < f.cols(); ++c) {
            for (std::ptrdiff_t q = -radius; q <= radius; ++q) {
                out(r, clamp_index(std::ptrdiff_t(c) + q, f.cols())) += kernel[q + radius] * tmp(r, c);
            }
        }
    }
    return out;
}

double tv_energy(const RealField2D& magnitude, const RealField2D& phase) {
    magnitude.require_same_shape(phase, "tv_energy");
    return channel_tv(magnitude, nullptr) + channel_tv(phase, nullptr);
}

ChannelGradient tv_energy_gradient(const RealField2D& magnitude, const RealField2D& phase) {
    magnitude.require_same_shape(phase, "tv_energy");
    ChannelGradient g;
    g.energy = channel_tv(magnitude, &g.d_magnitude) + channel_tv(phase, &g.d_phase);
    return g;
}

double stp_energy(const RealField2D& magnitude, const RealField2D& phase, double sigma) {
    magnitude.require_same_shape(phase, "stp_energy");
    const auto kernel = gaussian_kernel(sigma);
    return channel_stp(magnitude, kernel, nullptr) + channel_stp(phase, kernel, nullptr);
}

ChannelGradient stp_energy_gradient(const RealField2D& magnitude, const RealField2D& phase, double sigma) {
    magnitude.require_same_shape(phase, "stp_energy");
    const auto kernel = gaussian_kernel(sigma);
    ChannelGradient g;
    g.energy = channel_stp(magnitude, kernel, &g.d_magnitude) + channel_stp(phase, kernel, &g.d_phase);
    return g;
}

double cc_energy(const RealField2D& magnitude, const RealField2D& phase) {
    return cross_channel(magnitude, phase, nullptr, nullptr);
}

ChannelGradient cc_energy_gradient(const RealField2D& magnitude, const RealField2D& phase) {
    ChannelGradient g;
    g.energy = cross_channel(magnitude, phase, &g.d_magnitude, &g.d_phase);
    return g;
}

double probe_smoothness(const ComplexField2D& probe) {
    const Gradient2D g = grad2(stabilized_magnitude(probe));
    const double sum = squared_norm(g.along_cols) + squared_norm(g.along_rows);
    return std::sqrt(sum + kProbeSmoothnessEpsilon * kProbeSmoothnessEpsilon);
}

ProbeGradient probe_smoothness_gradient(const ComplexField2D& probe) {
    const RealField2D mag = stabilized_magnitude(probe);
    Gradient2D g = grad2(mag);
    const double energy = std::sqrt(squared_norm(g.along_cols) + squared_norm(g.along_rows) +
                                    kProbeSmoothnessEpsilon * kProbeSmoothnessEpsilon);
    g.along_cols *= 1.0 / energy;
    g.along_rows *= 1.0 / energy;
    const RealField2D d_mag = grad2_adjoint(g.along_cols, g.along_rows);
    ProbeGradient out{energy, ComplexField2D(probe.rows(), probe.cols())};
    for (std::size_t i = 0; i < probe.size(); ++i) out.d_probe[i] = d_mag[i] * probe[i] / mag[i];
    return out;
}

ObjectiveTerms objective_terms(const RealField2D& magnitude, const RealField2D& phase,
                               const ComplexField2D& probe, const DiffractionSet& dataset,
                               std::span<const std::size_t> batch, const PriorWeights& weights) {
    weights.validate();
    ObjectiveTerms t;
    t.fidelity = data_fidelity(polar_field(magnitude, phase), probe, dataset, batch);
    t.total = t.fidelity;
    if (weights.lambda_pr != 0.0) {
        t.probe_smoothness = probe_smoothness(probe);
        t.total += weights.lambda_pr * t.probe_smoothness;
    }
    if (weights.lambda_cc != 0.0) {
        t.cross_channel = cc_energy(magnitude, phase);
        t.total += weights.lambda_cc * t.cross_channel;
    }
    if (weights.lambda_x != 0.0 && weights.kind != PriorKind::None) {
        t.image_prior = weights.kind == PriorKind::TV ? tv_energy(magnitude, phase)
                                                      : stp_energy(magnitude, phase, weights.stp_sigma);
        t.total += weights.lambda_x * t.image_prior;
    }
    return t;
}

double total_objective(const ComplexField2D& object, const ComplexField2D& probe,
                       const DiffractionSet& dataset, std::span<const std::size_t> batch,
                       const PriorWeights& weights) {
    const Polar p = split(object);
    return objective_terms(p.magnitude, p.phase, probe, dataset, batch, weights).total;
}

}  // namespace ptycho
