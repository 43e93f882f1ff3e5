#include "ptycho/recon.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ptycho {
namespace {

AdamMoments zero_moments(std::size_t rows, std::size_t cols) {
    return {RealField2D(rows, cols), RealField2D(rows, cols)};
}

void adam_update(RealField2D& param, AdamMoments& moments, const RealField2D& grad, double lr,
                 const AdamSettings& adam, double correction1, double correction2) {
    param.require_same_shape(grad, "adam_step");
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad[i];
        moments.first[i] = adam.beta1 * moments.first[i] + (1.0 - adam.beta1) * g;
        moments.second[i] = adam.beta2 * moments.second[i] + (1.0 - adam.beta2) * g * g;
        const double m_hat = moments.first[i] / correction1;
        const double v_hat = moments.second[i] / correction2;
        param[i] -= lr * m_hat / (std::sqrt(v_hat) + adam.epsilon);
    }
}

}  // namespace

void ReconConfig::validate() const {
    weights.validate();
    if (!(lr_object > 0.0)) throw std::invalid_argument("lr_object must be > 0");
    if (!(lr_probe > 0.0)) throw std::invalid_argument("lr_probe must be > 0");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0)) throw std::invalid_argument("beta1 must be in [0, 1)");
    if (!(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) throw std::invalid_argument("beta2 must be in [0, 1)");
    if (!(adam.epsilon > 0.0)) throw std::invalid_argument("adam epsilon must be > 0");
    if (!(optics.wavelength > 0.0)) throw std::invalid_argument("wavelength must be > 0");
    if (!(optics.pixel_pitch > 0.0)) throw std::invalid_argument("pixel_pitch must be > 0");
}

ComplexField2D ReconState::object() const { return polar_field(obj_magnitude, obj_phase); }

ComplexField2D ReconState::probe() const {
    ComplexField2D p(probe_re.rows(), probe_re.cols());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = Complex(probe_re[i], probe_im[i]);
    return p;
}

ReconState make_state(const Polar& object, const ComplexField2D& probe, std::uint64_t seed) {
    object.magnitude.require_same_shape(object.phase, "make_state");
    const auto orows = object.magnitude.rows();
    const auto ocols = object.magnitude.cols();
    const auto prows = probe.rows();
    const auto pcols = probe.cols();
    ReconState s{object.magnitude,
                 object.phase,
                 RealField2D(prows, pcols),
                 RealField2D(prows, pcols),
                 zero_moments(orows, ocols),
                 zero_moments(orows, ocols),
                 zero_moments(prows, pcols),
                 zero_moments(prows, pcols),
                 0,
                 0,
                 std::mt19937_64(seed)};
    for (std::size_t i = 0; i < probe.size(); ++i) {
        s.probe_re[i] = probe[i].real();
        s.probe_im[i] = probe[i].imag();
    }
    return s;
}

Polar init_object(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> magnitude(0.9, 1.0);
    std::uniform_real_distribution<double> phase(-0.1, 0.1);
    Polar p{RealField2D(rows, cols), RealField2D(rows, cols)};
    for (std::size_t i = 0; i < p.magnitude.size(); ++i) {
        p.magnitude[i] = magnitude(rng);
        p.phase[i] = phase(rng);
    }
    return p;
}

ComplexField2D init_probe(const DiffractionSet& dataset, double defocus, double wavelength,
                          double pixel_pitch) {
    if (dataset.empty()) throw std::invalid_argument("init_probe: empty dataset");
    const auto& first = dataset.patterns.front();
    ComplexField2D amplitude(first.rows(), first.cols());
    for (const auto& pattern : dataset.patterns) {
        pattern.require_same_shape(first, "init_probe");
        for (std::size_t k = 0; k < pattern.size(); ++k) amplitude[k] += std::sqrt(pattern[k]);
    }
    amplitude *= Complex(1.0 / static_cast<double>(dataset.size()));
    // The inverse transform of a real spectrum peaks at index (0,0); centre it in the window.
    return fresnel_propagate(fftshift(ifft2(amplitude)), defocus, wavelength, pixel_pitch);
}

Gradients gradients(const ReconState& state, const DiffractionSet& dataset,
                    std::span<const std::size_t> batch, const PriorWeights& weights, bool fix_probe,
                    unsigned threads) {
    weights.validate();
    const ComplexField2D object = state.object();
    const ComplexField2D probe = state.probe();
    const auto orows = object.rows();
    const auto ocols = object.cols();

    Gradients g{RealField2D(orows, ocols), RealField2D(orows, ocols),
                RealField2D(probe.rows(), probe.cols()), RealField2D(probe.rows(), probe.cols()), {}};

    const FidelityGradient fid = data_fidelity_gradient(object, probe, dataset, batch, threads);
    g.energy.fidelity = fid.energy;
    // O = m exp(i phi): dE/dm = Re(conj(g) e^{i phi}), dE/dphi = Re(conj(g) i O).
    for (std::size_t i = 0; i < object.size(); ++i) {
        const Complex d = std::conj(fid.d_object[i]);
        const Complex unit = std::polar(1.0, state.obj_phase[i]);
        g.obj_magnitude[i] = (d * unit).real();
        g.obj_phase[i] = (d * Complex(0.0, 1.0) * object[i]).real();
    }
    ComplexField2D d_probe = fid.d_probe;

    auto add_channels = [&](const ChannelGradient& cg, double lambda) {
        for (std::size_t i = 0; i < g.obj_magnitude.size(); ++i) {
            g.obj_magnitude[i] += lambda * cg.d_magnitude[i];
            g.obj_phase[i] += lambda * cg.d_phase[i];
        }
    };

    if (weights.lambda_cc != 0.0) {
        const ChannelGradient cc = cc_energy_gradient(state.obj_magnitude, state.obj_phase);
        g.energy.cross_channel = cc.energy;
        add_channels(cc, weights.lambda_cc);
    }
    if (weights.lambda_x != 0.0 && weights.kind != PriorKind::None) {
        const ChannelGradient px =
            weights.kind == PriorKind::TV
                ? tv_energy_gradient(state.obj_magnitude, state.obj_phase)
                : stp_energy_gradient(state.obj_magnitude, state.obj_phase, weights.stp_sigma);
        g.energy.image_prior = px.energy;
        add_channels(px, weights.lambda_x);
    }
    if (weights.lambda_pr != 0.0) {
        const ProbeGradient pg = probe_smoothness_gradient(probe);
        g.energy.probe_smoothness = pg.energy;
        for (std::size_t i = 0; i < d_probe.size(); ++i) d_probe[i] += weights.lambda_pr * pg.d_probe[i];
    }
    g.energy.total = g.energy.fidelity + weights.lambda_pr * g.energy.probe_smoothness +
                     weights.lambda_cc * g.energy.cross_channel + weights.lambda_x * g.energy.image_prior;

    if (!fix_probe) {
        for (std::size_t i = 0; i < d_probe.size(); ++i) {
            g.probe_re[i] = d_probe[i].real();
            g.probe_im[i] = d_probe[i].imag();
        }
    }
    return g;
}

void adam_step(ReconState& state, const Gradients& grads, const ReconConfig& config, bool update_probe) {
    auto corrections = [&](std::size_t steps) {
        const double t = static_cast<double>(steps);
        return std::pair{1.0 - std::pow(config.adam.beta1, t), 1.0 - std::pow(config.adam.beta2, t)};
    };
    state.step_count += 1;
    const auto [c1, c2] = corrections(state.step_count);
    adam_update(state.obj_magnitude, state.m_magnitude, grads.obj_magnitude, config.lr_object, config.adam, c1, c2);
    adam_update(state.obj_phase, state.m_phase, grads.obj_phase, config.lr_object, config.adam, c1, c2);
    for (auto& m : state.obj_magnitude) m = std::max(0.0, m);
    if (update_probe && !config.fix_probe) {
        state.probe_step_count += 1;
        const auto [p1, p2] = corrections(state.probe_step_count);
        adam_update(state.probe_re, state.m_probe_re, grads.probe_re, config.lr_probe, config.adam, p1, p2);
        adam_update(state.probe_im, state.m_probe_im, grads.probe_im, config.lr_probe, config.adam, p1, p2);
    }
}

ReconResult reconstruct(const DiffractionSet& dataset, const ReconConfig& config) {
    config.validate();
    if (dataset.empty()) throw std::invalid_argument("reconstruct: empty dataset");
    dataset.validate();

    const auto& plan = dataset.plan;
    const Polar object0 = init_object(plan.object.rows, plan.object.cols, config.seed);
    ComplexField2D probe0 = config.initial_probe
                                ? *config.initial_probe
                                : init_probe(dataset, config.optics.defocus, config.optics.wavelength,
                                             config.optics.pixel_pitch);
    if (probe0.rows() != plan.probe.rows || probe0.cols() != plan.probe.cols) {
        throw std::invalid_argument("reconstruct: initial probe shape " + probe0.shape_string() +
                                    " does not match the scan plan");
    }

    // Distinct stream from the object initialization.
    std::seed_seq shuffle_seed{static_cast<std::uint32_t>(config.seed),
                               static_cast<std::uint32_t>(config.seed >> 32), 0x5eedu};
    ReconState state = make_state(object0, probe0, 0);
    state.rng.seed(shuffle_seed);

    const auto everything = all_indices(dataset);
    std::vector<std::size_t> order = everything;
    ReconResult result;
    result.history.reserve(config.epochs);
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), state.rng);
        const bool hold_probe = config.fix_probe || epoch <= config.probe_warmup_epochs;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const auto len = std::min(config.batch_size, order.size() - start);
            const std::span<const std::size_t> batch(order.data() + start, len);
            const Gradients g = gradients(state, dataset, batch, config.weights, hold_probe, config.threads);
            adam_step(state, g, config, !hold_probe);
        }
        const ObjectiveTerms terms = objective_terms(state.obj_magnitude, state.obj_phase, state.probe(),
                                                     dataset, everything, config.weights);
        result.history.push_back({epoch, terms.fidelity, terms.total});
    }
    result.object = join(state.obj_magnitude, state.obj_phase);
    result.probe = state.probe();
    return result;
}

}  // namespace ptycho
