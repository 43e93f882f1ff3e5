#include <gtest/gtest.h>

#include "ptycho/phantom.hpp"
#include "ptycho/recon.hpp"
#include "support.hpp"

using namespace ptycho;
using namespace testing_support;

namespace {

struct Problem {
    ComplexField2D object;
    ComplexField2D probe;
    DiffractionSet data;
};

Problem small_problem(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Problem p{random_complex(8, 8, rng), random_complex(4, 4, rng), {}};
    const ScanPlan plan{{{0, 0}, {3, 4}}, {4, 4}, {8, 8}};
    p.data = simulate(p.object, p.probe, plan);
    return p;
}

ReconState random_state(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Polar obj{random_real(8, 8, rng, 0.4, 1.2), random_real(8, 8, rng, -1.0, 1.0)};
    return make_state(obj, random_complex(4, 4, rng), 0);
}

double state_energy(const ReconState& s, const DiffractionSet& data, std::span<const std::size_t> batch,
                    const PriorWeights& w) {
    return objective_terms(s.obj_magnitude, s.obj_phase, s.probe(), data, batch, w).total;
}

double max_abs(const RealField2D& f) {
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    return m;
}

Problem phantom_problem(std::size_t step) {
    const Extent obj{64, 64}, probe{32, 32};
    Problem p{chip_like_phantom(obj, 3), gaussian_probe(probe, 8.0, defocus_curvature(Optics{})), {}};
    p.data = simulate(p.object, p.probe, raster_plan(obj, probe, step));
    return p;
}

}  // namespace

TEST(InitObject, RangesAndSeeding) {
    const auto a = init_object(20, 15, 4);
    const auto b = init_object(20, 15, 4);
    const auto c = init_object(20, 15, 5);
    for (std::size_t i = 0; i < a.magnitude.size(); ++i) {
        EXPECT_GE(a.magnitude[i], 0.9);
        EXPECT_LE(a.magnitude[i], 1.0);
        EXPECT_GE(a.phase[i], -0.1);
        EXPECT_LE(a.phase[i], 0.1);
    }
    EXPECT_EQ(a.magnitude, b.magnitude);
    EXPECT_EQ(a.phase, b.phase);
    EXPECT_NE(a.magnitude, c.magnitude);
}

TEST(InitProbe, FlatFromZeroFrequencyBin) {
    DiffractionSet data;
    data.plan = {{{0, 0}, {0, 1}}, {4, 4}, {4, 5}};
    RealField2D pattern(4, 4);
    pattern(0, 0) = 9.0;
    data.patterns = {pattern, pattern};
    const auto p = init_probe(data, 0.0, 1e-10, 1e-8);
    for (const auto& v : p) EXPECT_NEAR(std::abs(v), 3.0 / 4.0, 1e-14);
    EXPECT_THROW(init_probe(DiffractionSet{}, 0.0, 1e-10, 1e-8), std::invalid_argument);
}

TEST(InitProbe, AveragingAndUnitarity) {
    std::mt19937_64 rng(2);
    DiffractionSet one;
    one.plan = {{{0, 0}}, {6, 6}, {6, 6}};
    one.patterns = {random_real(6, 6, rng, 0.0, 4.0)};
    DiffractionSet three = one;
    three.plan = {{{0, 0}, {1, 0}, {2, 0}}, {6, 6}, {8, 6}};
    three.patterns = {one.patterns[0], one.patterns[0], one.patterns[0]};
    const auto p1 = init_probe(one, 1e-3, 1.24e-10, 40e-9);
    EXPECT_LT(max_abs_diff(init_probe(three, 1e-3, 1.24e-10, 40e-9), p1), 1e-14);

    double amp = 0.0;
    for (double v : one.patterns[0]) amp += v;
    EXPECT_NEAR(norm2(init_probe(one, 0.0, 1.24e-10, 40e-9)), std::sqrt(amp), 1e-12);
    EXPECT_NEAR(norm2(p1), std::sqrt(amp), 1e-12);
}

TEST(Gradients, MatchFiniteDifferencesForEveryTerm) {
    const auto prob = small_problem(3);
    const std::vector<std::size_t> batch{0, 1};
    const std::vector<PriorWeights> cases{
        {},
        {0.3, 0.0, 0.0, PriorKind::None, 1.5},
        {0.0, 0.2, 0.0, PriorKind::None, 1.5},
        {0.0, 0.0, 0.5, PriorKind::TV, 1.5},
        {0.0, 0.0, 0.5, PriorKind::STP, 1.5},
        {0.01, 0.01, 0.01, PriorKind::TV, 1.5},
        {0.01, 0.01, 0.01, PriorKind::STP, 1.0},
    };
    for (std::size_t k = 0; k < cases.size(); ++k) {
        const auto& w = cases[k];
        auto s = random_state(10 + k);
        const auto g = gradients(s, prob.data, batch, w);
        EXPECT_NEAR(g.energy.total, state_energy(s, prob.data, batch, w), 1e-12 * g.energy.total);
        auto energy = [&] { return state_energy(s, prob.data, batch, w); };
        EXPECT_LT(worst_fd_error(s.obj_magnitude, g.obj_magnitude, energy), 1e-5) << k;
        EXPECT_LT(worst_fd_error(s.obj_phase, g.obj_phase, energy), 1e-5) << k;
        EXPECT_LT(worst_fd_error(s.probe_re, g.probe_re, energy), 1e-5) << k;
        EXPECT_LT(worst_fd_error(s.probe_im, g.probe_im, energy), 1e-5) << k;
    }
}

TEST(Gradients, VanishAtTheTruth) {
    const auto prob = small_problem(4);
    const Polar truth = split(prob.object);
    const auto s = make_state(truth, prob.probe, 0);
    const auto g = gradients(s, prob.data, all_indices(prob.data), {});
    EXPECT_LE(max_abs(g.obj_magnitude), 1e-10);
    EXPECT_LE(max_abs(g.obj_phase), 1e-10);
    EXPECT_LE(max_abs(g.probe_re), 1e-10);
    EXPECT_LE(max_abs(g.probe_im), 1e-10);
}

TEST(Gradients, LinearInPriorWeight) {
    const auto prob = small_problem(5);
    const auto s = random_state(6);
    const auto batch = all_indices(prob.data);
    for (auto kind : {PriorKind::TV, PriorKind::STP}) {
        const auto g0 = gradients(s, prob.data, batch, {0.0, 0.0, 0.0, kind, 1.5});
        const auto g1 = gradients(s, prob.data, batch, {0.0, 0.0, 0.25, kind, 1.5});
        const auto g2 = gradients(s, prob.data, batch, {0.0, 0.0, 0.5, kind, 1.5});
        for (std::size_t i = 0; i < g0.obj_magnitude.size(); ++i) {
            EXPECT_NEAR(g2.obj_magnitude[i] - g0.obj_magnitude[i], 2.0 * (g1.obj_magnitude[i] - g0.obj_magnitude[i]),
                        1e-10);
            EXPECT_NEAR(g2.obj_phase[i] - g0.obj_phase[i], 2.0 * (g1.obj_phase[i] - g0.obj_phase[i]), 1e-10);
        }
    }
}

TEST(Gradients, FixedProbeGivesZeroProbeGradient) {
    const auto prob = small_problem(7);
    const auto g = gradients(random_state(8), prob.data, all_indices(prob.data), {}, true);
    EXPECT_EQ(max_abs(g.probe_re), 0.0);
    EXPECT_EQ(max_abs(g.probe_im), 0.0);
    EXPECT_GT(max_abs(g.obj_magnitude), 0.0);
}

TEST(Gradients, GlobalPhaseGaugeKeepsEnergyAndNorms) {
    const auto prob = small_problem(9);
    const auto s = random_state(10);
    const auto batch = all_indices(prob.data);
    const auto base = gradients(s, prob.data, batch, {});
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> theta(-3.0, 3.0);
    for (int trial = 0; trial < 10; ++trial) {
        const double t = theta(rng);
        Polar obj{s.obj_magnitude, s.obj_phase};
        for (auto& v : obj.phase) v += t;
        const auto gauged = make_state(obj, s.probe() * std::polar(1.0, -t), 0);
        const auto g = gradients(gauged, prob.data, batch, {});
        EXPECT_NEAR(g.energy.fidelity, base.energy.fidelity, 1e-10 * base.energy.fidelity);
        EXPECT_NEAR(squared_norm(g.obj_magnitude), squared_norm(base.obj_magnitude),
                    1e-10 * squared_norm(base.obj_magnitude));
        EXPECT_NEAR(squared_norm(g.obj_phase), squared_norm(base.obj_phase), 1e-10 * squared_norm(base.obj_phase));
        const double pn = squared_norm(base.probe_re) + squared_norm(base.probe_im);
        EXPECT_NEAR(squared_norm(g.probe_re) + squared_norm(g.probe_im), pn, 1e-10 * pn);
    }
}

TEST(AdamStep, ZeroGradientLeavesParameters) {
    auto s = random_state(12);
    const auto before = s;
    const Gradients zero{RealField2D(8, 8), RealField2D(8, 8), RealField2D(4, 4), RealField2D(4, 4), {}};
    adam_step(s, zero, ReconConfig{});
    EXPECT_EQ(s.step_count, 1u);
    EXPECT_EQ(s.obj_magnitude, before.obj_magnitude);
    EXPECT_EQ(s.obj_phase, before.obj_phase);
    EXPECT_EQ(s.probe_re, before.probe_re);
    EXPECT_EQ(s.probe_im, before.probe_im);
}

TEST(AdamStep, FirstStepClosedForm) {
    auto s = random_state(13);
    const auto before = s;
    std::mt19937_64 rng(14);
    Gradients g{random_real(8, 8, rng, -2.0, 2.0), RealField2D(8, 8, 1.0), random_real(4, 4, rng),
                random_real(4, 4, rng), {}};
    ReconConfig config;
    config.lr_object = 0.1;
    config.lr_probe = 0.01;
    adam_step(s, g, config);
    const double eps = config.adam.epsilon;
    for (std::size_t i = 0; i < 64; ++i) {
        const double gm = g.obj_magnitude[i];
        const double expect = std::max(0.0, before.obj_magnitude[i] - 0.1 * gm / (std::abs(gm) + eps));
        EXPECT_NEAR(s.obj_magnitude[i], expect, 1e-15);
        EXPECT_NEAR(s.obj_phase[i] - before.obj_phase[i], -0.1 / (1.0 + 1e-8), 1e-15);
    }
    for (std::size_t i = 0; i < 16; ++i) {
        const double gr = g.probe_re[i];
        EXPECT_NEAR(s.probe_re[i] - before.probe_re[i], -0.01 * gr / (std::abs(gr) + eps), 1e-15);
        EXPECT_LT((s.probe_im[i] - before.probe_im[i]) * g.probe_im[i], 0.0);
    }
    EXPECT_EQ(s.probe_step_count, 1u);
}

TEST(AdamStep, ClampsMagnitudeAndHoldsProbe) {
    auto s = random_state(15);
    const auto before = s;
    Gradients g{RealField2D(8, 8, 1.0), RealField2D(8, 8), RealField2D(4, 4, 1.0), RealField2D(4, 4, 1.0), {}};
    ReconConfig config;
    config.lr_object = 5.0;
    adam_step(s, g, config, false);
    for (double m : s.obj_magnitude) EXPECT_EQ(m, 0.0);
    EXPECT_EQ(s.probe_re, before.probe_re);
    EXPECT_EQ(s.probe_step_count, 0u);
    config.fix_probe = true;
    adam_step(s, g, config, true);
    EXPECT_EQ(s.probe_im, before.probe_im);
    EXPECT_EQ(s.step_count, 2u);
}

TEST(ReconConfig, Validation) {
    ReconConfig c;
    EXPECT_NO_THROW(c.validate());
    c.lr_object = 0.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.batch_size = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.adam.beta2 = 1.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.weights.lambda_pr = -1.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Reconstruct, ZeroEpochsReturnsInitialization) {
    const auto prob = small_problem(16);
    ReconConfig config;
    config.epochs = 0;
    config.seed = 17;
    const auto r = reconstruct(prob.data, config);
    const auto init = init_object(8, 8, 17);
    EXPECT_EQ(r.object, join(init.magnitude, init.phase));
    EXPECT_EQ(r.probe, init_probe(prob.data, config.optics.defocus, config.optics.wavelength,
                                  config.optics.pixel_pitch));
    EXPECT_TRUE(r.history.empty());
}

TEST(Reconstruct, DeterministicForFixedSeed) {
    const auto prob = phantom_problem(8);
    ReconConfig config;
    config.epochs = 5;
    config.seed = 3;
    const auto a = reconstruct(prob.data, config);
    const auto b = reconstruct(prob.data, config);
    ASSERT_EQ(a.history.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(a.history[i].fidelity, b.history[i].fidelity);
        EXPECT_EQ(a.history[i].total, b.history[i].total);
    }
    EXPECT_EQ(a.object, b.object);
    EXPECT_EQ(a.probe, b.probe);
    config.threads = 3;
    const auto c = reconstruct(prob.data, config);
    EXPECT_EQ(c.object, a.object);
}

TEST(Reconstruct, ProbeHeldDuringWarmupAndWhenFixed) {
    const auto prob = phantom_problem(8);
    ReconConfig config;
    config.epochs = 3;
    config.probe_warmup_epochs = 3;
    config.initial_probe = prob.probe * Complex(0.9);
    EXPECT_EQ(reconstruct(prob.data, config).probe, *config.initial_probe);
    config.probe_warmup_epochs = 0;
    config.fix_probe = true;
    EXPECT_EQ(reconstruct(prob.data, config).probe, *config.initial_probe);
    config.fix_probe = false;
    EXPECT_NE(reconstruct(prob.data, config).probe, *config.initial_probe);
    config.initial_probe = ComplexField2D(16, 16, 1.0);
    EXPECT_THROW(reconstruct(prob.data, config), std::invalid_argument);
}

TEST(Reconstruct, FixedTrueProbeConvergesAndDescends) {
    // 64x64 object, 32x32 probe of sigma 8, step 4: 79% overlap.
    const auto prob = phantom_problem(4);
    ReconConfig config;
    config.epochs = 200;
    config.lr_object = 0.005;
    config.batch_size = 8;
    config.fix_probe = true;
    config.initial_probe = prob.probe;
    config.seed = 1;
    const auto r = reconstruct(prob.data, config);
    ASSERT_EQ(r.history.size(), 200u);
    EXPECT_LE(r.history.back().fidelity, 1e-3 * r.history.front().fidelity);
    for (std::size_t t = 0; t + 50 < r.history.size(); ++t) {
        ASSERT_TRUE(std::isfinite(r.history[t].fidelity));
        EXPECT_LE(r.history[t + 50].fidelity, r.history[t].fidelity) << "window starting at epoch " << t + 1;
    }
}
