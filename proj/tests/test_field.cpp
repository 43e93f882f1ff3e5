#include <gtest/gtest.h>

#include <numbers>

#include "ptycho/field.hpp"
#include "support.hpp"

using namespace ptycho;
using namespace testing_support;

TEST(Field2D, RejectsEmptyAndMismatchedShapes) {
    EXPECT_THROW(RealField2D(0, 3), std::invalid_argument);
    EXPECT_THROW(RealField2D(2, 2, std::vector<double>(3)), std::invalid_argument);
    RealField2D a(2, 3), b(3, 2);
    EXPECT_THROW(a += b, std::invalid_argument);
}

TEST(Field2D, ArithmeticAndFiniteness) {
    RealField2D a(2, 2, std::vector<double>{1, 2, 3, 4});
    RealField2D b(2, 2, 1.0);
    EXPECT_EQ((a + b)(1, 1), 5.0);
    EXPECT_EQ((a - b)(0, 0), 0.0);
    EXPECT_EQ((a * 2.0)(0, 1), 4.0);
    EXPECT_TRUE(a.all_finite());
    a(0, 0) = std::nan("");
    EXPECT_FALSE(a.all_finite());
}

TEST(Fft, MatchesDirectSummation) {
    std::mt19937_64 rng(11);
    for (auto [r, c] : {std::pair{2, 2}, {3, 5}, {8, 8}, {6, 4}}) {
        const auto x = random_complex(r, c, rng);
        EXPECT_LT(max_abs_diff(fft2(x), direct_dft(x, -1)), 1e-12) << r << "x" << c;
        EXPECT_LT(max_abs_diff(ifft2(x), direct_dft(x, +1)), 1e-12) << r << "x" << c;
    }
}

TEST(Fft, ImpulseGivesFlatSpectrum) {
    ComplexField2D x(4, 4);
    x(0, 0) = 2.0;
    for (const auto& v : fft2(x)) EXPECT_NEAR(std::abs(v - Complex(0.5, 0.0)), 0.0, 1e-15);
}

TEST(Fft, ParsevalInverseAndLinearity) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const auto x = random_complex(16, 12, rng);
        const auto y = random_complex(16, 12, rng);
        const Complex a(0.3, -1.2), b(-2.0, 0.5);
        EXPECT_NEAR(norm2(fft2(x)), norm2(x), 1e-12 * norm2(x));
        EXPECT_LT(max_abs_diff(ifft2(fft2(x)), x), 1e-13);
        const auto lhs = fft2(x * a + y * b);
        const auto rhs = fft2(x) * a + fft2(y) * b;
        EXPECT_LT(max_abs_diff(lhs, rhs), 1e-12);
    }
}

TEST(Fresnel, ZeroDistanceIsIdentityAndEnergyIsConserved) {
    std::mt19937_64 rng(2);
    const auto x = random_complex(32, 32, rng);
    EXPECT_EQ(fresnel_propagate(x, 0.0, 1e-10, 1e-8), x);
    const auto y = fresnel_propagate(x, 2e-3, 1.24e-10, 40e-9);
    EXPECT_NEAR(norm2(y), norm2(x), 1e-10 * norm2(x));
}

TEST(Fresnel, DistancesCompose) {
    std::mt19937_64 rng(3);
    const auto x = random_complex(16, 24, rng);
    const double lam = 1.24e-10, dx = 40e-9;
    const auto two_steps = fresnel_propagate(fresnel_propagate(x, 1e-3, lam, dx), 1.5e-3, lam, dx);
    EXPECT_LT(max_abs_diff(two_steps, fresnel_propagate(x, 2.5e-3, lam, dx)), 1e-12);
    EXPECT_LT(max_abs_diff(fresnel_propagate(fresnel_propagate(x, 1e-3, lam, dx), -1e-3, lam, dx), x), 1e-12);
}

TEST(Fresnel, MatchesTransferFunctionOracle) {
    std::mt19937_64 rng(4);
    const auto x = random_complex(6, 4, rng);
    const double z = 1e-3, lam = 1e-10, dx = 5e-8;
    auto spectrum = direct_dft(x, -1);
    for (std::size_t k = 0; k < 6; ++k) {
        for (std::size_t l = 0; l < 4; ++l) {
            const double u = fft_frequency_index(k, 6) / (6 * dx);
            const double v = fft_frequency_index(l, 4) / (4 * dx);
            spectrum(k, l) *= std::polar(1.0, -std::numbers::pi * lam * z * (u * u + v * v));
        }
    }
    EXPECT_LT(max_abs_diff(fresnel_propagate(x, z, lam, dx), direct_dft(spectrum, +1)), 1e-12);
}

TEST(Fresnel, RejectsBadOptics) {
    ComplexField2D x(4, 4, 1.0);
    EXPECT_THROW(fresnel_propagate(x, 1e-3, 0.0, 1e-8), std::invalid_argument);
    EXPECT_THROW(fresnel_propagate(x, 1e-3, 1e-10, -1.0), std::invalid_argument);
}

TEST(Grad2, ColumnRamp) {
    RealField2D f(4, 5);
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 5; ++c) f(r, c) = double(c);
    const auto g = grad2(f);
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 0; c < 5; ++c) {
            EXPECT_EQ(g.along_cols(r, c), c + 1 < 5 ? 1.0 : 0.0);
            EXPECT_EQ(g.along_rows(r, c), 0.0);
        }
    }
}

TEST(Grad2, AdjointIdentity) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 5; ++trial) {
        const auto f = random_real(7, 5, rng);
        const auto dc = random_real(7, 5, rng);
        const auto dr = random_real(7, 5, rng);
        const auto g = grad2(f);
        double lhs = 0.0, rhs = 0.0;
        const auto adj = grad2_adjoint(dc, dr);
        for (std::size_t i = 0; i < f.size(); ++i) {
            lhs += g.along_cols[i] * dc[i] + g.along_rows[i] * dr[i];
            rhs += f[i] * adj[i];
        }
        EXPECT_NEAR(lhs, rhs, 1e-12);
    }
}

TEST(Polar, SplitJoinRoundTrip) {
    std::mt19937_64 rng(6);
    const auto x = random_complex(9, 7, rng);
    const auto p = split(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_GE(p.magnitude[i], 0.0);
        EXPECT_GT(p.phase[i], -std::numbers::pi);
        EXPECT_LE(p.phase[i], std::numbers::pi);
    }
    EXPECT_LT(max_abs_diff(join(p.magnitude, p.phase), x), 1e-14);
    ComplexField2D zero(2, 2);
    EXPECT_EQ(split(zero).phase(1, 1), 0.0);
}

TEST(Polar, JoinRejectsNegativeMagnitude) {
    RealField2D m(2, 2, 1.0), phi(2, 2);
    m(0, 1) = -0.5;
    EXPECT_THROW(join(m, phi), std::invalid_argument);
    EXPECT_THROW(join(RealField2D(2, 2), RealField2D(2, 3)), std::invalid_argument);
}

TEST(FftShift, MovesOriginToCentre) {
    ComplexField2D x(4, 6);
    x(0, 0) = 1.0;
    EXPECT_EQ(fftshift(x)(2, 3), Complex(1.0, 0.0));
    EXPECT_EQ(fft_frequency_index(3, 6), -3.0);
    EXPECT_EQ(fft_frequency_index(2, 5), 2.0);
    EXPECT_EQ(fft_frequency_index(3, 5), -2.0);
}
