#include "ptycho/metrics.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace ptycho {
namespace {

constexpr double kAlignEpsilon = 1e-30;

void require_mask(const PixelMask& mask, std::size_t n, const char* what) {
    if (!mask.empty() && mask.size() != n) {
        throw std::invalid_argument(std::string(what) + ": mask size does not match field");
    }
}

bool selected(const PixelMask& mask, std::size_t i) { return mask.empty() || mask[i]; }

}  // namespace

ComplexField2D align(const ComplexField2D& est, const ComplexField2D& ref, const PixelMask& mask) {
    est.require_same_shape(ref, "align");
    require_mask(mask, est.size(), "align");
    Complex cross{};
    double power = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i) {
        if (!selected(mask, i)) continue;
        cross += ref[i] * std::conj(est[i]);
        power += std::norm(est[i]);
    }
    return est * (cross / (power + kAlignEpsilon));
}

double ssim(const RealField2D& a, const RealField2D& b, const PixelMask& mask) {
    a.require_same_shape(b, "ssim");
    require_mask(mask, a.size(), "ssim");

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    bool identical = true;
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (!selected(mask, i)) continue;
        lo = std::min(lo, b[i]);
        hi = std::max(hi, b[i]);
        identical = identical && a[i] == b[i];
    }
    if (!(hi >= lo)) throw std::invalid_argument("ssim: empty region");
    const double range = hi - lo;
    if (range == 0.0) {
        if (identical) return 1.0;
        throw std::invalid_argument("ssim: reference has zero dynamic range");
    }
    const double c1 = (kSsimK1 * range) * (kSsimK1 * range);
    const double c2 = (kSsimK2 * range) * (kSsimK2 * range);

    const std::size_t wr = std::min(kSsimWindow, a.rows());
    const std::size_t wc = std::min(kSsimWindow, a.cols());
    const double n = static_cast<double>(wr * wc);
    double total = 0.0;
    std::size_t windows = 0;
    for (std::size_t r0 = 0; r0 + wr <= a.rows(); ++r0) {
        for (std::size_t c0 = 0; c0 + wc <= a.cols(); ++c0) {
            bool inside = true;
            double sa = 0.0, sb = 0.0;
            for (std::size_t r = r0; r < r0 + wr && inside; ++r) {
                for (std::size_t c = c0; c < c0 + wc; ++c) {
                    if (!selected(mask, r * a.cols() + c)) {
                        inside = false;
                        break;
                    }
                    sa += a(r, c);
                    sb += b(r, c);
                }
            }
            if (!inside) continue;
            const double mu_a = sa / n;
            const double mu_b = sb / n;
            double vaa = 0.0, vbb = 0.0, vab = 0.0;
            for (std::size_t r = r0; r < r0 + wr; ++r) {
                for (std::size_t c = c0; c < c0 + wc; ++c) {
                    const double da = a(r, c) - mu_a;
                    const double db = b(r, c) - mu_b;
                    vaa += da * da;
                    vbb += db * db;
                    vab += da * db;
                }
            }
            vaa /= n;
            vbb /= n;
            vab /= n;
            total += ((2.0 * mu_a * mu_b + c1) * (2.0 * vab + c2)) /
                     ((mu_a * mu_a + mu_b * mu_b + c1) * (vaa + vbb + c2));
            ++windows;
        }
    }
    if (windows == 0) throw std::invalid_argument("ssim: no complete window inside the region");
    return total / static_cast<double>(windows);
}

Evaluation evaluate(const ComplexField2D& est, const ComplexField2D& ref, const PixelMask& mask) {
    const ComplexField2D aligned = align(est, ref, mask);
    const Polar e = split(aligned);
    const Polar r = split(ref);
    return {ssim(e.phase, r.phase, mask), ssim(e.magnitude, r.magnitude, mask)};
}

}  // namespace ptycho
