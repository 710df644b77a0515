#include "slca/kernel_stats.hpp"

#include <algorithm>
#include <cmath>

#include "slca/errors.hpp"

namespace slca {

std::string to_string(KernelType t) {
    switch (t) {
        case KernelType::MatchedGabor: return "MatchedGabor";
        case KernelType::TunedInhibitory: return "TunedInhibitory";
        case KernelType::BlobLike: return "BlobLike";
        case KernelType::Unclassified: break;
    }
    return "Unclassified";
}

OcularDominance ocular_dominance(const Image& left, const Image& right) {
    const double l = std::sqrt(left.squared_norm()), r = std::sqrt(right.squared_norm());
    if (!(l > 0.0) && !(r > 0.0)) throw DataError("both half-kernels are zero");
    OcularDominance od;
    od.angle = std::atan2(l, r);
    od.bin = std::min(7, static_cast<int>(std::floor(od.angle / (M_PI / 14.0))) + 1);
    return od;
}

ShiftStats shift_statistics(const GaborFit& left, const GaborFit& right, double r2_cut) {
    if (!(left.r2 > r2_cut) || !(right.r2 > r2_cut)) throw DataError("Gabor fits below the quality cut");
    const GaborParams& L = left.params;
    GaborParams R = right.params;
    // Orientations are defined modulo pi; take the representative of the
    // right carrier closest to the left one (flipping the carrier axis
    // negates the phase).
    double dphi = R.phi - L.phi;
    if (dphi > M_PI / 2) {
        R.phi -= M_PI;
        R.kappa = -R.kappa;
    } else if (dphi < -M_PI / 2) {
        R.phi += M_PI;
        R.kappa = -R.kappa;
    }
    const double phi = 0.5 * (L.phi + R.phi), f = 0.5 * (L.f + R.f);
    ShiftStats s;
    s.dx = R.x0 - L.x0;
    s.dy = R.y0 - L.y0;
    s.pos_shift = f * (s.dx * std::cos(phi) + s.dy * std::sin(phi));
    s.phase_shift = wrap_angle(R.kappa - L.kappa);
    return s;
}

bool blob_like(const Image& k) {
    double e = 0.0, xc = 0.0, yc = 0.0;
    for (int r = 0; r < k.height(); ++r)
        for (int c = 0; c < k.width(); ++c) {
            const double w = k(r, c) * k(r, c);
            e += w;
            xc += w * c;
            yc += w * r;
        }
    if (!(e > 0.0)) return false;
    xc /= e;
    yc /= e;
    const double size = std::min(k.height(), k.width());
    const int rings = static_cast<int>(std::ceil(0.5 * size)) + 1;
    std::vector<double> sum(rings, 0.0);
    std::vector<int> n(rings, 0);
    double inside = 0.0;
    for (int r = 0; r < k.height(); ++r)
        for (int c = 0; c < k.width(); ++c) {
            const double d = std::hypot(c - xc, r - yc);
            if (d <= 0.4 * size) inside += k(r, c) * k(r, c);
            // Ring 0 is the central disc of radius 1.5.
            const int ring = d < 1.5 ? 0 : static_cast<int>(std::floor(d - 0.5));
            if (ring < rings) {
                sum[ring] += k(r, c);
                ++n[ring];
            }
        }
    if (inside < 0.85 * e || n[0] == 0) return false;
    const double center = sum[0] / n[0];
    for (int i = 1; i < rings; ++i) {
        if (n[i] == 0) continue;
        const double m = sum[i] / n[i];
        if (m * center < 0.0 && std::abs(m) >= 0.1 * std::abs(center)) return true;
    }
    return false;
}

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

KernelType classify_kernel(const KernelStats& st, const Image& left, const Image& right,
                           const std::vector<double>& tuning_row, std::size_t zero_index,
                           const ClassifyOptions& opts) {
    const bool good_l = st.left_fit.r2 > opts.r2_cut, good_r = st.right_fit.r2 > opts.r2_cut;
    const int bin = st.dominance.bin;
    const double phase = std::abs(st.shift.phase_shift);
    if (good_l && good_r && st.has_shift && bin == 4 && phase < opts.matched_phase) return KernelType::MatchedGabor;
    if (bin <= 2 || bin >= 6) return KernelType::TunedInhibitory;
    if (good_l && good_r && st.has_shift && phase > opts.inhibitory_phase && zero_index < tuning_row.size() &&
        tuning_row[zero_index] < median(tuning_row))
        return KernelType::TunedInhibitory;
    if (!good_l && !good_r) {
        // Halves carrying a negligible share of the energy do not vote.
        const double el = left.squared_norm(), er = right.squared_norm();
        const bool ok_l = el < 0.1 * (el + er) || blob_like(left);
        const bool ok_r = er < 0.1 * (el + er) || blob_like(right);
        if (ok_l && ok_r) return KernelType::BlobLike;
    }
    return KernelType::Unclassified;
}

KernelStats analyze_kernel(const Image& left, const Image& right, const std::vector<double>& tuning_row,
                           std::size_t zero_index, const ClassifyOptions& opts) {
    KernelStats st;
    GaborFitOptions fo;
    fo.min_cycles = true;
    auto fit_or_empty = [&](const Image& k, double& sst) {
        const double m = k.mean();
        sst = 0.0;
        for (double v : k.values()) sst += (v - m) * (v - m);
        if (!(sst > 0.0)) return GaborFit{};
        return fit_gabor(k, fo);
    };
    double sst_l, sst_r;
    st.left_fit = fit_or_empty(left, sst_l);
    st.right_fit = fit_or_empty(right, sst_r);
    const double sse = (sst_l > 0 ? st.left_fit.sse : 0.0) + (sst_r > 0 ? st.right_fit.sse : 0.0);
    st.joint_r2 = sst_l + sst_r > 0.0 ? 1.0 - sse / (sst_l + sst_r) : 0.0;
    st.dominance = ocular_dominance(left, right);
    if (st.left_fit.r2 > opts.r2_cut && st.right_fit.r2 > opts.r2_cut) {
        st.shift = shift_statistics(st.left_fit, st.right_fit, opts.r2_cut);
        st.has_shift = true;
    }
    st.type = classify_kernel(st, left, right, tuning_row, zero_index, opts);
    return st;
}

}  // namespace slca
