#pragma once

#include <string>
#include <vector>

#include "slca/gabor.hpp"
#include "slca/image.hpp"

namespace slca {

struct OcularDominance {
    double angle = 0.0;  // atan(||L|| / ||R||) in [0, pi/2]
    int bin = 4;         // 1 (right only) .. 7 (left only)
};

OcularDominance ocular_dominance(const Image& left, const Image& right);

struct ShiftStats {
    double pos_shift = 0.0;    // cycles, displacement projected on the carrier axis times mean f
    double phase_shift = 0.0;  // wrap(kappa_R - kappa_L)
    double dx = 0.0;           // raw center displacement, right minus left
    double dy = 0.0;
};

// Throws DataError when either fit misses the r^2 cut.
ShiftStats shift_statistics(const GaborFit& left, const GaborFit& right, double r2_cut = 0.93);

enum class KernelType { MatchedGabor, TunedInhibitory, BlobLike, Unclassified };
std::string to_string(KernelType t);

struct KernelStats {
    GaborFit left_fit;
    GaborFit right_fit;   // r2 = 0 when a half has no variance
    double joint_r2 = 0.0;  // both halves pooled
    OcularDominance dominance;
    bool has_shift = false;
    ShiftStats shift;
    KernelType type = KernelType::Unclassified;
};

// True when the weights concentrate around their energy centroid and the
// radial mean profile changes sign (center-surround shape).
bool blob_like(const Image& kernel);

struct ClassifyOptions {
    double r2_cut = 0.93;
    double matched_phase = 0.7853981633974483;      // pi / 4
    double inhibitory_phase = 2.356194490192345;    // 3 pi / 4
};

// `tuning_row` is the kernel's activation probability over the disparity
// grid and `zero_index` the grid index of zero disparity; an empty row
// disables the tuning-based test.
KernelType classify_kernel(const KernelStats& stats, const Image& left, const Image& right,
                           const std::vector<double>& tuning_row, std::size_t zero_index,
                           const ClassifyOptions& opts = {});

// Fits (with the n >= 0.25 bound), dominance, shift and type for one kernel pair.
KernelStats analyze_kernel(const Image& left, const Image& right, const std::vector<double>& tuning_row,
                           std::size_t zero_index, const ClassifyOptions& opts = {});

}  // namespace slca
