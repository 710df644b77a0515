#pragma once

#include <optional>
#include <vector>

#include "slca/dictionary.hpp"
#include "slca/filters.hpp"
#include "slca/lca.hpp"
#include "slca/tuning.hpp"

namespace slca {

struct ScaleSpaceConfig {
    std::vector<double> scales{1.0, 0.8, 0.6, 0.4, 0.2};
    LcaConfig lca;
    PreprocessConfig preprocess{0.5, 1.0, 5.5, 0.0, 16};
    int workers = 1;
};

// Estimates on the full-resolution cell grid: cell (i, j) covers pixels
// [s*i, s*i + s) x [s*j, s*j + s) for stride s.
struct ScaleSpaceResult {
    int rows = 0;
    int cols = 0;
    std::vector<double> scales;        // effective per scale (mean of the row and column ratios)
    std::vector<double> dx;            // full-resolution px
    std::vector<double> dy;
    std::vector<int> scale_index;      // index into scales, -1 where masked
    std::vector<int> active_count;     // 2 x 2 block activity at the chosen scale
    std::vector<std::vector<int>> active_by_scale;

    bool masked(std::size_t i) const { return scale_index[i] < 0; }
};

// Encodes the scene at every scale and keeps, per cell, the finest scale
// whose estimate lies inside the model's disparity range. With ground-truth
// disparity maps (full-resolution px per pixel) the range test uses the true
// disparity; without, estimates are chained from coarse to fine.
ScaleSpaceResult scale_space_infer(const StereoPair& scene, const Dictionary& dict, const TuningMaps& tuning,
                                   const ScaleSpaceConfig& cfg, const Image* truth_dx = nullptr,
                                   const Image* truth_dy = nullptr);

// Mean of `img` over each stride x stride cell of the full-resolution grid.
Image cell_average(const Image& img, int rows, int cols, int stride);

}  // namespace slca
