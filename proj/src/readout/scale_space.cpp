#include "slca/scale_space.hpp"

#include <algorithm>
#include <cmath>

#include "slca/errors.hpp"
#include "slca/inference.hpp"
#include "slca/parallel.hpp"

namespace slca {

namespace {

struct ScaleEstimate {
    double ratio_y = 1.0, ratio_x = 1.0;
    LabelMap map;
};

int snapped(int extent, double scale, int stride) {
    return std::max(2 * stride, static_cast<int>(std::lround(extent * scale / stride)) * stride);
}

// Cell of the scaled map holding the center of full-resolution cell i.
int scaled_cell(int i, int stride, double ratio, int cells) {
    const double center = stride * i + 0.5 * stride;  // continuous pixel coordinate
    const int c = static_cast<int>(std::floor(center * ratio / stride));
    return std::clamp(c, 0, cells - 1);
}

}  // namespace

Image cell_average(const Image& img, int rows, int cols, int stride) {
    Image out(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            double s = 0.0;
            int n = 0;
            for (int r = stride * i; r < std::min(img.height(), stride * (i + 1)); ++r)
                for (int c = stride * j; c < std::min(img.width(), stride * (j + 1)); ++c, ++n) s += img(r, c);
            out(i, j) = n > 0 ? s / n : 0.0;
        }
    }
    return out;
}

ScaleSpaceResult scale_space_infer(const StereoPair& scene, const Dictionary& dict, const TuningMaps& tuning,
                                   const ScaleSpaceConfig& cfg, const Image* truth_dx, const Image* truth_dy) {
    if (cfg.scales.empty()) throw ConfigError("scale list is empty");
    for (std::size_t i = 0; i < cfg.scales.size(); ++i) {
        if (!(cfg.scales[i] > 0.0 && cfg.scales[i] <= 1.0)) throw ConfigError("scales must lie in (0, 1]");
        if (i > 0 && !(cfg.scales[i] < cfg.scales[i - 1])) throw ConfigError("scales must be strictly descending");
    }
    if (tuning.mode != TuningMode::Shared || tuning.grid.kind() != LabelKind::Disparity)
        throw ConfigError("scale-space inference needs shared disparity tuning maps");
    if (tuning.kernels != dict.count()) throw ConfigError("tuning table and dictionary disagree on K");
    if ((truth_dx == nullptr) != (truth_dy == nullptr)) throw ConfigError("give both ground-truth components or none");
    const int s = dict.stride();
    const CodeGeometry full = CodeGeometry::for_image(scene.height(), scene.width(), dict.kernel_size(), s);

    double limit = 0.0;
    for (double v : tuning.grid.col_values()) limit = std::max(limit, std::abs(v));
    for (double v : tuning.grid.row_values()) limit = std::max(limit, std::abs(v));

    const Encoder encoder(dict);
    std::vector<ScaleEstimate> est(cfg.scales.size());
    parallel_for(cfg.scales.size(), cfg.workers, [&](std::size_t i) {
        const int h = snapped(scene.height(), cfg.scales[i], s), w = snapped(scene.width(), cfg.scales[i], s);
        StereoPair scaled = scene;
        if (h != scene.height() || w != scene.width())
            scaled = StereoPair(resample(scene.left, h, w, Interpolation::Bicubic),
                                resample(scene.right, h, w, Interpolation::Bicubic));
        const NormalizedPair pre = preprocess_pair(scaled, cfg.preprocess);
        est[i].ratio_y = static_cast<double>(h) / scene.height();
        est[i].ratio_x = static_cast<double>(w) / scene.width();
        est[i].map = infer_map(binarize(encoder.encode(pre.pair, cfg.lca).code), tuning);
    });

    ScaleSpaceResult res;
    res.rows = full.rows - 1;
    res.cols = full.cols - 1;
    const std::size_t cells = static_cast<std::size_t>(res.rows) * res.cols;
    for (const auto& e : est) res.scales.push_back(0.5 * (e.ratio_x + e.ratio_y));
    res.dx.assign(cells, 0.0);
    res.dy.assign(cells, 0.0);
    res.scale_index.assign(cells, -1);
    res.active_count.assign(cells, 0);
    res.active_by_scale.assign(est.size(), std::vector<int>(cells, 0));

    Image gx, gy;
    if (truth_dx) {
        if (!truth_dx->same_shape(scene.left) || !truth_dy->same_shape(scene.left))
            throw DataError("ground-truth maps must match the scene size");
        gx = cell_average(*truth_dx, res.rows, res.cols, s);
        gy = cell_average(*truth_dy, res.rows, res.cols, s);
    }

    for (int i = 0; i < res.rows; ++i) {
        for (int j = 0; j < res.cols; ++j) {
            const std::size_t cell = static_cast<std::size_t>(i) * res.cols + j;
            // Estimate at every scale in full-resolution px.
            std::vector<double> ex(est.size()), ey(est.size());
            std::vector<int> active(est.size());
            for (std::size_t k = 0; k < est.size(); ++k) {
                const LabelMap& m = est[k].map;
                const int si = scaled_cell(i, s, est[k].ratio_y, m.rows), sj = scaled_cell(j, s, est[k].ratio_x, m.cols);
                const std::size_t idx = static_cast<std::size_t>(si) * m.cols + sj;
                const DisparityLabel d = tuning.grid.disparity_label(m.label[idx]);
                ex[k] = d.dx / est[k].ratio_x;
                ey[k] = d.dy / est[k].ratio_y;
                active[k] = m.active_count[idx];
                res.active_by_scale[k][cell] = active[k];
            }
            int chosen = -1;
            if (truth_dx) {
                for (std::size_t k = 0; k < est.size() && chosen < 0; ++k) {
                    const bool in_range = std::abs(gx(i, j) * est[k].ratio_x) <= limit + 1e-9 &&
                                          std::abs(gy(i, j) * est[k].ratio_y) <= limit + 1e-9;
                    if (in_range && active[k] > 0) chosen = static_cast<int>(k);
                }
            } else {
                // Coarse to fine: refine while the current estimate, mapped to
                // the finer scale, stays inside the range and the finer
                // estimate is not pinned at the edge of the grid.
                for (int k = static_cast<int>(est.size()) - 1; k >= 0; --k) {
                    if (active[k] == 0) continue;
                    const bool own_inside = std::abs(ex[k] * est[k].ratio_x) < limit - 1e-9 &&
                                            std::abs(ey[k] * est[k].ratio_y) < limit - 1e-9;
                    if (chosen < 0) {
                        chosen = k;
                        continue;
                    }
                    const bool predicted_inside = std::abs(ex[chosen] * est[k].ratio_x) <= limit + 1e-9 &&
                                                  std::abs(ey[chosen] * est[k].ratio_y) <= limit + 1e-9;
                    if (!predicted_inside) break;
                    if (own_inside) chosen = k;
                }
            }
            if (chosen >= 0) {
                res.scale_index[cell] = chosen;
                res.dx[cell] = ex[chosen];
                res.dy[cell] = ey[chosen];
                res.active_count[cell] = active[chosen];
            }
        }
    }
    return res;
}

}  // namespace slca
