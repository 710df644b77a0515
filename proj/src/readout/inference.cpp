#include "slca/inference.hpp"

#include <cmath>

#include "slca/errors.hpp"

namespace slca {

namespace {

std::size_t first_argmax(const std::vector<double>& scores) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i;
    return best;
}

}  // namespace

Posterior infer_block(std::span<const std::uint8_t> bits, const TuningMaps& tuning) {
    if (tuning.mode != TuningMode::Shared) throw ConfigError("block inference needs shared tuning maps");
    if (bits.size() != static_cast<std::size_t>(tuning.kernels) * 4) throw ConfigError("block must hold 4 K bits");
    const std::size_t L = tuning.labels();
    Posterior post;
    post.scores.assign(L, 0.0);
    for (int k = 0; k < tuning.kernels; ++k) {
        int ones = 0;
        for (int i = 0; i < 4; ++i) ones += bits[static_cast<std::size_t>(k) * 4 + i] ? 1 : 0;
        post.active_count += ones;
        for (std::size_t y = 0; y < L; ++y) {
            const double p = tuning.p(static_cast<std::size_t>(k), y);
            post.scores[y] += ones * std::log(p) + (4 - ones) * std::log1p(-p);
        }
    }
    post.argmax = first_argmax(post.scores);
    return post;
}

Posterior infer(const BinaryCode& code, int m, int n, const TuningMaps& tuning) {
    if (m < 0 || n < 0 || m + 1 >= code.rows || n + 1 >= code.cols) throw ConfigError("block outside the feature map");
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(code.kernels) * 4);
    for (int k = 0; k < code.kernels; ++k)
        for (int dm = 0; dm < 2; ++dm)
            for (int dn = 0; dn < 2; ++dn) bits[static_cast<std::size_t>(k) * 4 + dm * 2 + dn] = code(k, m + dm, n + dn);
    return infer_block(bits, tuning);
}

LabelMap infer_map(const BinaryCode& code, const TuningMaps& tuning) {
    if (tuning.mode != TuningMode::Shared) throw ConfigError("label maps need shared tuning maps");
    if (code.kernels != tuning.kernels) throw ConfigError("code kernel count does not match the tuning table");
    LabelMap out;
    out.rows = code.rows - 1;
    out.cols = code.cols - 1;
    for (int m = 0; m < out.rows; ++m) {
        for (int n = 0; n < out.cols; ++n) {
            const Posterior p = infer(code, m, n, tuning);
            out.label.push_back(p.argmax);
            out.active_count.push_back(p.active_count);
        }
    }
    return out;
}

Posterior infer_surface(const BinaryCode& code, const TuningMaps& tuning) {
    if (tuning.mode != TuningMode::PerLocation) throw ConfigError("surface inference needs per-location tuning maps");
    if (code.kernels != tuning.kernels) throw ConfigError("code kernel count does not match the tuning table");
    if (code.rows < tuning.region_rows || code.cols < tuning.region_cols)
        throw DataError("feature map smaller than the tuning region");
    const int r0 = region_origin(code.rows, tuning.region_rows), c0 = region_origin(code.cols, tuning.region_cols);
    const std::size_t L = tuning.labels();
    Posterior post;
    post.scores.assign(L, 0.0);
    for (int k = 0; k < tuning.kernels; ++k) {
        for (int r = 0; r < tuning.region_rows; ++r) {
            for (int c = 0; c < tuning.region_cols; ++c) {
                const bool on = code(k, r0 + r, c0 + c) != 0;
                post.active_count += on ? 1 : 0;
                const std::size_t e = tuning.entry(k, r, c);
                for (std::size_t y = 0; y < L; ++y) {
                    const double p = tuning.p(e, y);
                    post.scores[y] += on ? std::log(p) : std::log1p(-p);
                }
            }
        }
    }
    post.argmax = first_argmax(post.scores);
    return post;
}

}  // namespace slca
