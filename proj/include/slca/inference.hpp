#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "slca/lca.hpp"
#include "slca/tuning.hpp"

namespace slca {

struct Posterior {
    std::vector<double> scores;  // log-likelihood per grid label
    std::size_t argmax = 0;      // lowest index among ties
    int active_count = 0;
};

// Block bits ordered (k, dm, dn): bits[k * 4 + dm * 2 + dn].
Posterior infer_block(std::span<const std::uint8_t> bits, const TuningMaps& tuning);
// 2 x 2 block with top-left cell (m, n).
Posterior infer(const BinaryCode& code, int m, int n, const TuningMaps& tuning);

struct LabelMap {
    int rows = 0;  // M - 1
    int cols = 0;  // N - 1
    std::vector<std::size_t> label;
    std::vector<int> active_count;

    std::size_t at(int r, int c) const { return label[static_cast<std::size_t>(r) * cols + c]; }
};

LabelMap infer_map(const BinaryCode& code, const TuningMaps& tuning);

// Per-location readout over the centered region of the code.
Posterior infer_surface(const BinaryCode& code, const TuningMaps& tuning);

}  // namespace slca
