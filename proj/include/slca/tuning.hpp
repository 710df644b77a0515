#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "slca/labels.hpp"
#include "slca/lca.hpp"

namespace slca {

enum class TuningMode { Shared, PerLocation };

// Activation probabilities per kernel (and per region cell in per-location
// mode) and label. Entry index: shared (k, label); per-location
// ((k * region_rows + r) * region_cols + c, label), label fastest.
struct TuningMaps {
    TuningMode mode = TuningMode::Shared;
    LabelGrid grid;
    int kernels = 0;
    int region_rows = 1;
    int region_cols = 1;
    int margin = 0;                    // shared mode: border cells skipped
    std::vector<double> probability;   // clamped to [epsilon, 1 - epsilon]
    std::vector<std::uint64_t> ones;   // raw active tallies, same layout
    std::vector<std::uint64_t> observations;  // per label; every entry of a label sees the same count
    bool smoothed = false;

    std::size_t labels() const noexcept { return grid.size(); }
    std::size_t cells() const noexcept { return static_cast<std::size_t>(region_rows) * region_cols; }
    std::size_t entry(int k, int r = 0, int c = 0) const noexcept {
        return (static_cast<std::size_t>(k) * region_rows + r) * region_cols + c;
    }
    double p(std::size_t entry_index, std::size_t label) const { return probability[entry_index * labels() + label]; }
    double epsilon(std::size_t label) const { return 0.5 / static_cast<double>(observations[label]); }
};

// Streaming tally; add codes in any order, then finalize.
class TuningAccumulator {
public:
    // Shared mode pools all feature-map cells at least `margin` cells from the border.
    static TuningAccumulator shared(const LabelGrid& grid, int kernels, int margin = 1);
    // Per-location mode keeps a region_rows x region_cols window centered at (M/2, N/2).
    static TuningAccumulator per_location(const LabelGrid& grid, int kernels, int region_rows = 7,
                                          int region_cols = 7);

    void add(std::size_t label, const BinaryCode& code);
    void merge(const TuningAccumulator& other);
    TuningMaps finalize() const;

private:
    TuningMaps maps_;
};

// Convenience wrappers; codes[i] holds the training codes for grid label i.
TuningMaps estimate_tuning_shared(const std::vector<std::vector<BinaryCode>>& codes, const LabelGrid& grid,
                                  int margin = 1);
TuningMaps estimate_tuning_perloc(const std::vector<std::vector<BinaryCode>>& codes, const LabelGrid& grid,
                                  int region_rows = 7, int region_cols = 7);

// Top-left cell of the centered region_rows x region_cols window.
int region_origin(int extent, int region) noexcept;

// Smooths every per-entry map over the label grid (rows x cols of the grid)
// with savitzky_golay_2d, wrapping periodic axes, then re-clamps.
TuningMaps smooth_tuning(const TuningMaps& maps, int degree = 3, int width = 5);

void save_tuning(const std::filesystem::path& path, const TuningMaps& maps, nlohmann::json metadata = {});
TuningMaps load_tuning(const std::filesystem::path& path, nlohmann::json* metadata = nullptr);

std::string to_string(TuningMode mode);

}  // namespace slca
