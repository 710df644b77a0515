#pragma once

#include <vector>

#include <json.hpp>

namespace slca {

struct ErrorSample {
    int active_count = 0;
    double abs_error = 0.0;
};

// Bins over active-coefficient count; bin j covers counts from lower[j] up
// to lower[j+1] - 1.
struct ErrorPredictor {
    std::vector<int> lower;
    std::vector<std::size_t> sizes;
    std::vector<double> percentiles;          // e.g. 50, 75, 80
    std::vector<std::vector<double>> values;  // [bin][percentile]
    std::size_t min_per_bin = 0;

    std::size_t bin_of(int active_count) const;
    nlohmann::json to_json() const;
    static ErrorPredictor from_json(const nlohmann::json& j);
};

// Greedy bins in count order, each with at least min_per_bin samples; equal
// counts are never split and a short tail joins the last bin. Nearest-rank
// percentiles.
ErrorPredictor build_error_predictor(std::vector<ErrorSample> samples, std::size_t min_per_bin,
                                     const std::vector<double>& percentiles);

double predict_error(const ErrorPredictor& pred, int active_count, double percentile);

// Nearest-rank percentile of an ascending sequence.
double nearest_rank(const std::vector<double>& sorted, double percentile);

}  // namespace slca
