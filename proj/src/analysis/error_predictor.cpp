#include "slca/error_predictor.hpp"

#include <algorithm>
#include <cmath>

#include "slca/errors.hpp"

namespace slca {

double nearest_rank(const std::vector<double>& sorted, double percentile) {
    if (sorted.empty()) throw DataError("percentile of an empty set");
    if (!(percentile > 0.0 && percentile <= 100.0)) throw ConfigError("percentile must lie in (0, 100]");
    const double n = static_cast<double>(sorted.size());
    // Guard against 75/100*n landing a hair above an integer.
    const std::size_t rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * n - 1e-9));
    return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

ErrorPredictor build_error_predictor(std::vector<ErrorSample> samples, std::size_t min_per_bin,
                                     const std::vector<double>& percentiles) {
    if (min_per_bin < 1) throw ConfigError("min_per_bin must be >= 1");
    if (percentiles.empty()) throw ConfigError("no percentiles requested");
    for (double p : percentiles) nearest_rank({0.0}, p);  // validates the range
    if (samples.size() < min_per_bin) throw DataError("not enough samples for one bin");
    std::sort(samples.begin(), samples.end(), [](const ErrorSample& x, const ErrorSample& y) {
        return x.active_count != y.active_count ? x.active_count < y.active_count : x.abs_error < y.abs_error;
    });

    std::vector<std::pair<std::size_t, std::size_t>> ranges;  // [begin, end)
    std::size_t begin = 0;
    for (std::size_t i = 0; i < samples.size();) {
        std::size_t j = i;
        while (j < samples.size() && samples[j].active_count == samples[i].active_count) ++j;
        if (j - begin >= min_per_bin) {
            ranges.emplace_back(begin, j);
            begin = j;
        }
        i = j;
    }
    if (begin < samples.size()) {
        if (ranges.empty()) ranges.emplace_back(begin, samples.size());
        else ranges.back().second = samples.size();
    }

    ErrorPredictor pred;
    pred.min_per_bin = min_per_bin;
    pred.percentiles = percentiles;
    for (const auto& [b, e] : ranges) {
        std::vector<double> err;
        for (std::size_t i = b; i < e; ++i) err.push_back(samples[i].abs_error);
        std::sort(err.begin(), err.end());
        std::vector<double> row;
        for (double p : percentiles) row.push_back(nearest_rank(err, p));
        pred.lower.push_back(samples[b].active_count);
        pred.sizes.push_back(e - b);
        pred.values.push_back(std::move(row));
    }
    return pred;
}

std::size_t ErrorPredictor::bin_of(int active_count) const {
    if (lower.empty()) throw ConfigError("empty error predictor");
    const auto it = std::upper_bound(lower.begin(), lower.end(), active_count);
    return it == lower.begin() ? 0 : static_cast<std::size_t>(it - lower.begin()) - 1;
}

double predict_error(const ErrorPredictor& pred, int active_count, double percentile) {
    for (std::size_t j = 0; j < pred.percentiles.size(); ++j)
        if (std::abs(pred.percentiles[j] - percentile) < 1e-9) return pred.values[pred.bin_of(active_count)][j];
    throw ConfigError("percentile " + std::to_string(percentile) + " is not stored in the predictor");
}

nlohmann::json ErrorPredictor::to_json() const {
    return {{"lower", lower}, {"sizes", sizes}, {"percentiles", percentiles}, {"values", values},
            {"min_per_bin", min_per_bin}};
}

ErrorPredictor ErrorPredictor::from_json(const nlohmann::json& j) {
    ErrorPredictor p;
    try {
        p.lower = j.at("lower").get<std::vector<int>>();
        p.sizes = j.at("sizes").get<std::vector<std::size_t>>();
        p.percentiles = j.at("percentiles").get<std::vector<double>>();
        p.values = j.at("values").get<std::vector<std::vector<double>>>();
        p.min_per_bin = j.at("min_per_bin").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed error predictor: ") + e.what());
    }
    if (p.lower.empty() || p.values.size() != p.lower.size() || p.sizes.size() != p.lower.size())
        throw DataError("malformed error predictor: inconsistent bin tables");
    for (std::size_t i = 1; i < p.lower.size(); ++i)
        if (p.lower[i] <= p.lower[i - 1]) throw DataError("malformed error predictor: edges not increasing");
    return p;
}

}  // namespace slca
