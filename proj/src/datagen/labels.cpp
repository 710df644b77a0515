#include "slca/labels.hpp"

#include <cmath>
#include <set>

#include "slca/errors.hpp"

namespace slca {

LabelGrid::LabelGrid(LabelKind kind, std::vector<double> col_values, std::vector<double> row_values)
    : kind_(kind), col_values_(std::move(col_values)), row_values_(std::move(row_values)) {
    if (col_values_.empty() || row_values_.empty()) throw ConfigError("label grid axes must be non-empty");
    for (const auto* axis : {&col_values_, &row_values_}) {
        std::set<double> seen(axis->begin(), axis->end());
        if (seen.size() != axis->size()) throw ConfigError("label grid axis values must be unique");
    }
    if (kind_ == LabelKind::Surface) {
        for (double t : col_values_)
            if (t < 0.0 || t >= 360.0) throw ConfigError("tilt must lie in [0, 360)");
        for (double s : row_values_)
            if (s < 0.0 || s >= 90.0) throw ConfigError("slant must lie in [0, 90)");
    }
}

LabelGrid LabelGrid::disparity(double lo, double hi, double step) {
    if (!(step > 0.0) || hi < lo) throw ConfigError("invalid disparity grid range");
    const double span = (hi - lo) / step;
    const long n = std::lround(span);
    if (std::abs(span - n) > 1e-9) throw ConfigError("disparity grid step does not divide the range");
    std::vector<double> values;
    for (long i = 0; i <= n; ++i) values.push_back(lo + step * i);
    return LabelGrid(LabelKind::Disparity, values, values);
}

LabelGrid LabelGrid::surface(std::vector<double> tilts, std::vector<double> slants) {
    return LabelGrid(LabelKind::Surface, std::move(tilts), std::move(slants));
}

LabelGrid LabelGrid::default_surface() {
    std::vector<double> tilts;
    for (int t = 0; t < 36; ++t) tilts.push_back(10.0 * t);
    return surface(tilts, {0.0, 6.0, 24.3, 38.2, 48.2, 55.2});
}

std::array<double, 2> LabelGrid::label(std::size_t i) const {
    if (i >= size()) throw ConfigError("label index out of range");
    return {col_values_[i % col_values_.size()], row_values_[i / col_values_.size()]};
}

DisparityLabel LabelGrid::disparity_label(std::size_t i) const {
    const auto v = label(i);
    return {v[0], v[1]};
}

SurfaceLabel LabelGrid::surface_label(std::size_t i) const {
    const auto v = label(i);
    return {v[0], v[1]};
}

std::size_t LabelGrid::index_of(std::array<double, 2> value) const {
    auto find = [](const std::vector<double>& axis, double v) -> std::size_t {
        for (std::size_t i = 0; i < axis.size(); ++i)
            if (std::abs(axis[i] - v) < 1e-9) return i;
        throw ConfigError("label value " + std::to_string(v) + " is not on the grid");
    };
    return find(row_values_, value[1]) * col_values_.size() + find(col_values_, value[0]);
}

std::string to_string(LabelKind kind) { return kind == LabelKind::Disparity ? "disparity" : "surface"; }

nlohmann::json LabelGrid::to_json() const {
    return {{"kind", to_string(kind_)}, {"cols", col_values_}, {"rows", row_values_}};
}

LabelGrid LabelGrid::from_json(const nlohmann::json& j) {
    try {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind != "disparity" && kind != "surface") throw ConfigError("unknown label grid kind " + kind);
        return LabelGrid(kind == "disparity" ? LabelKind::Disparity : LabelKind::Surface,
                         j.at("cols").get<std::vector<double>>(), j.at("rows").get<std::vector<double>>());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed label grid: ") + e.what());
    }
}

}  // namespace slca
