#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

namespace slca {

struct DisparityLabel {
    double dx = 0.0;  // px; positive: right-image content shifted left (crossed)
    double dy = 0.0;  // px; positive: right-image content shifted up
};

struct SurfaceLabel {
    double tilt = 0.0;   // degrees in [0, 360)
    double slant = 0.0;  // degrees in [0, 90)
};

enum class LabelKind { Disparity, Surface };

// Rectangular label raster. Label i = (col_values[i % cols], row_values[i / cols]):
// for disparity the columns are dx and the rows dy; for surfaces the columns
// are tilt and the rows slant. Column-fastest ordering is part of the file
// format.
class LabelGrid {
public:
    LabelGrid() = default;
    LabelGrid(LabelKind kind, std::vector<double> col_values, std::vector<double> row_values);

    // {lo, lo+step, ..., hi} on both axes.
    static LabelGrid disparity(double lo, double hi, double step);
    static LabelGrid surface(std::vector<double> tilts, std::vector<double> slants);
    static LabelGrid default_disparity() { return disparity(-6.0, 6.0, 0.5); }
    static LabelGrid default_surface();

    LabelKind kind() const noexcept { return kind_; }
    std::size_t size() const noexcept { return col_values_.size() * row_values_.size(); }
    int cols() const noexcept { return static_cast<int>(col_values_.size()); }
    int rows() const noexcept { return static_cast<int>(row_values_.size()); }
    const std::vector<double>& col_values() const noexcept { return col_values_; }
    const std::vector<double>& row_values() const noexcept { return row_values_; }

    std::array<double, 2> label(std::size_t i) const;
    DisparityLabel disparity_label(std::size_t i) const;
    SurfaceLabel surface_label(std::size_t i) const;

    // Exact match within 1e-9; throws ConfigError when absent.
    std::size_t index_of(std::array<double, 2> value) const;

    // Columns wrap around (tilt, period 360 degrees).
    bool periodic_cols() const noexcept { return kind_ == LabelKind::Surface; }

    nlohmann::json to_json() const;
    static LabelGrid from_json(const nlohmann::json& j);
    friend bool operator==(const LabelGrid&, const LabelGrid&) = default;

private:
    LabelKind kind_ = LabelKind::Disparity;
    std::vector<double> col_values_;
    std::vector<double> row_values_;
};

std::string to_string(LabelKind kind);

}  // namespace slca
