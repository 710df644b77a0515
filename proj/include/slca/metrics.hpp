#pragma once

#include <array>
#include <vector>

namespace slca {

using LabelValue = std::array<double, 2>;

// Mean Euclidean distance between matched estimates and truths.
double mae(const std::vector<LabelValue>& estimates, const std::vector<LabelValue>& truths);

// Jammalamadaka-SenGupta circular correlation. With axial_b the angles in b
// are doubled first (period-pi orientations against period-2pi angles).
double circular_correlation(const std::vector<double>& a, const std::vector<double>& b, bool axial_b = false);

}  // namespace slca
