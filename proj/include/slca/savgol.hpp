#pragma once

#include <Eigen/Core>

namespace slca {

// Local least-squares fit of a total-degree `degree` polynomial over a
// width x width window, evaluated at the window center. Windows are
// truncated at the borders (degree lowered if the truncated window cannot
// support it); wrap_cols treats the column axis as periodic.
Eigen::MatrixXd savitzky_golay_2d(const Eigen::MatrixXd& map, int degree = 3, int width = 5, bool wrap_cols = false);

// Weights w with output = sum w(i, j) * map(r0 + i, c0 + j) for a full
// interior window centered on the output pixel.
Eigen::MatrixXd savitzky_golay_kernel(int degree, int width);

}  // namespace slca
