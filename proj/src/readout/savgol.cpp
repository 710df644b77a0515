#include "slca/savgol.hpp"

#include <cmath>
#include <map>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "slca/errors.hpp"

namespace slca {

namespace {

// Least-squares weights for a polynomial fit over the offsets dy in
// [r0, r1], dx in [c0, c1] relative to the evaluated pixel. Degree drops
// until the design matrix has full column rank.
Eigen::MatrixXd window_weights(int degree, int r0, int r1, int c0, int c1) {
    const int h = r1 - r0 + 1, w = c1 - c0 + 1;
    for (int d = degree; d >= 0; --d) {
        std::vector<std::pair<int, int>> terms;  // (power of dy, power of dx)
        for (int total = 0; total <= d; ++total)
            for (int py = total; py >= 0; --py) terms.emplace_back(py, total - py);
        if (static_cast<int>(terms.size()) > h * w) continue;
        Eigen::MatrixXd V(h * w, terms.size());
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j)
                for (std::size_t t = 0; t < terms.size(); ++t)
                    V(i * w + j, t) = std::pow(r0 + i, terms[t].first) * std::pow(c0 + j, terms[t].second);
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(V);
        if (cod.rank() < static_cast<Eigen::Index>(terms.size())) continue;
        // The constant term is the fitted value at the origin.
        const Eigen::RowVectorXd row = cod.pseudoInverse().row(0);
        return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(row.data(), h, w);
    }
    throw ConfigError("degenerate Savitzky-Golay window");
}

void check(int degree, int width) {
    if (width < 1 || width % 2 == 0) throw ConfigError("Savitzky-Golay width must be odd");
    if (degree < 0 || degree >= width) throw ConfigError("Savitzky-Golay degree must be below the width");
}

}  // namespace

Eigen::MatrixXd savitzky_golay_kernel(int degree, int width) {
    check(degree, width);
    const int h = width / 2;
    return window_weights(degree, -h, h, -h, h);
}

Eigen::MatrixXd savitzky_golay_2d(const Eigen::MatrixXd& map, int degree, int width, bool wrap_cols) {
    check(degree, width);
    if (map.size() == 0) throw ConfigError("empty map");
    const int R = static_cast<int>(map.rows()), C = static_cast<int>(map.cols()), h = width / 2;
    // Wrapping a period shorter than the window would count columns twice.
    const bool wrap = wrap_cols && C >= width;
    std::map<std::tuple<int, int, int, int>, Eigen::MatrixXd> cache;
    Eigen::MatrixXd out(R, C);
    for (int r = 0; r < R; ++r) {
        for (int c = 0; c < C; ++c) {
            const int r0 = std::max(-h, -r), r1 = std::min(h, R - 1 - r);
            const int c0 = wrap ? -h : std::max(-h, -c), c1 = wrap ? h : std::min(h, C - 1 - c);
            auto key = std::make_tuple(r0, r1, c0, c1);
            auto it = cache.find(key);
            if (it == cache.end()) it = cache.emplace(key, window_weights(degree, r0, r1, c0, c1)).first;
            const Eigen::MatrixXd& w = it->second;
            double v = 0.0;
            for (int i = r0; i <= r1; ++i)
                for (int j = c0; j <= c1; ++j) v += w(i - r0, j - c0) * map(r + i, ((c + j) % C + C) % C);
            out(r, c) = v;
        }
    }
    return out;
}

}  // namespace slca
