#include "slca/metrics.hpp"

#include <cmath>

#include "slca/errors.hpp"

namespace slca {

double mae(const std::vector<LabelValue>& est, const std::vector<LabelValue>& truth) {
    if (est.size() != truth.size()) throw ConfigError("estimate and truth lists differ in length");
    if (est.empty()) throw DataError("no samples");
    double s = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i) s += std::hypot(est[i][0] - truth[i][0], est[i][1] - truth[i][1]);
    return s / static_cast<double>(est.size());
}

namespace {

double circular_mean(const std::vector<double>& v) {
    double s = 0.0, c = 0.0;
    for (double x : v) {
        s += std::sin(x);
        c += std::cos(x);
    }
    return std::atan2(s, c);
}

}  // namespace

double circular_correlation(const std::vector<double>& a, const std::vector<double>& b_in, bool axial_b) {
    if (a.size() != b_in.size()) throw ConfigError("angle lists differ in length");
    if (a.size() < 3) throw DataError("circular correlation needs at least three pairs");
    std::vector<double> b = b_in;
    if (axial_b)
        for (double& x : b) x *= 2.0;
    const double ma = circular_mean(a), mb = circular_mean(b);
    double num = 0.0, sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double u = std::sin(a[i] - ma), v = std::sin(b[i] - mb);
        num += u * v;
        sa += u * u;
        sb += v * v;
    }
    const double floor = 1e-20 * static_cast<double>(a.size());
    if (!(sa > floor) || !(sb > floor)) throw DataError("zero circular variance");
    return num / std::sqrt(sa * sb);
}

}  // namespace slca
