#include "slca/gabor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "slca/errors.hpp"

namespace slca {

double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * M_PI);  // [-pi, pi]
    return a <= -M_PI ? a + 2.0 * M_PI : a;
}

double GaborParams::operator()(double x, double y) const {
    const double c = std::cos(phi), s = std::sin(phi);
    const double xp = (x - x0) * c + (y - y0) * s;
    const double yp = -(x - x0) * s + (y - y0) * c;
    const double ct = std::cos(theta), st = std::sin(theta), s2 = std::sin(2.0 * theta);
    const double ix = 1.0 / (sigma_x * sigma_x), iy = 1.0 / (sigma_y * sigma_y);
    const double alpha = 0.5 * (ct * ct * ix + st * st * iy);
    const double beta = 0.25 * s2 * (iy - ix);
    const double gamma = 0.5 * (st * st * ix + ct * ct * iy);
    return a + b * std::exp(-(alpha * xp * xp + 2.0 * beta * xp * yp + gamma * yp * yp)) *
                   std::cos(2.0 * M_PI * f * xp + kappa);
}

Image render_gabor(const GaborParams& p, int height, int width) {
    Image img(height, width);
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c) img(r, c) = p(c, r);
    return img;
}

GaborParams canonical(GaborParams p) {
    if (p.f < 0.0) {
        p.f = -p.f;
        p.kappa = -p.kappa;
    }
    if (p.b < 0.0) {
        p.b = -p.b;
        p.kappa += M_PI;
    }
    p.phi = std::fmod(p.phi, 2.0 * M_PI);
    if (p.phi < 0.0) p.phi += 2.0 * M_PI;
    if (p.phi >= M_PI) {
        p.phi -= M_PI;
        p.kappa = -p.kappa;
    }
    if (p.phi >= M_PI) p.phi = 0.0;  // rounding at the upper edge
    p.theta = std::remainder(p.theta, M_PI);  // [-pi/2, pi/2]
    if (p.theta >= M_PI / 4) {
        p.theta -= M_PI / 2;
        std::swap(p.sigma_x, p.sigma_y);
    } else if (p.theta < -M_PI / 4) {
        p.theta += M_PI / 2;
        std::swap(p.sigma_x, p.sigma_y);
    }
    p.kappa = wrap_angle(p.kappa);
    return p;
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
double logit(double t) {
    t = std::clamp(t, 1e-6, 1.0 - 1e-6);
    return std::log(t / (1.0 - t));
}

// Unconstrained coordinates: a, b, x0, y0, phi, sx, sy, g, kappa[, theta].
// Widths map into [sigma_min, sigma_max]; f maps into [f_min, f_max] with
// f_min = 0.25 / min(sigma) under the cycle bound.
struct Transform {
    GaborFitOptions opts;

    int size() const { return opts.lock_theta ? 9 : 10; }

    GaborParams decode(const Eigen::VectorXd& z) const {
        GaborParams p;
        p.a = z[0];
        p.b = z[1];
        p.x0 = z[2];
        p.y0 = z[3];
        p.phi = z[4];
        const double span = opts.sigma_max - opts.sigma_min;
        p.sigma_x = opts.sigma_min + span * sigmoid(z[5]);
        p.sigma_y = opts.sigma_min + span * sigmoid(z[6]);
        const double lo = f_floor(p);
        p.f = lo + (opts.f_max - lo) * sigmoid(z[7]);
        p.kappa = z[8];
        p.theta = opts.lock_theta ? 0.0 : z[9];
        return p;
    }

    Eigen::VectorXd encode(const GaborParams& p) const {
        Eigen::VectorXd z(size());
        const double span = opts.sigma_max - opts.sigma_min;
        z.head<9>() << p.a, p.b, p.x0, p.y0, p.phi, logit((p.sigma_x - opts.sigma_min) / span),
            logit((p.sigma_y - opts.sigma_min) / span), 0.0, p.kappa;
        const double lo = f_floor(p);
        z[7] = logit((p.f - lo) / (opts.f_max - lo));
        if (!opts.lock_theta) z[9] = p.theta;
        return z;
    }

    double f_floor(const GaborParams& p) const {
        return opts.min_cycles ? std::min(0.25 / std::min(p.sigma_x, p.sigma_y), opts.f_max * (1 - 1e-9)) : 0.0;
    }
};

struct Residuals {
    using Scalar = double;
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

    const Image* kernel;
    const Transform* transform;

    int inputs() const { return transform->size(); }
    int values() const { return static_cast<int>(kernel->size()); }

    int operator()(const Eigen::VectorXd& z, Eigen::VectorXd& out) const {
        const GaborParams p = transform->decode(z);
        for (int r = 0; r < kernel->height(); ++r)
            for (int c = 0; c < kernel->width(); ++c) out[r * kernel->width() + c] = p(c, r) - (*kernel)(r, c);
        return 0;
    }
};

// Dominant non-DC frequency of the zero-mean kernel on a 2x zero-padded grid.
void spectral_peak(const Image& d, double& f, double& phi) {
    const int h = d.height(), w = d.width();
    const int nu = 2 * w, nv = 2 * h;
    double best = -1.0;
    f = 0.1;
    phi = 0.0;
    for (int v = -nv / 2; v < nv / 2; ++v) {
        for (int u = 0; u <= nu / 2; ++u) {
            if (u == 0 && v <= 0) continue;
            const double fx = static_cast<double>(u) / nu, fy = static_cast<double>(v) / nv;
            double re = 0.0, im = 0.0;
            for (int r = 0; r < h; ++r)
                for (int c = 0; c < w; ++c) {
                    const double ang = -2.0 * M_PI * (fx * c + fy * r);
                    re += d(r, c) * std::cos(ang);
                    im += d(r, c) * std::sin(ang);
                }
            const double mag = re * re + im * im;
            if (mag > best) {
                best = mag;
                f = std::hypot(fx, fy);
                phi = std::atan2(fy, fx);
            }
        }
    }
}

}  // namespace

GaborFit fit_gabor(const Image& kernel, const GaborFitOptions& opts) {
    if (kernel.empty()) throw DataError("empty kernel");
    if (!(opts.sigma_min > 0.0 && opts.sigma_max > opts.sigma_min && opts.f_max > 0.0))
        throw ConfigError("invalid Gabor fit bounds");
    const double mean = kernel.mean();
    double sst = 0.0;
    double ss = 0.0;
    for (double v : kernel.values()) {
        sst += (v - mean) * (v - mean);
        ss += v * v;
    }
    if (!(sst > 1e-20 * ss)) throw DataError("kernel has zero variance");

    Image d = kernel;
    for (double& v : d.values()) v -= mean;
    double wsum = 0.0, xc = 0.0, yc = 0.0, peak = 0.0;
    for (int r = 0; r < d.height(); ++r)
        for (int c = 0; c < d.width(); ++c) {
            const double e = d(r, c) * d(r, c);
            wsum += e;
            xc += e * c;
            yc += e * r;
            peak = std::max(peak, std::abs(d(r, c)));
        }
    xc /= wsum;
    yc /= wsum;
    double spread = 0.0;
    for (int r = 0; r < d.height(); ++r)
        for (int c = 0; c < d.width(); ++c) spread += d(r, c) * d(r, c) * ((c - xc) * (c - xc) + (r - yc) * (r - yc));
    // Squared Gaussian envelope has per-axis variance sigma^2 / 2.
    const double sigma0 = std::clamp(std::sqrt(spread / wsum), opts.sigma_min * 1.05, opts.sigma_max * 0.95);
    double f0, phi0;
    spectral_peak(d, f0, phi0);

    const Transform tf{opts};
    const Residuals fn{&kernel, &tf};
    GaborFit best;
    best.sse = std::numeric_limits<double>::infinity();
    for (int i = 0; i < opts.orientation_starts; ++i) {
        for (int j = 0; j < opts.phase_starts; ++j) {
            GaborParams p;
            p.a = mean;
            p.b = peak;
            p.x0 = xc;
            p.y0 = yc;
            p.phi = phi0 + M_PI * i / opts.orientation_starts;
            p.theta = 0.0;
            p.sigma_x = sigma0;
            p.sigma_y = sigma0;
            p.f = std::clamp(f0, tf.f_floor(p) + 1e-3, opts.f_max * 0.95);
            p.kappa = 2.0 * M_PI * j / opts.phase_starts;
            Eigen::VectorXd z = tf.encode(p);

            Eigen::NumericalDiff<Residuals> nd(fn);
            Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Residuals>, double> lm(nd);
            lm.parameters.maxfev = 400 * (tf.size() + 1);
            lm.parameters.xtol = 1e-12;
            lm.parameters.ftol = 1e-14;
            lm.minimize(z);

            Eigen::VectorXd res(fn.values());
            fn(z, res);
            const double sse = res.squaredNorm();
            if (std::isfinite(sse) && sse < best.sse) {
                best.sse = sse;
                best.params = canonical(tf.decode(z));
            }
        }
    }
    if (!std::isfinite(best.sse)) throw DataError("Gabor fit failed to converge from every start");
    best.r2 = 1.0 - best.sse / sst;
    return best;
}

}  // namespace slca
