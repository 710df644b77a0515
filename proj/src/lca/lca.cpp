#include "slca/lca.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <mutex>
#include <cmath>
#include <string>

#include "slca/errors.hpp"

namespace slca {

void LcaConfig::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
    if (!(step > 0.0 && step <= 1.0)) throw ConfigError("step must lie in (0, 1]");
    if (iterations < 1) throw ConfigError("iterations must be >= 1");
    if (!(tolerance >= 0.0)) throw ConfigError("tolerance must be >= 0");
}

CodeGeometry CodeGeometry::for_image(int height, int width, int kernel_size, int stride) {
    if (stride < 1 || kernel_size % stride != 0) throw ConfigError("stride must divide the kernel size");
    if (height < stride || width < stride || height % stride != 0 || width % stride != 0)
        throw DataError("image dimensions " + std::to_string(height) + "x" + std::to_string(width) +
                        " are not multiples of the stride " + std::to_string(stride));
    CodeGeometry g;
    g.height = height;
    g.width = width;
    g.kernel_size = kernel_size;
    g.stride = stride;
    g.rows = height / stride + kernel_size / stride - 1;
    g.cols = width / stride + kernel_size / stride - 1;
    return g;
}

CodeState::CodeState(const CodeGeometry& g, int kernels)
    : geometry(g),
      u(Eigen::MatrixXd::Zero(g.positions(), kernels)),
      a(Eigen::MatrixXd::Zero(g.positions(), kernels)) {}

std::size_t BinaryCode::active_count() const {
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

double threshold(double u, double lambda) noexcept { return u > lambda ? u : 0.0; }

Eigen::MatrixXd extract_patches(const StereoPair& pair, const CodeGeometry& g) {
    const int ks = g.kernel_size, P = ks * ks;
    Eigen::MatrixXd patches = Eigen::MatrixXd::Zero(2 * P, g.positions());
    for (int m = 0; m < g.rows; ++m) {
        for (int n = 0; n < g.cols; ++n) {
            double* col = patches.col(m * g.cols + n).data();
            const int top = g.top(m), left = g.left(n);
            const int i0 = std::max(0, -top), i1 = std::min(ks, g.height - top);
            const int j0 = std::max(0, -left), j1 = std::min(ks, g.width - left);
            for (int i = i0; i < i1; ++i) {
                const auto lrow = pair.left.row(top + i), rrow = pair.right.row(top + i);
                for (int j = j0; j < j1; ++j) {
                    col[i * ks + j] = lrow[left + j];
                    col[P + i * ks + j] = rrow[left + j];
                }
            }
        }
    }
    return patches;
}

namespace {

// Adds `weight * column` as a kernel window at position (m, n), cropped.
void stamp(StereoPair& out, const CodeGeometry& g, int m, int n, const double* column, double weight) {
    const int ks = g.kernel_size, P = ks * ks;
    const int top = g.top(m), left = g.left(n);
    const int i0 = std::max(0, -top), i1 = std::min(ks, g.height - top);
    const int j0 = std::max(0, -left), j1 = std::min(ks, g.width - left);
    for (int i = i0; i < i1; ++i) {
        auto lrow = out.left.row(top + i), rrow = out.right.row(top + i);
        for (int j = j0; j < j1; ++j) {
            lrow[left + j] += weight * column[i * ks + j];
            rrow[left + j] += weight * column[P + i * ks + j];
        }
    }
}

void check_geometry(const Dictionary& dict, const CodeGeometry& g) {
    if (dict.kernel_size() != g.kernel_size || dict.stride() != g.stride)
        throw ConfigError("dictionary kernel size/stride do not match the code geometry");
}

StereoPair sparse_reconstruct(const Dictionary& dict, const CodeGeometry& g, const Eigen::MatrixXd& a) {
    StereoPair out(Image(g.height, g.width), Image(g.height, g.width));
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
        const double* column = dict.weights().col(k).data();
        for (int p = 0; p < g.positions(); ++p) {
            const double v = a(p, k);
            if (v != 0.0) stamp(out, g, p / g.cols, p % g.cols, column, v);
        }
    }
    return out;
}

Energy energy_from(const StereoPair& residual, const Eigen::MatrixXd& a, double lambda) {
    Energy e;
    e.residual = 0.5 * residual.squared_norm();
    e.count = static_cast<long>((a.array() > lambda).count());
    e.total = e.residual + lambda * static_cast<double>(e.count);
    e.objective = e.residual + 0.5 * lambda * lambda * static_cast<double>(e.count);
    return e;
}

StereoPair difference(const StereoPair& x, const StereoPair& y) {
    return StereoPair(x.left - y.left, x.right - y.right);
}

}  // namespace

StereoPair accumulate_patches(const Eigen::MatrixXd& patches, const CodeGeometry& g) {
    if (patches.rows() != 2 * g.kernel_size * g.kernel_size || patches.cols() != g.positions())
        throw ConfigError("patch matrix does not match the geometry");
    StereoPair out(Image(g.height, g.width), Image(g.height, g.width));
    for (int p = 0; p < g.positions(); ++p) stamp(out, g, p / g.cols, p % g.cols, patches.col(p).data(), 1.0);
    return out;
}

StereoPair reconstruct(const Dictionary& dict, const CodeState& code) {
    check_geometry(dict, code.geometry);
    if (code.a.cols() != dict.count() || code.a.rows() != code.geometry.positions())
        throw ConfigError("code shape does not match the dictionary");
    return sparse_reconstruct(dict, code.geometry, code.a);
}

Energy energy(const StereoPair& pair, const Dictionary& dict, const CodeState& code, double lambda) {
    const StereoPair recon = reconstruct(dict, code);
    if (!pair.left.same_shape(recon.left)) throw ConfigError("pair does not match the code geometry");
    return energy_from(difference(pair, recon), code.a, lambda);
}

namespace {

// Neighbour interactions of the convolutional dictionary. Two windows
// overlap when their positions differ by at most ks/s - 1 along each axis;
// the Gram matrix of an overlapping pair depends only on the offset and on
// how the image border crops the overlap, so a handful of K x K matrices
// covers every pair.
class Inhibition {
public:
    Inhibition(const Dictionary& dict, const CodeGeometry& g) : g_(g), reach_(g.kernel_size / g.stride - 1) {
        std::vector<std::array<int, 3>> row_classes, col_classes;
        row_class_ = axis_classes(g.rows, g.height, row_classes);
        col_class_ = axis_classes(g.cols, g.width, col_classes);
        ncols_ = static_cast<int>(col_classes.size());
        const Eigen::MatrixXd& W = dict.weights();
        const int K = dict.count(), ks = g.kernel_size, P = ks * ks;
        grams_.resize(row_classes.size() * col_classes.size());
        std::vector<int> ia, ib;
        for (std::size_t rc = 0; rc < row_classes.size(); ++rc)
            for (std::size_t cc = 0; cc < col_classes.size(); ++cc) {
                const auto [rlo, rhi, dr] = row_classes[rc];
                const auto [clo, chi, dc] = col_classes[cc];
                ia.clear();
                ib.clear();
                for (int h = 0; h < 2; ++h)
                    for (int i = rlo; i < rhi; ++i)
                        for (int j = clo; j < chi; ++j) {
                            ia.push_back(h * P + i * ks + j);
                            ib.push_back(h * P + (i - dr * g.stride) * ks + (j - dc * g.stride));
                        }
                Eigen::MatrixXd A(ia.size(), K), B(ib.size(), K);
                for (std::size_t r = 0; r < ia.size(); ++r) {
                    A.row(r) = W.row(ia[r]);
                    B.row(r) = W.row(ib[r]);
                }
                // Column k holds the response of every kernel at the
                // neighbour to a unit activation of kernel k.
                grams_[rc * ncols_ + cc] = B.transpose() * A;
            }
    }

    // c(:, p') = sum over active (k, p) of a(k, p) * <w_k at p, w_k' at p'>.
    void apply(const Eigen::MatrixXd& aT, Eigen::MatrixXd& cT) const {
        cT.setZero();
        const int span = 2 * reach_ + 1;
        for (int m = 0; m < g_.rows; ++m)
            for (int n = 0; n < g_.cols; ++n) {
                const int p = m * g_.cols + n;
                for (Eigen::Index k = 0; k < aT.rows(); ++k) {
                    const double v = aT(k, p);
                    if (v == 0.0) continue;
                    for (int dm = -reach_; dm <= reach_; ++dm) {
                        const int rc = row_class_[m * span + dm + reach_];
                        if (rc < 0) continue;
                        for (int dn = -reach_; dn <= reach_; ++dn) {
                            const int cc = col_class_[n * span + dn + reach_];
                            if (cc < 0) continue;
                            cT.col((m + dm) * g_.cols + n + dn) += v * grams_[rc * ncols_ + cc].col(k);
                        }
                    }
                }
            }
    }

private:
    // Per (index, offset) the class of the cropped overlap, -1 when the
    // neighbour is off the map. A class is (first row, end row, offset) in
    // the kernel coordinates of the first window.
    std::vector<int> axis_classes(int count, int extent, std::vector<std::array<int, 3>>& classes) const {
        const int ks = g_.kernel_size, s = g_.stride, span = 2 * reach_ + 1;
        std::vector<int> out(static_cast<std::size_t>(count) * span, -1);
        for (int m = 0; m < count; ++m) {
            const int top = m * s - g_.offset();
            const int lo = std::max(0, -top), hi = std::min(ks, extent - top);
            for (int d = -reach_; d <= reach_; ++d) {
                if (m + d < 0 || m + d >= count) continue;
                const std::array<int, 3> key{std::max(lo, d * s), std::min(hi, ks + d * s), d};
                if (key[0] >= key[1]) continue;
                auto it = std::find(classes.begin(), classes.end(), key);
                if (it == classes.end()) it = classes.insert(classes.end(), key);
                out[m * span + d + reach_] = static_cast<int>(it - classes.begin());
            }
        }
        return out;
    }

    CodeGeometry g_;
    int reach_;
    int ncols_ = 0;
    std::vector<int> row_class_, col_class_;
    std::vector<Eigen::MatrixXd> grams_;
};

// 0.5 * ||pair - W a||^2 with the reconstruction written into `recon`.
double residual_energy(const StereoPair& pair, const Dictionary& dict, const CodeGeometry& g,
                       const Eigen::MatrixXd& aT, StereoPair& recon) {
    std::fill(recon.left.values().begin(), recon.left.values().end(), 0.0);
    std::fill(recon.right.values().begin(), recon.right.values().end(), 0.0);
    for (int p = 0; p < g.positions(); ++p)
        for (Eigen::Index k = 0; k < aT.rows(); ++k) {
            const double v = aT(k, p);
            if (v != 0.0) stamp(recon, g, p / g.cols, p % g.cols, dict.weights().col(k).data(), v);
        }
    double e = 0.0;
    const auto x = pair.left.values(), y = pair.right.values();
    const auto rx = recon.left.values(), ry = recon.right.values();
    for (std::size_t i = 0; i < x.size(); ++i) e += (x[i] - rx[i]) * (x[i] - rx[i]) + (y[i] - ry[i]) * (y[i] - ry[i]);
    return 0.5 * e;
}

}  // namespace

namespace {

EncodeResult run_dynamics(const StereoPair& pair, const Dictionary& dict, const CodeGeometry& g,
                          const Inhibition& inhibition, const LcaConfig& cfg) {
    const int K = dict.count(), MN = g.positions();

    // Kernel-major working copies (K x MN); the drive is fixed by the input.
    const Eigen::MatrixXd bT = dict.weights().transpose() * extract_patches(pair, g);
    Eigen::MatrixXd uT = Eigen::MatrixXd::Zero(K, MN), aT(K, MN), cT(K, MN), duT(K, MN);
    StereoPair recon(Image(g.height, g.width), Image(g.height, g.width));

    EncodeResult res;
    double max_du = 0.0;
    for (int t = 0;; ++t) {
        aT = uT.unaryExpr([&](double v) { return threshold(v, cfg.lambda); });
        Energy e;
        e.residual = residual_energy(pair, dict, g, aT, recon);
        e.count = static_cast<long>((aT.array() > cfg.lambda).count());
        e.total = e.residual + cfg.lambda * static_cast<double>(e.count);
        e.objective = e.residual + 0.5 * cfg.lambda * cfg.lambda * static_cast<double>(e.count);
        res.trace.push_back(e);
        res.iterations = t;
        if (t > 0) {
            const double prev = res.trace[t - 1].objective, cur = e.objective;
            const double rel = std::abs(cur - prev) / std::max(std::abs(prev), 1e-300);
            if ((rel < cfg.tolerance || cur == prev) && max_du < cfg.tolerance) {
                res.converged = true;
                break;
            }
        }
        if (t == cfg.iterations) break;

        // Feed-forward drive minus lateral inhibition (self term added back).
        inhibition.apply(aT, cT);
        duT = cfg.step * (bT - cT + aT - uT);
        uT += duT;
        if (!uT.allFinite()) throw DivergenceError("non-finite potentials at iteration " + std::to_string(t + 1), t + 1);
        max_du = duT.cwiseAbs().maxCoeff();
    }
    res.code = CodeState(g, K);
    res.code.u = uT.transpose();
    res.code.a = aT.transpose();
    return res;
}

}  // namespace

struct Encoder::Impl {
    explicit Impl(const Dictionary& d) : dict(d) {}
    Dictionary dict;
    std::mutex mutex;
    std::map<std::pair<int, int>, std::shared_ptr<const Inhibition>> tables;
};

Encoder::Encoder(const Dictionary& dict) : impl_(std::make_shared<Impl>(dict)) {}

const Dictionary& Encoder::dictionary() const noexcept { return impl_->dict; }

EncodeResult Encoder::encode(const StereoPair& pair, const LcaConfig& cfg) const {
    cfg.validate();
    const Dictionary& dict = impl_->dict;
    const CodeGeometry g = CodeGeometry::for_image(pair.height(), pair.width(), dict.kernel_size(), dict.stride());
    std::shared_ptr<const Inhibition> table;
    {
        std::lock_guard lock(impl_->mutex);
        auto& slot = impl_->tables[{g.height, g.width}];
        if (!slot) slot = std::make_shared<const Inhibition>(dict, g);
        table = slot;
    }
    return run_dynamics(pair, dict, g, *table, cfg);
}

EncodeResult encode(const StereoPair& pair, const Dictionary& dict, const LcaConfig& cfg) {
    cfg.validate();
    const CodeGeometry g = CodeGeometry::for_image(pair.height(), pair.width(), dict.kernel_size(), dict.stride());
    return run_dynamics(pair, dict, g, Inhibition(dict, g), cfg);
}

BinaryCode binarize(const CodeState& code) {
    BinaryCode b;
    b.kernels = code.kernels();
    b.rows = code.geometry.rows;
    b.cols = code.geometry.cols;
    // Column-major (M*N x K) storage is already K x M x N row-major.
    b.bits.resize(static_cast<std::size_t>(code.a.size()));
    for (Eigen::Index i = 0; i < code.a.size(); ++i) b.bits[i] = code.a.data()[i] > 0.0 ? 1 : 0;
    return b;
}

}  // namespace slca
