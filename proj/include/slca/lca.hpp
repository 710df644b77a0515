#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "slca/dictionary.hpp"
#include "slca/image.hpp"

namespace slca {

struct LcaConfig {
    double lambda = 0.1;
    int iterations = 400;
    double step = 0.1;        // dt / tau
    double tolerance = 1e-5;  // relative energy change and max |du|
    std::uint64_t seed = 0;   // kept for provenance; encoding draws no random numbers

    void validate() const;
};

// Feature-map layout for an H x W input. Coefficient (m, n) covers the
// kernel window whose top-left pixel sits at (m*s - (ks-s), n*s - (ks-s)),
// so every pixel lies under exactly (ks/s)^2 coefficients.
struct CodeGeometry {
    int height = 0;
    int width = 0;
    int kernel_size = 16;
    int stride = 8;
    int rows = 0;  // M
    int cols = 0;  // N

    static CodeGeometry for_image(int height, int width, int kernel_size, int stride);
    int offset() const noexcept { return kernel_size - stride; }
    int top(int m) const noexcept { return m * stride - offset(); }
    int left(int n) const noexcept { return n * stride - offset(); }
    int positions() const noexcept { return rows * cols; }
    friend bool operator==(const CodeGeometry&, const CodeGeometry&) = default;
};

// Potentials and activations, one row per position (m * N + n), one column
// per kernel. Column-major storage, so the raw buffer is K x M x N row-major.
struct CodeState {
    CodeGeometry geometry;
    Eigen::MatrixXd u;
    Eigen::MatrixXd a;

    CodeState() = default;
    CodeState(const CodeGeometry& g, int kernels);
    int kernels() const noexcept { return static_cast<int>(a.cols()); }
    double activation(int k, int m, int n) const { return a(m * geometry.cols + n, k); }
    double& activation(int k, int m, int n) { return a(m * geometry.cols + n, k); }
};

// Binary feature maps, bits[(k * M + m) * N + n].
struct BinaryCode {
    int kernels = 0;
    int rows = 0;
    int cols = 0;
    std::vector<std::uint8_t> bits;

    std::uint8_t operator()(int k, int m, int n) const {
        return bits[(static_cast<std::size_t>(k) * rows + m) * cols + n];
    }
    std::size_t active_count() const;
};

double threshold(double u, double lambda) noexcept;

StereoPair reconstruct(const Dictionary& dict, const CodeState& code);

struct Energy {
    double residual = 0.0;   // 0.5 * ||I - recon||^2 over both halves
    long count = 0;          // coefficients with a > lambda
    double total = 0.0;      // residual + lambda * count
    double objective = 0.0;  // residual + 0.5 * lambda^2 * count, the quantity the dynamics descend
};

Energy energy(const StereoPair& pair, const Dictionary& dict, const CodeState& code, double lambda);

struct EncodeResult {
    CodeState code;
    std::vector<Energy> trace;  // trace[t] evaluated on the activations after t updates
    int iterations = 0;
    bool converged = false;
};

// Leaky-integrator dynamics with hard thresholding, u starting at zero.
// Throws DivergenceError on non-finite state.
EncodeResult encode(const StereoPair& pair, const Dictionary& dict, const LcaConfig& cfg);

// Encoder bound to one dictionary. The kernel-overlap tables are built once
// per image size and shared; safe to call from several threads.
class Encoder {
public:
    explicit Encoder(const Dictionary& dict);
    EncodeResult encode(const StereoPair& pair, const LcaConfig& cfg) const;
    const Dictionary& dictionary() const noexcept;

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

BinaryCode binarize(const CodeState& code);

// Column-stacked kernel windows (2*ks^2 x M*N) of the pair, zero outside the image.
Eigen::MatrixXd extract_patches(const StereoPair& pair, const CodeGeometry& g);
// Adjoint of extract_patches: sums the windows back into a pair.
StereoPair accumulate_patches(const Eigen::MatrixXd& patches, const CodeGeometry& g);

}  // namespace slca
