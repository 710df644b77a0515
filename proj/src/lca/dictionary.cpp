#include "slca/dictionary.hpp"

#include <cmath>

#include "slca/errors.hpp"
#include "slca/tensor_io.hpp"
#include "slca/textures.hpp"

namespace slca {

namespace {

void check_layout(int count, int kernel_size, int stride) {
    if (count < 1) throw ConfigError("dictionary needs at least one kernel");
    if (kernel_size < 1 || stride < 1 || kernel_size % stride != 0)
        throw ConfigError("stride must divide the kernel size");
}

}  // namespace

Dictionary::Dictionary(int count, int kernel_size, int stride)
    : weights_(Eigen::MatrixXd::Zero(2 * kernel_size * kernel_size, std::max(count, 0))),
      kernel_size_(kernel_size),
      stride_(stride) {
    check_layout(count, kernel_size, stride);
}

Dictionary::Dictionary(Eigen::MatrixXd weights, int kernel_size, int stride)
    : weights_(std::move(weights)), kernel_size_(kernel_size), stride_(stride) {
    check_layout(static_cast<int>(weights_.cols()), kernel_size, stride);
    if (weights_.rows() != 2 * kernel_size * kernel_size) throw ConfigError("weight matrix has the wrong row count");
}

Dictionary Dictionary::random(int count, int kernel_size, int stride, std::uint64_t seed) {
    Dictionary d(count, kernel_size, stride);
    Rng rng(seed);
    for (int k = 0; k < count; ++k)
        for (Eigen::Index i = 0; i < d.weights_.rows(); ++i) d.weights_(i, k) = rng.normal();
    d.normalize();
    return d;
}

Image Dictionary::left(int k) const {
    Image img(kernel_size_, kernel_size_);
    for (int i = 0; i < patch_size(); ++i) img.values()[i] = weights_(i, k);
    return img;
}

Image Dictionary::right(int k) const {
    Image img(kernel_size_, kernel_size_);
    for (int i = 0; i < patch_size(); ++i) img.values()[i] = weights_(patch_size() + i, k);
    return img;
}

void Dictionary::set_kernel(int k, const Image& l, const Image& r) {
    if (l.height() != kernel_size_ || l.width() != kernel_size_ || !l.same_shape(r))
        throw ConfigError("kernel shape mismatch");
    for (int i = 0; i < patch_size(); ++i) {
        weights_(i, k) = l.values()[i];
        weights_(patch_size() + i, k) = r.values()[i];
    }
}

void Dictionary::normalize() {
    for (Eigen::Index k = 0; k < weights_.cols(); ++k) {
        const double n = weights_.col(k).norm();
        if (!(n > 0.0) || !std::isfinite(n)) throw DataError("kernel " + std::to_string(k) + " has no usable energy");
        weights_.col(k) /= n;
    }
}

double Dictionary::max_norm_error() const {
    double worst = 0.0;
    for (Eigen::Index k = 0; k < weights_.cols(); ++k)
        worst = std::max(worst, std::abs(weights_.col(k).squaredNorm() - 1.0));
    return worst;
}

void save_dictionary(const std::filesystem::path& path, const Dictionary& dict, nlohmann::json metadata,
                     bool double_precision) {
    const int K = dict.count(), ks = dict.kernel_size(), P = dict.patch_size();
    // Column k of the weights is already (2, ks, ks) row-major.
    std::vector<double> values(static_cast<std::size_t>(K) * 2 * P);
    for (int k = 0; k < K; ++k)
        for (int i = 0; i < 2 * P; ++i) values[static_cast<std::size_t>(k) * 2 * P + i] = dict.weights()(i, k);
    const std::uint64_t shape[] = {static_cast<std::uint64_t>(K), 2, static_cast<std::uint64_t>(ks),
                                   static_cast<std::uint64_t>(ks)};
    write_tensor(path, shape, values, double_precision ? DType::F64 : DType::F32);
    if (!metadata.is_object()) metadata = nlohmann::json::object();
    metadata["kernel_size"] = ks;
    metadata["stride"] = dict.stride();
    metadata["count"] = K;
    write_json(sidecar_path(path), metadata);
}

Dictionary load_dictionary(const std::filesystem::path& path, nlohmann::json* metadata) {
    const Tensor t = read_tensor(path);
    if (t.shape.size() != 4 || t.shape[1] != 2 || t.shape[2] != t.shape[3])
        throw DataError(path.string() + ": expected a (K, 2, ks, ks) tensor");
    const nlohmann::json meta = read_json(sidecar_path(path));
    const int ks = static_cast<int>(t.shape[2]);
    const int stride = meta.value("stride", ks / 2);
    if (meta.value("kernel_size", ks) != ks) throw DataError(path.string() + ": kernel size disagrees with sidecar");
    const int K = static_cast<int>(t.shape[0]);
    Eigen::MatrixXd w(2 * ks * ks, K);
    for (int k = 0; k < K; ++k)
        for (int i = 0; i < 2 * ks * ks; ++i) w(i, k) = t.values[static_cast<std::size_t>(k) * 2 * ks * ks + i];
    Dictionary d(std::move(w), ks, stride);
    // Single-precision storage loses the joint norm past ~1e-7; restore it.
    // Double-precision files are taken bit for bit.
    if (t.dtype != DType::F64) d.normalize();
    if (metadata) *metadata = meta;
    return d;
}

int kernels_for_overcompleteness(double ratio, int stride) {
    if (!(ratio > 0.0)) throw ConfigError("overcompleteness must be positive");
    // Rounded up: the customary ratio 0.66 stands for 85 of 128.
    const double per_position = 2.0 * stride * stride;
    return std::max(1, static_cast<int>(std::ceil(ratio * per_position - 1e-9)));
}

}  // namespace slca
