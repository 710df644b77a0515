#include "slca/tuning.hpp"

#include <algorithm>

#include "slca/errors.hpp"
#include "slca/savgol.hpp"
#include "slca/tensor_io.hpp"

namespace slca {

int region_origin(int extent, int region) noexcept { return extent / 2 - region / 2; }

TuningAccumulator TuningAccumulator::shared(const LabelGrid& grid, int kernels, int margin) {
    if (kernels < 1) throw ConfigError("kernel count must be >= 1");
    if (margin < 0) throw ConfigError("margin must be >= 0");
    TuningAccumulator acc;
    acc.maps_.mode = TuningMode::Shared;
    acc.maps_.grid = grid;
    acc.maps_.kernels = kernels;
    acc.maps_.margin = margin;
    acc.maps_.ones.assign(static_cast<std::size_t>(kernels) * grid.size(), 0);
    acc.maps_.observations.assign(grid.size(), 0);
    return acc;
}

TuningAccumulator TuningAccumulator::per_location(const LabelGrid& grid, int kernels, int region_rows,
                                                  int region_cols) {
    if (kernels < 1) throw ConfigError("kernel count must be >= 1");
    if (region_rows < 1 || region_cols < 1) throw ConfigError("region must be at least 1 x 1");
    TuningAccumulator acc;
    acc.maps_.mode = TuningMode::PerLocation;
    acc.maps_.grid = grid;
    acc.maps_.kernels = kernels;
    acc.maps_.region_rows = region_rows;
    acc.maps_.region_cols = region_cols;
    acc.maps_.ones.assign(static_cast<std::size_t>(kernels) * region_rows * region_cols * grid.size(), 0);
    acc.maps_.observations.assign(grid.size(), 0);
    return acc;
}

void TuningAccumulator::add(std::size_t label, const BinaryCode& code) {
    TuningMaps& t = maps_;
    if (label >= t.labels()) throw ConfigError("label index out of range");
    if (code.kernels != t.kernels) throw ConfigError("code kernel count does not match the tuning table");
    const std::size_t L = t.labels();
    if (t.mode == TuningMode::Shared) {
        const int m0 = t.margin, m1 = code.rows - t.margin, n0 = t.margin, n1 = code.cols - t.margin;
        if (m1 <= m0 || n1 <= n0) throw DataError("margin leaves no feature-map cells");
        for (int k = 0; k < t.kernels; ++k) {
            std::uint64_t n = 0;
            for (int m = m0; m < m1; ++m)
                for (int c = n0; c < n1; ++c) n += code(k, m, c);
            t.ones[static_cast<std::size_t>(k) * L + label] += n;
        }
        t.observations[label] += static_cast<std::uint64_t>(m1 - m0) * (n1 - n0);
    } else {
        if (code.rows < t.region_rows || code.cols < t.region_cols)
            throw DataError("feature map smaller than the tuning region");
        const int r0 = region_origin(code.rows, t.region_rows), c0 = region_origin(code.cols, t.region_cols);
        for (int k = 0; k < t.kernels; ++k)
            for (int r = 0; r < t.region_rows; ++r)
                for (int c = 0; c < t.region_cols; ++c)
                    t.ones[t.entry(k, r, c) * L + label] += code(k, r0 + r, c0 + c);
        t.observations[label] += 1;
    }
}

void TuningAccumulator::merge(const TuningAccumulator& other) {
    const TuningMaps& o = other.maps_;
    if (o.mode != maps_.mode || o.ones.size() != maps_.ones.size() || !(o.grid == maps_.grid))
        throw ConfigError("cannot merge incompatible tuning tallies");
    for (std::size_t i = 0; i < o.ones.size(); ++i) maps_.ones[i] += o.ones[i];
    for (std::size_t i = 0; i < o.observations.size(); ++i) maps_.observations[i] += o.observations[i];
}

TuningMaps TuningAccumulator::finalize() const {
    TuningMaps t = maps_;
    const std::size_t L = t.labels();
    for (std::size_t y = 0; y < L; ++y)
        if (t.observations[y] == 0) throw DataError("label " + std::to_string(y) + " has no observations");
    t.probability.resize(t.ones.size());
    for (std::size_t i = 0; i < t.ones.size(); ++i) {
        const std::size_t y = i % L;
        const double eps = t.epsilon(y);
        const double p = static_cast<double>(t.ones[i]) / static_cast<double>(t.observations[y]);
        t.probability[i] = std::clamp(p, eps, 1.0 - eps);
    }
    return t;
}

TuningMaps estimate_tuning_shared(const std::vector<std::vector<BinaryCode>>& codes, const LabelGrid& grid,
                                  int margin) {
    if (codes.size() != grid.size()) throw ConfigError("need one code set per label");
    if (codes.empty() || codes.front().empty()) throw DataError("no training codes");
    auto acc = TuningAccumulator::shared(grid, codes.front().front().kernels, margin);
    for (std::size_t y = 0; y < codes.size(); ++y)
        for (const auto& c : codes[y]) acc.add(y, c);
    return acc.finalize();
}

TuningMaps estimate_tuning_perloc(const std::vector<std::vector<BinaryCode>>& codes, const LabelGrid& grid,
                                  int region_rows, int region_cols) {
    if (codes.size() != grid.size()) throw ConfigError("need one code set per label");
    if (codes.empty() || codes.front().empty()) throw DataError("no training codes");
    auto acc = TuningAccumulator::per_location(grid, codes.front().front().kernels, region_rows, region_cols);
    for (std::size_t y = 0; y < codes.size(); ++y)
        for (const auto& c : codes[y]) acc.add(y, c);
    return acc.finalize();
}

TuningMaps smooth_tuning(const TuningMaps& maps, int degree, int width) {
    TuningMaps out = maps;
    const int gr = maps.grid.rows(), gc = maps.grid.cols();
    const std::size_t L = maps.labels(), entries = maps.probability.size() / L;
    Eigen::MatrixXd m(gr, gc);
    for (std::size_t e = 0; e < entries; ++e) {
        for (int r = 0; r < gr; ++r)
            for (int c = 0; c < gc; ++c) m(r, c) = maps.probability[e * L + r * gc + c];
        const Eigen::MatrixXd s = savitzky_golay_2d(m, degree, width, maps.grid.periodic_cols());
        for (int r = 0; r < gr; ++r)
            for (int c = 0; c < gc; ++c) {
                const std::size_t y = static_cast<std::size_t>(r) * gc + c;
                const double eps = maps.epsilon(y);
                out.probability[e * L + y] = std::clamp(s(r, c), eps, 1.0 - eps);
            }
    }
    out.smoothed = true;
    return out;
}

std::string to_string(TuningMode mode) { return mode == TuningMode::Shared ? "shared" : "per_location"; }

namespace {

std::filesystem::path counts_path(const std::filesystem::path& p) {
    auto q = p;
    q += ".counts";
    return q;
}

}  // namespace

void save_tuning(const std::filesystem::path& path, const TuningMaps& maps, nlohmann::json metadata) {
    std::vector<std::uint64_t> shape{static_cast<std::uint64_t>(maps.kernels)};
    if (maps.mode == TuningMode::PerLocation) {
        shape.push_back(static_cast<std::uint64_t>(maps.region_rows));
        shape.push_back(static_cast<std::uint64_t>(maps.region_cols));
    }
    shape.push_back(maps.labels());
    write_tensor(path, shape, maps.probability, DType::F64);
    std::vector<double> ones(maps.ones.begin(), maps.ones.end());
    write_tensor(counts_path(path), shape, ones, DType::F64);

    if (!metadata.is_object()) metadata = nlohmann::json::object();
    metadata["mode"] = to_string(maps.mode);
    metadata["grid"] = maps.grid.to_json();
    metadata["kernels"] = maps.kernels;
    metadata["region"] = {maps.region_rows, maps.region_cols};
    metadata["margin"] = maps.margin;
    metadata["observations"] = maps.observations;
    std::vector<double> eps;
    for (std::size_t y = 0; y < maps.labels(); ++y) eps.push_back(maps.epsilon(y));
    metadata["epsilon"] = eps;
    metadata["smoothed"] = maps.smoothed;
    write_json(sidecar_path(path), metadata);
}

TuningMaps load_tuning(const std::filesystem::path& path, nlohmann::json* metadata) {
    const nlohmann::json meta = read_json(sidecar_path(path));
    TuningMaps t;
    try {
        const std::string mode = meta.at("mode").get<std::string>();
        if (mode != "shared" && mode != "per_location") throw DataError("unknown tuning mode " + mode);
        t.mode = mode == "shared" ? TuningMode::Shared : TuningMode::PerLocation;
        t.grid = LabelGrid::from_json(meta.at("grid"));
        t.kernels = meta.at("kernels").get<int>();
        t.region_rows = meta.at("region").at(0).get<int>();
        t.region_cols = meta.at("region").at(1).get<int>();
        t.margin = meta.value("margin", 0);
        t.observations = meta.at("observations").get<std::vector<std::uint64_t>>();
        t.smoothed = meta.value("smoothed", false);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": malformed tuning metadata (" + e.what() + ")");
    }
    const Tensor probs = read_tensor(path);
    const Tensor counts = read_tensor(counts_path(path));
    const std::size_t expected = static_cast<std::size_t>(t.kernels) * t.cells() * t.labels();
    if (probs.values.size() != expected || counts.values.size() != expected || t.observations.size() != t.labels())
        throw DataError(path.string() + ": tuning tensor does not match its metadata");
    t.probability = probs.values;
    t.ones.assign(counts.values.begin(), counts.values.end());
    if (metadata) *metadata = meta;
    return t;
}

}  // namespace slca
