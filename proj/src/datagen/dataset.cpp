#include "slca/dataset.hpp"

#include "slca/errors.hpp"
#include "slca/tensor_io.hpp"

namespace slca {

void write_pair(const std::filesystem::path& path, const StereoPair& pair) {
    std::vector<double> v(pair.left.values().begin(), pair.left.values().end());
    v.insert(v.end(), pair.right.values().begin(), pair.right.values().end());
    const std::uint64_t shape[] = {2, static_cast<std::uint64_t>(pair.height()), static_cast<std::uint64_t>(pair.width())};
    write_tensor(path, shape, v, DType::F32);
}

StereoPair read_pair(const std::filesystem::path& path) {
    const Tensor t = read_tensor(path);
    if (t.shape.size() != 3 || t.shape[0] != 2) throw DataError(path.string() + ": expected a (2, H, W) pair tensor");
    const int h = static_cast<int>(t.shape[1]), w = static_cast<int>(t.shape[2]);
    const std::size_t n = static_cast<std::size_t>(h) * w;
    return StereoPair(Image(h, w, std::vector<double>(t.values.begin(), t.values.begin() + n)),
                      Image(h, w, std::vector<double>(t.values.begin() + n, t.values.end())));
}

void write_planes(const std::filesystem::path& path, const std::vector<Image>& planes) {
    if (planes.empty()) throw ConfigError("no planes to write");
    std::vector<double> v;
    for (const Image& p : planes) {
        if (!p.same_shape(planes.front())) throw ConfigError("planes differ in size");
        v.insert(v.end(), p.values().begin(), p.values().end());
    }
    const std::uint64_t shape[] = {planes.size(), static_cast<std::uint64_t>(planes.front().height()),
                                   static_cast<std::uint64_t>(planes.front().width())};
    write_tensor(path, shape, v, DType::F64);
}

std::vector<Image> read_planes(const std::filesystem::path& path) {
    const Tensor t = read_tensor(path);
    std::uint64_t n = 1, h, w;
    if (t.shape.size() == 2) {
        h = t.shape[0];
        w = t.shape[1];
    } else if (t.shape.size() == 3) {
        n = t.shape[0];
        h = t.shape[1];
        w = t.shape[2];
    } else {
        throw DataError(path.string() + ": expected an (H, W) or (n, H, W) tensor");
    }
    std::vector<Image> out;
    const std::size_t size = h * w;
    for (std::uint64_t i = 0; i < n; ++i)
        out.emplace_back(static_cast<int>(h), static_cast<int>(w),
                         std::vector<double>(t.values.begin() + i * size, t.values.begin() + (i + 1) * size));
    return out;
}

void write_manifest(const Dataset& ds, const nlohmann::json& provenance) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : ds.entries) {
        nlohmann::json j = {{"path", e.path}, {"label_index", e.label_index}, {"label", e.label},
                            {"seed", e.seed}, {"scale", e.scale}};
        if (!e.truth.empty()) j["truth"] = e.truth;
        entries.push_back(std::move(j));
    }
    nlohmann::json j = {{"kind", ds.kind}, {"grid", ds.grid.to_json()}, {"entries", entries}, {"extra", ds.extra}};
    if (!provenance.is_null()) j["provenance"] = provenance;
    write_json(ds.root / kManifestName, j);
}

Dataset read_manifest(const std::filesystem::path& root) {
    const auto path = root / kManifestName;
    if (!std::filesystem::exists(path)) throw DataError("no manifest in " + root.string());
    const nlohmann::json j = read_json(path);
    Dataset ds;
    ds.root = root;
    try {
        ds.kind = j.at("kind").get<std::string>();
        ds.grid = LabelGrid::from_json(j.at("grid"));
        ds.extra = j.value("extra", nlohmann::json::object());
        for (const auto& e : j.at("entries")) {
            DatasetEntry d;
            d.path = e.at("path").get<std::string>();
            d.label_index = e.at("label_index").get<std::size_t>();
            d.label = e.at("label").get<std::array<double, 2>>();
            d.seed = e.value("seed", std::uint64_t{0});
            d.scale = e.value("scale", 1.0);
            d.truth = e.value("truth", std::string{});
            if (d.label_index >= ds.grid.size()) throw DataError(path.string() + ": label index out of range");
            ds.entries.push_back(std::move(d));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": malformed manifest (" + e.what() + ")");
    }
    return ds;
}

}  // namespace slca
