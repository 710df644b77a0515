#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "slca/image.hpp"
#include "slca/labels.hpp"

namespace slca {

struct DatasetEntry {
    std::string path;  // relative to the dataset root
    std::size_t label_index = 0;
    std::array<double, 2> label{0.0, 0.0};
    std::uint64_t seed = 0;
    double scale = 1.0;
    std::string truth;  // optional ground-truth tensor, relative path
};

struct Dataset {
    std::filesystem::path root;
    std::string kind;  // "disparity", "surface", "vergence", "scene"
    LabelGrid grid;
    std::vector<DatasetEntry> entries;
    nlohmann::json extra = nlohmann::json::object();
};

// Pairs are stored as (2, H, W) single-precision tensors.
void write_pair(const std::filesystem::path& path, const StereoPair& pair);
StereoPair read_pair(const std::filesystem::path& path);

// Single image planes (H, W) or stacks (n, H, W), double precision.
void write_planes(const std::filesystem::path& path, const std::vector<Image>& planes);
std::vector<Image> read_planes(const std::filesystem::path& path);

inline constexpr const char* kManifestName = "manifest.json";

void write_manifest(const Dataset& ds, const nlohmann::json& provenance = {});
Dataset read_manifest(const std::filesystem::path& root);

}  // namespace slca
