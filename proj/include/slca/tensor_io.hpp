#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace slca {

// Binary tensor container:
//   "LCAT" | u32 version | u32 dtype | u32 rank | rank x u64 dims | payload
// All integers and payload elements little-endian, payload row-major.
inline constexpr std::uint32_t kTensorFormatVersion = 1;

enum class DType : std::uint32_t { F32 = 1, F64 = 2, U8 = 3 };

struct Tensor {
    DType dtype = DType::F32;
    std::vector<std::uint64_t> shape;
    std::vector<double> values;        // F32 / F64 payload
    std::vector<std::uint8_t> bytes;   // U8 payload

    std::uint64_t element_count() const;
};

void write_tensor(const std::filesystem::path& path, std::span<const std::uint64_t> shape,
                  std::span<const double> values, DType dtype = DType::F32);
void write_tensor_u8(const std::filesystem::path& path, std::span<const std::uint64_t> shape,
                     std::span<const std::uint8_t> bytes);
Tensor read_tensor(const std::filesystem::path& path);

// Tensor path + ".json".
std::filesystem::path sidecar_path(const std::filesystem::path& tensor_path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

// 64-bit FNV-1a, rendered as 16 hex digits.
std::string hash_bytes(std::span<const std::uint8_t> data);
std::string hash_string(const std::string& s);
std::string hash_file(const std::filesystem::path& path);

}  // namespace slca
