#include "slca/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "slca/errors.hpp"

namespace slca {

namespace {

constexpr char kMagic[4] = {'L', 'C', 'A', 'T'};

template <typename T>
void put_le(std::string& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw DataError("truncated tensor file");
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        v |= static_cast<T>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    pos += sizeof(T);
    return v;
}

std::string header(DType dtype, std::span<const std::uint64_t> shape) {
    std::string out(kMagic, 4);
    put_le<std::uint32_t>(out, kTensorFormatVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dtype));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(shape.size()));
    for (auto d : shape) put_le<std::uint64_t>(out, d);
    return out;
}

std::uint64_t product(std::span<const std::uint64_t> shape) {
    std::uint64_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

void write_all(const std::filesystem::path& path, const std::string& data) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write " + path.string());
    f.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!f) throw DataError("write failed for " + path.string());
}

std::string read_all(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

std::uint64_t Tensor::element_count() const { return product(shape); }

void write_tensor(const std::filesystem::path& path, std::span<const std::uint64_t> shape,
                  std::span<const double> values, DType dtype) {
    if (product(shape) != values.size()) throw ConfigError("tensor shape does not match value count");
    if (dtype == DType::U8) throw ConfigError("use write_tensor_u8 for byte tensors");
    std::string out = header(dtype, shape);
    out.reserve(out.size() + values.size() * (dtype == DType::F32 ? 4 : 8));
    for (double v : values) {
        if (dtype == DType::F32) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
        else put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    }
    write_all(path, out);
}

void write_tensor_u8(const std::filesystem::path& path, std::span<const std::uint64_t> shape,
                     std::span<const std::uint8_t> bytes) {
    if (product(shape) != bytes.size()) throw ConfigError("tensor shape does not match byte count");
    std::string out = header(DType::U8, shape);
    out.append(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    write_all(path, out);
}

Tensor read_tensor(const std::filesystem::path& path) {
    const std::string in = read_all(path);
    if (in.size() < 16 || std::memcmp(in.data(), kMagic, 4) != 0) throw DataError(path.string() + " is not an LCAT tensor");
    std::size_t pos = 4;
    const auto version = get_le<std::uint32_t>(in, pos);
    if (version != kTensorFormatVersion) throw DataError("unsupported tensor format version " + std::to_string(version));
    Tensor t;
    const auto tag = get_le<std::uint32_t>(in, pos);
    if (tag < 1 || tag > 3) throw DataError("unknown tensor element type " + std::to_string(tag));
    t.dtype = static_cast<DType>(tag);
    const auto rank = get_le<std::uint32_t>(in, pos);
    for (std::uint32_t i = 0; i < rank; ++i) t.shape.push_back(get_le<std::uint64_t>(in, pos));
    const std::uint64_t n = t.element_count();
    const std::size_t width = t.dtype == DType::F32 ? 4 : t.dtype == DType::F64 ? 8 : 1;
    if (in.size() - pos != n * width) throw DataError("tensor payload size mismatch in " + path.string());
    if (t.dtype == DType::U8) {
        t.bytes.assign(in.begin() + static_cast<std::ptrdiff_t>(pos), in.end());
        return t;
    }
    t.values.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        if (t.dtype == DType::F32) t.values[i] = std::bit_cast<float>(get_le<std::uint32_t>(in, pos));
        else t.values[i] = std::bit_cast<double>(get_le<std::uint64_t>(in, pos));
    }
    return t;
}

std::filesystem::path sidecar_path(const std::filesystem::path& tensor_path) {
    return std::filesystem::path(tensor_path.string() + ".json");
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    write_all(path, j.dump(2) + "\n");
}

nlohmann::json read_json(const std::filesystem::path& path) {
    try {
        return nlohmann::json::parse(read_all(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

std::string hash_bytes(std::span<const std::uint8_t> data) {
    std::uint64_t h = 14695981039346656037ull;
    for (auto b : data) {
        h ^= b;
        h *= 1099511628211ull;
    }
    std::ostringstream ss;
    ss << std::hex << std::setw(16) << std::setfill('0') << h;
    return ss.str();
}

std::string hash_string(const std::string& s) {
    return hash_bytes({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

std::string hash_file(const std::filesystem::path& path) { return hash_string(read_all(path)); }

}  // namespace slca
