#include "slca/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>

#include "slca/errors.hpp"

namespace slca {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw DataError("cannot open " + path.string());
    return f;
}

}  // namespace

Image load_grayscale(const std::filesystem::path& path) {
    FilePtr file = open_file(path, "rb");
    unsigned char sig[8];
    if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw DataError(path.string() + " is not a PNG file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw DataError("libpng initialization failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw DataError("libpng initialization failed");
    }

    std::vector<unsigned char> buffer;
    std::vector<png_bytep> rows;
    std::string failure;
    // Kept in memory so values survive a longjmp out of libpng.
    struct {
        int height = 0, width = 0, channels = 0, depth = 0, color = 0;
    } h;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("failed to decode " + path.string());
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    h.width = static_cast<int>(png_get_image_width(png, info));
    h.height = static_cast<int>(png_get_image_height(png, info));
    h.depth = png_get_bit_depth(png, info);
    h.color = png_get_color_type(png, info);

    const bool supported_color = h.color == PNG_COLOR_TYPE_GRAY || h.color == PNG_COLOR_TYPE_GRAY_ALPHA ||
                                 h.color == PNG_COLOR_TYPE_RGB || h.color == PNG_COLOR_TYPE_RGB_ALPHA;
    if (!supported_color) failure = "unsupported PNG color type (palette) in " + path.string();
    else if (h.depth != 8 && h.depth != 16) failure = "unsupported PNG bit depth " + std::to_string(h.depth) + " in " + path.string();

    if (failure.empty()) {
        if (h.depth == 16) png_set_swap(png);  // little-endian samples
        png_read_update_info(png, info);
        h.channels = png_get_channels(png, info);
        const std::size_t stride = png_get_rowbytes(png, info);
        buffer.resize(stride * static_cast<std::size_t>(h.height));
        rows.resize(h.height);
        for (int r = 0; r < h.height; ++r) rows[r] = buffer.data() + stride * r;
        png_read_image(png, rows.data());
        png_read_end(png, nullptr);
    }
    png_destroy_read_struct(&png, &info, nullptr);
    if (!failure.empty()) throw DataError(failure);

    const bool rgb = h.color == PNG_COLOR_TYPE_RGB || h.color == PNG_COLOR_TYPE_RGB_ALPHA;
    const double max_value = h.depth == 16 ? 65535.0 : 255.0;
    Image img(h.height, h.width);
    for (int r = 0; r < h.height; ++r) {
        const unsigned char* row = rows[r];
        for (int c = 0; c < h.width; ++c) {
            auto sample = [&](int ch) -> double {
                const std::size_t k = static_cast<std::size_t>(c) * h.channels + ch;
                if (h.depth == 8) return row[k];
                return static_cast<double>(row[2 * k] | (row[2 * k + 1] << 8));
            };
            double v;
            if (rgb) v = 0.2126 * sample(0) + 0.7152 * sample(1) + 0.0722 * sample(2);
            else v = sample(0);
            img(r, c) = v / max_value;
        }
    }
    return img;
}

namespace {

void write_png(const std::filesystem::path& path, int height, int width, int color_type, int channels,
               const std::vector<unsigned char>& data) {
    FilePtr file = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw DataError("libpng initialization failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw DataError("libpng initialization failed");
    }
    std::vector<png_const_bytep> rows(height);
    for (int r = 0; r < height; ++r) rows[r] = data.data() + static_cast<std::size_t>(r) * width * channels;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw DataError("failed to encode " + path.string());
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, const_cast<png_bytepp>(rows.data()));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

void save_grayscale(const std::filesystem::path& path, const Image& img, double lo, double hi) {
    if (!(hi > lo)) throw ConfigError("save_grayscale requires hi > lo");
    std::vector<unsigned char> data(img.size());
    auto v = img.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double t = std::clamp((v[i] - lo) / (hi - lo), 0.0, 1.0);
        data[i] = static_cast<unsigned char>(std::lround(t * 255.0));
    }
    write_png(path, img.height(), img.width(), PNG_COLOR_TYPE_GRAY, 1, data);
}

void save_rgb(const std::filesystem::path& path, int height, int width, const std::vector<unsigned char>& rgb) {
    if (rgb.size() != static_cast<std::size_t>(height) * width * 3) throw ConfigError("rgb buffer size mismatch");
    write_png(path, height, width, PNG_COLOR_TYPE_RGB, 3, rgb);
}

}  // namespace slca
