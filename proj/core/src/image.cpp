#include "topo/image.hpp"

#include <fmt/format.h>
#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "topo/npy.hpp"

namespace topo {
namespace {

struct FileCloser {
    std::FILE* fp = nullptr;
    ~FileCloser() {
        if (fp) std::fclose(fp);
    }
};

void quiet_warning(png_structp, png_const_charp) {}

[[noreturn]] void fail(const std::filesystem::path& path,
                       const std::string& what) {
    throw std::runtime_error(fmt::format("{}: {}", path.string(), what));
}

}  // namespace

RasterImage load_image(const std::filesystem::path& path) {
    FileCloser file{std::fopen(path.string().c_str(), "rb")};
    if (!file.fp) fail(path, "cannot open");

    unsigned char sig[8];
    if (std::fread(sig, 1, 8, file.fp) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
        fail(path, "not a PNG file");
    }
    std::rewind(file.fp);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                             nullptr, quiet_warning);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "corrupt PNG stream");
    }
    png_init_io(png, file.fp);
    png_read_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);
    png_bytepp rows = png_get_rows(png, info);

    int src_channels = 0;
    switch (color_type) {
        case PNG_COLOR_TYPE_GRAY: src_channels = 1; break;
        case PNG_COLOR_TYPE_GRAY_ALPHA: src_channels = 2; break;
        case PNG_COLOR_TYPE_RGB: src_channels = 3; break;
        case PNG_COLOR_TYPE_RGB_ALPHA: src_channels = 4; break;
        case PNG_COLOR_TYPE_PALETTE:
            png_destroy_read_struct(&png, &info, nullptr);
            fail(path, "unsupported color model: palette");
        default:
            png_destroy_read_struct(&png, &info, nullptr);
            fail(path, fmt::format("unsupported color type {}", color_type));
    }
    if (bit_depth != 8 && bit_depth != 16) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, fmt::format("unsupported bit depth {}", bit_depth));
    }

    RasterImage img;
    img.width = static_cast<int>(width);
    img.height = static_cast<int>(height);
    img.channels = src_channels >= 3 ? 3 : 1;  // alpha stripped
    img.data.resize(static_cast<std::size_t>(img.channels) * img.plane_size());

    const double scale = bit_depth == 8 ? 255.0 : 65535.0;
    for (png_uint_32 y = 0; y < height; ++y) {
        const png_bytep row = rows[y];
        for (png_uint_32 x = 0; x < width; ++x) {
            for (int c = 0; c < img.channels; ++c) {
                const std::size_t s = (x * src_channels + c);
                double v;
                if (bit_depth == 8) {
                    v = row[s] / scale;
                } else {
                    v = (row[2 * s] << 8 | row[2 * s + 1]) / scale;
                }
                img.at(c, static_cast<int>(y), static_cast<int>(x)) = v;
            }
        }
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

Tensor to_tensor(const RasterImage& img) {
    Tensor t(static_cast<std::size_t>(img.channels),
             static_cast<std::size_t>(img.height),
             static_cast<std::size_t>(img.width));
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        t.data[i] = static_cast<float>(img.data[i]);
    }
    return t;
}

void export_tensor(const Tensor& t, const std::filesystem::path& path) {
    if (t.shape[0] == 0 || t.shape[1] == 0 || t.shape[2] == 0 ||
        t.data.size() != t.shape[0] * t.shape[1] * t.shape[2]) {
        throw std::invalid_argument(
            fmt::format("export_tensor: inconsistent tensor ({}x{}x{}, {} values)",
                        t.shape[0], t.shape[1], t.shape[2], t.data.size()));
    }
    for (float v : t.data) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument(
                "export_tensor: tensor contains non-finite values");
        }
    }
    write_npy(path, t.shape, t.data);
}

Tensor import_tensor(const std::filesystem::path& path) {
    NpyArray arr = read_npy(path);
    if (arr.shape.size() != 3) {
        throw std::runtime_error(
            fmt::format("{}: expected a rank-3 tensor, got rank {}",
                        path.string(), arr.shape.size()));
    }
    Tensor t;
    t.shape = {arr.shape[0], arr.shape[1], arr.shape[2]};
    t.data = std::move(arr.data);
    return t;
}

void export_png_preview(const Tensor& t, std::size_t channel,
                        const std::filesystem::path& path) {
    if (channel >= t.channels()) {
        throw std::invalid_argument(
            fmt::format("export_png_preview: channel {} out of range [0,{})",
                        channel, t.channels()));
    }
    const std::size_t h = t.height(), w = t.width();
    if (h == 0 || w == 0) {
        throw std::invalid_argument("export_png_preview: empty tensor");
    }

    float lo = std::numeric_limits<float>::infinity();
    float hi = -std::numeric_limits<float>::infinity();
    for (std::size_t i = 0; i < h * w; ++i) {
        const float v = t.data[channel * h * w + i];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }

    std::vector<unsigned char> bytes(h * w, 0);
    if (hi > lo) {
        for (std::size_t i = 0; i < h * w; ++i) {
            const double v = (t.data[channel * h * w + i] - lo) / (hi - lo);
            // round half to even, matching the documented preview contract
            bytes[i] = static_cast<unsigned char>(std::nearbyint(v * 255.0));
        }
    }

    std::vector<png_bytep> rows(h);
    for (std::size_t y = 0; y < h; ++y) rows[y] = bytes.data() + y * w;

    FileCloser file{std::fopen(path.string().c_str(), "wb")};
    if (!file.fp) fail(path, "cannot open for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                              nullptr, quiet_warning);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        fail(path, "libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(path, "PNG write failed");
    }
    png_init_io(png, file.fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(w),
                 static_cast<png_uint_32>(h), 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_set_rows(png, info, rows.data());
    png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace topo
