#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <vector>

namespace topo {

/// Decoded raster image. Samples are stored channel-major (planar): channel c
/// occupies data[c*height*width .. (c+1)*height*width), row-major inside each
/// plane. Values are normalized to [0,1] (8-bit: v/255, 16-bit: v/65535).
struct RasterImage {
    int width = 0;
    int height = 0;
    int channels = 0;  // 1 (grayscale) or 3 (RGB); alpha is stripped on load
    std::vector<double> data;

    double at(int channel, int row, int col) const {
        return data[static_cast<std::size_t>(channel) * height * width +
                    static_cast<std::size_t>(row) * width + col];
    }
    double& at(int channel, int row, int col) {
        return data[static_cast<std::size_t>(channel) * height * width +
                    static_cast<std::size_t>(row) * width + col];
    }
    std::size_t plane_size() const {
        return static_cast<std::size_t>(height) * width;
    }
};

/// Dense rank-3 float tensor with shape (channels, height, width), C-order.
struct Tensor {
    std::array<std::size_t, 3> shape{0, 0, 0};
    std::vector<float> data;

    Tensor() = default;
    Tensor(std::size_t c, std::size_t h, std::size_t w, float fill = 0.0f)
        : shape{c, h, w}, data(c * h * w, fill) {}

    std::size_t channels() const { return shape[0]; }
    std::size_t height() const { return shape[1]; }
    std::size_t width() const { return shape[2]; }
    std::size_t size() const { return data.size(); }

    float at(std::size_t c, std::size_t y, std::size_t x) const {
        return data[(c * shape[1] + y) * shape[2] + x];
    }
    float& at(std::size_t c, std::size_t y, std::size_t x) {
        return data[(c * shape[1] + y) * shape[2] + x];
    }
};

/// Decodes an 8- or 16-bit grayscale or RGB PNG. An alpha channel, if present,
/// is dropped. Palette images and other bit depths are rejected with an error
/// naming the offending property. Throws std::runtime_error on unreadable or
/// malformed files.
RasterImage load_image(const std::filesystem::path& path);

/// Flattens a RasterImage to a (C,H,W) float tensor (values unchanged).
Tensor to_tensor(const RasterImage& img);

/// Writes `t` to `path` in NPY format v1.0, dtype <f4, C-order. The header is
/// space-padded so that the payload starts on a 64-byte boundary. All values
/// must be finite; throws std::invalid_argument otherwise.
void export_tensor(const Tensor& t, const std::filesystem::path& path);

/// Reads an NPY file written by export_tensor (also accepts <f8, which is
/// converted to float). Requires C-order little-endian data with a rank-3
/// shape.
Tensor import_tensor(const std::filesystem::path& path);

/// Renders one channel of `t` as an 8-bit grayscale PNG, min-max scaled to
/// [0,255] with ties rounded to even. A constant channel maps to all zeros.
void export_png_preview(const Tensor& t, std::size_t channel,
                        const std::filesystem::path& path);

}  // namespace topo
