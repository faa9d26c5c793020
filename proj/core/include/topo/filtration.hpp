#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "topo/image.hpp"

namespace topo {

/// Scalar field on a pixel grid, row-major. The domain of every filtration
/// and the input to the cubical persistence stage.
struct ScalarGrid {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;

    ScalarGrid() = default;
    ScalarGrid(int r, int c, double fill = 0.0)
        : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, fill) {}
    ScalarGrid(int r, int c, std::vector<double> v)
        : rows(r), cols(c), values(std::move(v)) {}

    double at(int r, int c) const {
        return values[static_cast<std::size_t>(r) * cols + c];
    }
    double& at(int r, int c) {
        return values[static_cast<std::size_t>(r) * cols + c];
    }
    std::size_t size() const { return values.size(); }
};

/// The two scalar fields a TopoImage view can be built from.
enum class FiltrationKind { Intensity, Gradient };

std::string to_string(FiltrationKind kind);
FiltrationKind filtration_from_string(std::string_view name);

/// Pixel intensity field: grayscale images pass through unchanged; RGB maps
/// each pixel to sqrt(r^2+g^2+b^2)/sqrt(3), keeping values in [0,1].
ScalarGrid intensity_filtration(const RasterImage& img);

/// 5-point Laplacian (4-neighbor sum minus 4x center) with replicate padding
/// at the borders. Exposed for reuse and direct testing.
ScalarGrid laplacian(const ScalarGrid& g);

/// Gradient-magnitude field: |laplacian| per channel, averaged over channels,
/// divided by 8 to fit unit-range inputs into [0,1].
ScalarGrid gradient_filtration(const RasterImage& img);

}  // namespace topo
