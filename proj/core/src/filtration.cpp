#include "topo/filtration.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace topo {

std::string to_string(FiltrationKind kind) {
    switch (kind) {
        case FiltrationKind::Intensity: return "intensity";
        case FiltrationKind::Gradient: return "gradient";
    }
    throw std::invalid_argument("unknown filtration kind");
}

FiltrationKind filtration_from_string(std::string_view name) {
    if (name == "intensity") return FiltrationKind::Intensity;
    if (name == "gradient") return FiltrationKind::Gradient;
    throw std::invalid_argument(
        fmt::format("unknown filtration \"{}\" (expected intensity|gradient)",
                    name));
}

ScalarGrid intensity_filtration(const RasterImage& img) {
    if (img.channels != 1 && img.channels != 3) {
        throw std::invalid_argument(
            fmt::format("intensity_filtration: {}-channel image unsupported",
                        img.channels));
    }
    ScalarGrid g(img.height, img.width);
    if (img.channels == 1) {
        std::copy(img.data.begin(), img.data.end(), g.values.begin());
        return g;
    }
    const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
            const double x = img.at(0, r, c), y = img.at(1, r, c),
                         z = img.at(2, r, c);
            g.at(r, c) = std::sqrt(x * x + y * y + z * z) * inv_sqrt3;
        }
    }
    return g;
}

ScalarGrid laplacian(const ScalarGrid& g) {
    if (g.rows < 1 || g.cols < 1) {
        throw std::invalid_argument("laplacian: empty grid");
    }
    ScalarGrid out(g.rows, g.cols);
    for (int r = 0; r < g.rows; ++r) {
        for (int c = 0; c < g.cols; ++c) {
            // replicate padding: out-of-range neighbors clamp to the border
            const double up = g.at(std::max(r - 1, 0), c);
            const double down = g.at(std::min(r + 1, g.rows - 1), c);
            const double left = g.at(r, std::max(c - 1, 0));
            const double right = g.at(r, std::min(c + 1, g.cols - 1));
            out.at(r, c) = up + down + left + right - 4.0 * g.at(r, c);
        }
    }
    return out;
}

ScalarGrid gradient_filtration(const RasterImage& img) {
    if (img.channels != 1 && img.channels != 3) {
        throw std::invalid_argument(
            fmt::format("gradient_filtration: {}-channel image unsupported",
                        img.channels));
    }
    ScalarGrid acc(img.height, img.width);
    for (int ch = 0; ch < img.channels; ++ch) {
        ScalarGrid plane(img.height, img.width);
        std::copy(img.data.begin() + ch * img.plane_size(),
                  img.data.begin() + (ch + 1) * img.plane_size(),
                  plane.values.begin());
        const ScalarGrid lap = laplacian(plane);
        for (std::size_t i = 0; i < acc.values.size(); ++i) {
            acc.values[i] += std::abs(lap.values[i]);
        }
    }
    const double scale = 1.0 / (8.0 * img.channels);
    for (double& v : acc.values) v *= scale;
    return acc;
}

}  // namespace topo
