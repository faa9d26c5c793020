#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "topo/filtration.hpp"
#include "topo/image.hpp"
#include "topo/persistence_image.hpp"

namespace topo {

/// Exact tiling of an image by square patches. Constructible only when the
/// patch size divides both image sides.
struct PatchGrid {
    int patch_size = 0;
    int patch_rows = 0;
    int patch_cols = 0;

    int patch_count() const { return patch_rows * patch_cols; }
};

/// Validates and builds the tiling; throws std::invalid_argument naming
/// height, width and patch_size when the division is not exact.
PatchGrid make_patch_grid(int height, int width, int patch_size);

/// Settings for one TopoImage build.
struct TopoConfig {
    int patch_size = 28;
    PIConfig pi;
    std::vector<FiltrationKind> filtrations{FiltrationKind::Intensity,
                                            FiltrationKind::Gradient};

    friend bool operator==(const TopoConfig&, const TopoConfig&) = default;
};

/// Multi-channel encoding of an image's local topology: channel vector at
/// pixel (y,x) is the flattened persistence image of the patch containing
/// (y,x), so every patch footprint is constant across all channels.
struct TopoImage {
    Tensor tensor;  // (channels, height, width)
    PatchGrid grid;
};

/// Min-max normalization to [0,1] in place; a constant span maps to zeros.
void normalize_patch(std::span<double> values);

/// Builds one TopoImage from a scalar field: per patch, normalize the patch,
/// compute its diagram, vectorize, and broadcast the flattened vector over
/// the patch footprint. Channel count is vector_length(cfg.pi). `jobs` > 1
/// distributes patches over that many threads; results are byte-identical
/// regardless (patch writes are disjoint).
TopoImage build_topoimage(const ScalarGrid& field, const TopoConfig& cfg,
                          int jobs = 1);

/// One TopoImage per configured filtration, in cfg.filtrations order.
std::vector<TopoImage> build_multiview(const RasterImage& img,
                                       const TopoConfig& cfg, int jobs = 1);

/// Picks the patch size whose pixel count s^2 is closest to the average
/// object size, from candidates {7,14,28,56,112} restricted to divisors of
/// image_side (ties: smaller size). Throws std::invalid_argument when no
/// candidate divides image_side.
int suggest_patch_size(std::int64_t avg_object_pixels, int image_side);

}  // namespace topo
