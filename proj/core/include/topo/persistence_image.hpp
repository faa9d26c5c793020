#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "topo/cubical.hpp"

namespace topo {

/// Persistence-image rasterization settings. Ranges are fixed rather than
/// data-driven so that every patch of every image lands in the same feature
/// space; inputs are expected to be min-max normalized to [0,1] upstream.
struct PIConfig {
    int rows = 7;
    int cols = 7;
    double sigma = 0.05;
    std::array<double, 2> birth_range{0.0, 1.0};
    std::array<double, 2> persistence_range{0.0, 1.0};

    /// Combined: all dimensions pooled into one image. PerDimension: one
    /// image per homology dimension (0 then 1).
    enum class Mode { Combined, PerDimension };
    Mode mode = Mode::Combined;

    /// Throws std::invalid_argument on non-positive resolution/sigma or
    /// empty ranges.
    void validate() const;

    friend bool operator==(const PIConfig&, const PIConfig&) = default;
};

/// Rasterized diagram: rows x cols weights. Row 0 is the top of the
/// persistence axis (highest persistence), columns run birth-ascending.
struct PersistenceImage {
    int rows = 0;
    int cols = 0;
    std::vector<double> weights;

    double at(int r, int c) const {
        return weights[static_cast<std::size_t>(r) * cols + c];
    }
};

/// Diagram points in birth-persistence coordinates: (b, d) -> (b, b - d).
/// `dim` = -1 pools all dimensions. Essential and finite pairs alike are
/// mapped; zero-persistence points are kept (their weight is zero).
std::vector<std::array<double, 2>> birth_persistence_points(
    const PersistenceDiagram& d, int dim = -1);

/// Rasterizes points (already in birth-persistence coordinates) onto the
/// configured grid: each point contributes its exactly-integrated isotropic
/// Gaussian (per-cell product of 1D normal CDF differences) scaled by the
/// linear weight persistence / persistence_range.max.
PersistenceImage rasterize_points(
    const std::vector<std::array<double, 2>>& points, const PIConfig& cfg);

/// Vectorizes a diagram per cfg.mode: one image (Combined) or one per
/// dimension, dim 0 first (PerDimension).
std::vector<PersistenceImage> vectorize(const PersistenceDiagram& d,
                                        const PIConfig& cfg);

/// Row-major flattening of one image.
std::vector<double> flatten(const PersistenceImage& img);

/// Flattening of a whole vectorize() result: images concatenated in order.
std::vector<double> flatten(const std::vector<PersistenceImage>& imgs);

/// Number of values flatten(vectorize(...)) produces under cfg.
std::size_t vector_length(const PIConfig& cfg);

/// Lipschitz constant L such that two diagrams at 1-Wasserstein distance w
/// (L-inf ground metric, per dimension) yield persistence images with
/// ||PI(a) - PI(b)||_inf <= L * w. Derived from the sup-gradient of the
/// integrated Gaussian cell response plus the weight function's variation,
/// including the factor-2 stretch of the (b,d) -> (b,b-d) transform.
double stability_constant(const PIConfig& cfg);

}  // namespace topo
