#include "topo/persistence_image.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace topo {
namespace {

// Standard normal CDF.
double phi(double t) { return 0.5 * std::erfc(-t * std::numbers::sqrt2 / 2.0); }

}  // namespace

void PIConfig::validate() const {
    if (rows < 1 || cols < 1) {
        throw std::invalid_argument(
            fmt::format("PIConfig: resolution {}x{} must be positive", rows,
                        cols));
    }
    if (!(sigma > 0.0)) {
        throw std::invalid_argument(
            fmt::format("PIConfig: sigma {} must be positive", sigma));
    }
    if (!(birth_range[1] > birth_range[0]) ||
        !(persistence_range[1] > persistence_range[0])) {
        throw std::invalid_argument("PIConfig: ranges must be non-empty");
    }
    if (!(persistence_range[1] > 0.0)) {
        throw std::invalid_argument(
            "PIConfig: persistence range must extend above zero (it scales "
            "the linear weight)");
    }
}

std::vector<std::array<double, 2>> birth_persistence_points(
    const PersistenceDiagram& d, int dim) {
    std::vector<std::array<double, 2>> pts;
    pts.reserve(d.pairs.size());
    for (const PersistencePair& p : d.pairs) {
        if (dim >= 0 && p.dim != dim) continue;
        pts.push_back({p.birth, p.birth - p.death});
    }
    return pts;
}

PersistenceImage rasterize_points(
    const std::vector<std::array<double, 2>>& points, const PIConfig& cfg) {
    cfg.validate();
    PersistenceImage img{cfg.rows, cfg.cols,
                         std::vector<double>(
                             static_cast<std::size_t>(cfg.rows) * cfg.cols,
                             0.0)};
    const double b0 = cfg.birth_range[0], b1 = cfg.birth_range[1];
    const double p0 = cfg.persistence_range[0], p1 = cfg.persistence_range[1];
    const double dx = (b1 - b0) / cfg.cols;
    const double dy = (p1 - p0) / cfg.rows;

    for (const auto& [b, pers] : points) {
        // Linear weighting: zero on the diagonal, 1 at the top of the
        // persistence window. Zero-persistence points thus contribute
        // nothing but are accepted.
        const double w = pers / p1;
        if (w == 0.0) continue;
        for (int col = 0; col < cfg.cols; ++col) {
            const double xlo = b0 + col * dx, xhi = xlo + dx;
            const double wx =
                phi((xhi - b) / cfg.sigma) - phi((xlo - b) / cfg.sigma);
            for (int row = 0; row < cfg.rows; ++row) {
                // Row 0 is the top of the persistence axis.
                const double yhi = p1 - row * dy, ylo = yhi - dy;
                const double wy = phi((yhi - pers) / cfg.sigma) -
                                  phi((ylo - pers) / cfg.sigma);
                img.weights[static_cast<std::size_t>(row) * cfg.cols + col] +=
                    w * wx * wy;
            }
        }
    }
    return img;
}

std::vector<PersistenceImage> vectorize(const PersistenceDiagram& d,
                                        const PIConfig& cfg) {
    cfg.validate();
    std::vector<PersistenceImage> out;
    if (cfg.mode == PIConfig::Mode::Combined) {
        out.push_back(rasterize_points(birth_persistence_points(d), cfg));
    } else {
        out.push_back(rasterize_points(birth_persistence_points(d, 0), cfg));
        out.push_back(rasterize_points(birth_persistence_points(d, 1), cfg));
    }
    return out;
}

std::vector<double> flatten(const PersistenceImage& img) { return img.weights; }

std::vector<double> flatten(const std::vector<PersistenceImage>& imgs) {
    std::vector<double> out;
    for (const PersistenceImage& img : imgs) {
        out.insert(out.end(), img.weights.begin(), img.weights.end());
    }
    return out;
}

std::size_t vector_length(const PIConfig& cfg) {
    const std::size_t per = static_cast<std::size_t>(cfg.rows) * cfg.cols;
    return cfg.mode == PIConfig::Mode::PerDimension ? 2 * per : per;
}

double stability_constant(const PIConfig& cfg) {
    cfg.validate();
    // Per-axis sup-derivative of the integrated cell response is
    // phi_pdf(0)/sigma = 1/(sigma*sqrt(2*pi)); the (b,d) -> (b, b-d) map
    // stretches an L-inf perturbation by at most 2 along the persistence
    // axis, giving 3 gradient terms in total, and the linear weight varies
    // by at most 2*eps/p_max over the same move (this term also covers
    // points matched to the diagonal, whose whole contribution is bounded
    // by their weight).
    const double max_w = 1.0;
    const double lip_w = 1.0 / cfg.persistence_range[1];
    const double gauss =
        1.0 / (cfg.sigma * std::sqrt(2.0 * std::numbers::pi));
    return 3.0 * max_w * gauss + 2.0 * lip_w;
}

}  // namespace topo
