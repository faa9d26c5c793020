#include "topo/topoimage.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "topo/cubical.hpp"
#include "topo/pipeline.hpp"

namespace topo {

PatchGrid make_patch_grid(int height, int width, int patch_size) {
    if (patch_size < 1) {
        throw std::invalid_argument(
            fmt::format("patch size {} must be positive", patch_size));
    }
    if (height < 1 || width < 1 || height % patch_size != 0 ||
        width % patch_size != 0) {
        throw std::invalid_argument(fmt::format(
            "patch size {} does not tile a {}x{} image exactly", patch_size,
            height, width));
    }
    return {patch_size, height / patch_size, width / patch_size};
}

void normalize_patch(std::span<double> values) {
    if (values.empty()) return;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double min = *lo, max = *hi;
    if (max == min) {
        std::fill(values.begin(), values.end(), 0.0);
        return;
    }
    const double inv = 1.0 / (max - min);
    for (double& v : values) v = (v - min) * inv;
}

TopoImage build_topoimage(const ScalarGrid& field, const TopoConfig& cfg,
                          int jobs) {
    cfg.pi.validate();
    const PatchGrid grid = make_patch_grid(field.rows, field.cols,
                                           cfg.patch_size);
    const std::size_t channels = vector_length(cfg.pi);
    TopoImage out{Tensor(channels, static_cast<std::size_t>(field.rows),
                         static_cast<std::size_t>(field.cols)),
                  grid};
    const int ps = grid.patch_size;
    const std::size_t plane = out.tensor.height() * out.tensor.width();

    parallel_for(
        static_cast<std::size_t>(grid.patch_count()), jobs,
        [&](std::size_t patch) {
            const int pr = static_cast<int>(patch) / grid.patch_cols;
            const int pc = static_cast<int>(patch) % grid.patch_cols;

            ScalarGrid local(ps, ps);
            for (int y = 0; y < ps; ++y) {
                for (int x = 0; x < ps; ++x) {
                    local.at(y, x) = field.at(pr * ps + y, pc * ps + x);
                }
            }
            normalize_patch(local.values);
            const std::vector<double> vec =
                flatten(vectorize(compute_diagram(local), cfg.pi));

            // Broadcast the patch's vector over its footprint: every pixel
            // of the patch carries the same channel values.
            for (std::size_t ch = 0; ch < channels; ++ch) {
                const float v = static_cast<float>(vec[ch]);
                float* base = out.tensor.data.data() + ch * plane;
                for (int y = 0; y < ps; ++y) {
                    float* row = base +
                                 (static_cast<std::size_t>(pr) * ps + y) *
                                     out.tensor.width() +
                                 static_cast<std::size_t>(pc) * ps;
                    std::fill(row, row + ps, v);
                }
            }
        });
    return out;
}

std::vector<TopoImage> build_multiview(const RasterImage& img,
                                       const TopoConfig& cfg, int jobs) {
    std::vector<TopoImage> views;
    views.reserve(cfg.filtrations.size());
    for (FiltrationKind kind : cfg.filtrations) {
        const ScalarGrid field = kind == FiltrationKind::Intensity
                                     ? intensity_filtration(img)
                                     : gradient_filtration(img);
        views.push_back(build_topoimage(field, cfg, jobs));
    }
    return views;
}

int suggest_patch_size(std::int64_t avg_object_pixels, int image_side) {
    static constexpr int kCandidates[] = {7, 14, 28, 56, 112};
    if (avg_object_pixels < 1 || image_side < 1) {
        throw std::invalid_argument(
            fmt::format("suggest_patch_size: object size {} and image side {} "
                        "must be positive",
                        avg_object_pixels, image_side));
    }
    int best = 0;
    std::int64_t best_gap = 0;
    for (int s : kCandidates) {
        if (image_side % s != 0) continue;
        const std::int64_t gap =
            std::abs(static_cast<std::int64_t>(s) * s - avg_object_pixels);
        if (best == 0 || gap < best_gap) {  // ties keep the smaller size
            best = s;
            best_gap = gap;
        }
    }
    if (best == 0) {
        throw std::invalid_argument(fmt::format(
            "suggest_patch_size: no candidate patch size divides image side {}",
            image_side));
    }
    return best;
}

}  // namespace topo
