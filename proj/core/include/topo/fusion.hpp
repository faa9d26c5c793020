#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "topo/image.hpp"

namespace topo {

/// Weights of one conv block: 3x3 convolution (stride 1, zero padding 1,
/// with bias) followed by inference-mode batch norm and ReLU.
struct ConvBlockWeights {
    int in_channels = 0;
    int out_channels = 0;
    std::vector<float> kernel;  // (out, in, 3, 3), C-order
    std::vector<float> bias;    // (out)
    std::vector<float> bn_gamma, bn_beta, bn_mean, bn_var;  // (out) each
    float bn_eps = 1e-5f;

    /// Throws std::invalid_argument on any shape mismatch or negative
    /// variance entries.
    void validate() const;
};

/// Per-view compression network: view channels -> mid channels -> image
/// channels.
struct CmvfmWeights {
    ConvBlockWeights block1;
    ConvBlockWeights block2;
};

/// y = relu(bn(conv(x))) with bn(v) = (v - mean)/sqrt(var + eps) * gamma
/// + beta per output channel. Spatial size is preserved.
Tensor conv_block_forward(const Tensor& x, const ConvBlockWeights& w);

/// Min-max normalization of a whole tensor to [0,1]; constant input maps to
/// zeros. Exposed because the fusion contract is phrased in terms of it.
Tensor minmax_normalize(const Tensor& t);

/// Forward-only cross-modal fusion: each view is compressed to the image's
/// channel count by its two conv blocks, added to the image, and min-max
/// normalized; multiple fused views are summed and normalized once more (a
/// single view is returned directly after its own normalization). Output
/// shape equals img's, values in [0,1].
Tensor cmvfm_fuse(const Tensor& img, std::span<const Tensor> views,
                  std::span<const CmvfmWeights> weights);

/// Channel concatenation: img's channels first, then each view's.
Tensor fuse_concat(const Tensor& img, std::span<const Tensor> views);

/// Channel mean-pooling baseline: each view is reduced to img's channel
/// count by averaging groups of ceil(C/C_img) consecutive channels (last
/// group may be short), then img and the reduced views are averaged.
Tensor fuse_meanpool(const Tensor& img, std::span<const Tensor> views);

/// Deterministic weights for `views` compression networks drawn from one
/// seeded stream: Kaiming-normal kernels (std = sqrt(2/(in*9))), zero bias,
/// identity batch norm (gamma=1, beta=0, mean=0, var=1).
std::vector<CmvfmWeights> init_weights(std::uint64_t seed, int num_views,
                                       int view_channels, int mid_channels,
                                       int img_channels);

/// Weight directory I/O: manifest.json listing per-view/per-block NPY array
/// files plus bn_eps. save writes arrays as NPY v1.0 <f4.
void save_weights_dir(const std::filesystem::path& dir,
                      std::span<const CmvfmWeights> weights);
std::vector<CmvfmWeights> load_weights_dir(const std::filesystem::path& dir);

}  // namespace topo
