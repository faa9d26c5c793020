#include "topo/fusion.hpp"

#include <fmt/format.h>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "topo/npy.hpp"

namespace topo {
namespace {

[[noreturn]] void shape_error(const std::string& what) {
    throw std::invalid_argument("fusion: " + what);
}

void check_same_plane(const Tensor& a, const Tensor& b, const char* what) {
    if (a.height() != b.height() || a.width() != b.width()) {
        shape_error(fmt::format("{}: spatial sizes {}x{} vs {}x{} differ",
                                what, a.height(), a.width(), b.height(),
                                b.width()));
    }
}

// Uniform in (0,1): 53-bit mantissa plus half-ulp offset so log() is safe.
double uniform_open(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Box-Muller normal deviates from an explicit uniform source. The standard
// library's normal_distribution is implementation-defined, which would make
// generated weights differ across toolchains.
class NormalSource {
  public:
    explicit NormalSource(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open(rng_);
        const double u2 = uniform_open(rng_);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

  private:
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

ConvBlockWeights make_block(NormalSource& normals, int in_ch, int out_ch) {
    ConvBlockWeights w;
    w.in_channels = in_ch;
    w.out_channels = out_ch;
    const double std_dev = std::sqrt(2.0 / (in_ch * 9.0));  // Kaiming fan-in
    w.kernel.resize(static_cast<std::size_t>(out_ch) * in_ch * 9);
    for (float& k : w.kernel) {
        k = static_cast<float>(normals.next() * std_dev);
    }
    w.bias.assign(out_ch, 0.0f);
    w.bn_gamma.assign(out_ch, 1.0f);
    w.bn_beta.assign(out_ch, 0.0f);
    w.bn_mean.assign(out_ch, 0.0f);
    w.bn_var.assign(out_ch, 1.0f);
    return w;
}

}  // namespace

void ConvBlockWeights::validate() const {
    if (in_channels < 1 || out_channels < 1) {
        shape_error(fmt::format("conv block has {}x{} channels", in_channels,
                                out_channels));
    }
    const std::size_t o = static_cast<std::size_t>(out_channels);
    if (kernel.size() != o * in_channels * 9) {
        shape_error(fmt::format(
            "kernel holds {} values, expected {} ({}x{}x3x3)", kernel.size(),
            o * in_channels * 9, out_channels, in_channels));
    }
    for (const auto* vec : {&bias, &bn_gamma, &bn_beta, &bn_mean, &bn_var}) {
        if (vec->size() != o) {
            shape_error(fmt::format(
                "per-channel parameter holds {} values, expected {}",
                vec->size(), o));
        }
    }
    for (float v : bn_var) {
        if (v < 0.0f) shape_error("negative batch-norm variance");
    }
}

Tensor conv_block_forward(const Tensor& x, const ConvBlockWeights& w) {
    w.validate();
    if (x.channels() != static_cast<std::size_t>(w.in_channels)) {
        shape_error(fmt::format("input has {} channels, block expects {}",
                                x.channels(), w.in_channels));
    }
    const std::size_t H = x.height(), W = x.width();
    const std::size_t I = x.channels(), O = w.out_channels;
    Tensor y(O, H, W);

    for (std::size_t o = 0; o < O; ++o) {
        const float inv_std = 1.0f / std::sqrt(w.bn_var[o] + w.bn_eps);
        const float gamma = w.bn_gamma[o], beta = w.bn_beta[o];
        const float mean = w.bn_mean[o], bias = w.bias[o];
        for (std::size_t yy = 0; yy < H; ++yy) {
            for (std::size_t xx = 0; xx < W; ++xx) {
                float acc = bias;
                for (std::size_t i = 0; i < I; ++i) {
                    const float* kern = w.kernel.data() + ((o * I + i) * 9);
                    for (int ky = 0; ky < 3; ++ky) {
                        const std::ptrdiff_t sy =
                            static_cast<std::ptrdiff_t>(yy) + ky - 1;
                        if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(H)) {
                            continue;  // zero padding
                        }
                        const float* row =
                            x.data.data() + (i * H + sy) * W;
                        for (int kx = 0; kx < 3; ++kx) {
                            const std::ptrdiff_t sx =
                                static_cast<std::ptrdiff_t>(xx) + kx - 1;
                            if (sx < 0 ||
                                sx >= static_cast<std::ptrdiff_t>(W)) {
                                continue;
                            }
                            acc += row[sx] * kern[ky * 3 + kx];
                        }
                    }
                }
                const float bn = (acc - mean) * inv_std * gamma + beta;
                y.at(o, yy, xx) = bn > 0.0f ? bn : 0.0f;
            }
        }
    }
    return y;
}

Tensor minmax_normalize(const Tensor& t) {
    float lo = std::numeric_limits<float>::infinity();
    float hi = -std::numeric_limits<float>::infinity();
    for (float v : t.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    Tensor out(t.channels(), t.height(), t.width());
    if (hi > lo) {
        const float inv = 1.0f / (hi - lo);
        for (std::size_t i = 0; i < t.data.size(); ++i) {
            out.data[i] = (t.data[i] - lo) * inv;
        }
    }
    return out;
}

Tensor cmvfm_fuse(const Tensor& img, std::span<const Tensor> views,
                  std::span<const CmvfmWeights> weights) {
    if (views.empty()) shape_error("cmvfm_fuse: no views");
    if (views.size() != weights.size()) {
        shape_error(fmt::format("cmvfm_fuse: {} views but {} weight sets",
                                views.size(), weights.size()));
    }

    Tensor sum;
    for (std::size_t v = 0; v < views.size(); ++v) {
        check_same_plane(img, views[v], "cmvfm_fuse");
        const CmvfmWeights& w = weights[v];
        if (w.block1.out_channels != w.block2.in_channels) {
            shape_error(fmt::format(
                "cmvfm_fuse: view {} blocks disagree on mid channels ({} vs {})",
                v, w.block1.out_channels, w.block2.in_channels));
        }
        if (w.block2.out_channels != static_cast<int>(img.channels())) {
            shape_error(fmt::format(
                "cmvfm_fuse: view {} compresses to {} channels, image has {}",
                v, w.block2.out_channels, img.channels()));
        }
        const Tensor compressed =
            conv_block_forward(conv_block_forward(views[v], w.block1),
                               w.block2);
        Tensor fused(img.channels(), img.height(), img.width());
        for (std::size_t i = 0; i < fused.data.size(); ++i) {
            fused.data[i] = img.data[i] + compressed.data[i];
        }
        fused = minmax_normalize(fused);
        if (views.size() == 1) return fused;  // nothing further to combine
        if (v == 0) {
            sum = std::move(fused);
        } else {
            for (std::size_t i = 0; i < sum.data.size(); ++i) {
                sum.data[i] += fused.data[i];
            }
        }
    }
    return minmax_normalize(sum);
}

Tensor fuse_concat(const Tensor& img, std::span<const Tensor> views) {
    std::size_t channels = img.channels();
    for (const Tensor& v : views) {
        check_same_plane(img, v, "fuse_concat");
        channels += v.channels();
    }
    Tensor out(channels, img.height(), img.width());
    auto it = std::copy(img.data.begin(), img.data.end(), out.data.begin());
    for (const Tensor& v : views) {
        it = std::copy(v.data.begin(), v.data.end(), it);
    }
    return out;
}

Tensor fuse_meanpool(const Tensor& img, std::span<const Tensor> views) {
    const std::size_t C_img = img.channels();
    Tensor out = img;  // running sum, divided at the end
    for (const Tensor& v : views) {
        check_same_plane(img, v, "fuse_meanpool");
        if (v.channels() < C_img) {
            shape_error(fmt::format(
                "fuse_meanpool: view has {} channels, fewer than the image's {}",
                v.channels(), C_img));
        }
        const std::size_t group = (v.channels() + C_img - 1) / C_img;
        const std::size_t plane = img.height() * img.width();
        for (std::size_t o = 0; o < C_img; ++o) {
            const std::size_t first = o * group;
            const std::size_t last = std::min(first + group, v.channels());
            for (std::size_t p = 0; p < plane; ++p) {
                float acc = 0.0f;
                for (std::size_t c = first; c < last; ++c) {
                    acc += v.data[c * plane + p];
                }
                out.data[o * plane + p] += acc / (last - first);
            }
        }
    }
    const float inv = 1.0f / (1.0f + views.size());
    for (float& x : out.data) x *= inv;
    return out;
}

std::vector<CmvfmWeights> init_weights(std::uint64_t seed, int num_views,
                                       int view_channels, int mid_channels,
                                       int img_channels) {
    if (num_views < 1 || view_channels < 1 || mid_channels < 1 ||
        img_channels < 1) {
        shape_error("init_weights: all dimensions must be positive");
    }
    NormalSource normals(seed);
    std::vector<CmvfmWeights> out;
    out.reserve(num_views);
    for (int v = 0; v < num_views; ++v) {
        CmvfmWeights w;
        w.block1 = make_block(normals, view_channels, mid_channels);
        w.block2 = make_block(normals, mid_channels, img_channels);
        out.push_back(std::move(w));
    }
    return out;
}

namespace {

using nlohmann::json;

constexpr const char* kArrayKeys[] = {"kernel",  "bias",    "bn_gamma",
                                      "bn_beta", "bn_mean", "bn_var"};

std::vector<float>& block_array(ConvBlockWeights& w, const std::string& key) {
    if (key == "kernel") return w.kernel;
    if (key == "bias") return w.bias;
    if (key == "bn_gamma") return w.bn_gamma;
    if (key == "bn_beta") return w.bn_beta;
    if (key == "bn_mean") return w.bn_mean;
    return w.bn_var;
}

const std::vector<float>& block_array(const ConvBlockWeights& w,
                                      const std::string& key) {
    if (key == "kernel") return w.kernel;
    if (key == "bias") return w.bias;
    if (key == "bn_gamma") return w.bn_gamma;
    if (key == "bn_beta") return w.bn_beta;
    if (key == "bn_mean") return w.bn_mean;
    return w.bn_var;
}

json save_block(const std::filesystem::path& dir, const ConvBlockWeights& w,
                int view, int block) {
    const auto name = [&](const char* role) {
        return fmt::format("v{}_b{}_{}.npy", view, block, role);
    };
    const std::size_t o = static_cast<std::size_t>(w.out_channels);
    write_npy(dir / name("kernel"),
              std::array<std::size_t, 4>{o,
                                         static_cast<std::size_t>(w.in_channels),
                                         3, 3},
              w.kernel);
    json j;
    j["kernel"] = name("kernel");
    for (const char* key : kArrayKeys) {
        if (std::string(key) == "kernel") continue;
        write_npy(dir / name(key), std::array<std::size_t, 1>{o},
                  block_array(w, key));
        j[key] = name(key);
    }
    j["bn_eps"] = w.bn_eps;
    return j;
}

ConvBlockWeights load_block(const std::filesystem::path& dir, const json& j,
                            const std::string& where) {
    ConvBlockWeights w;
    for (const char* key : kArrayKeys) {
        if (!j.contains(key)) {
            throw std::runtime_error(
                fmt::format("weights manifest: {} lacks \"{}\"", where, key));
        }
        NpyArray arr = read_npy(dir / j.at(key).get<std::string>());
        if (std::string(key) == "kernel") {
            if (arr.shape.size() != 4 || arr.shape[2] != 3 ||
                arr.shape[3] != 3) {
                throw std::runtime_error(fmt::format(
                    "weights manifest: {} kernel is not (out,in,3,3)", where));
            }
            w.out_channels = static_cast<int>(arr.shape[0]);
            w.in_channels = static_cast<int>(arr.shape[1]);
        }
        block_array(w, key) = std::move(arr.data);
    }
    w.bn_eps = static_cast<float>(j.value("bn_eps", 1e-5));
    w.validate();
    return w;
}

}  // namespace

void save_weights_dir(const std::filesystem::path& dir,
                      std::span<const CmvfmWeights> weights) {
    std::filesystem::create_directories(dir);
    json manifest;
    manifest["views"] = json::array();
    for (std::size_t v = 0; v < weights.size(); ++v) {
        weights[v].block1.validate();
        weights[v].block2.validate();
        json entry;
        entry["block1"] =
            save_block(dir, weights[v].block1, static_cast<int>(v), 1);
        entry["block2"] =
            save_block(dir, weights[v].block2, static_cast<int>(v), 2);
        manifest["views"].push_back(std::move(entry));
    }
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    if (!out) {
        throw std::runtime_error(
            fmt::format("{}: cannot write manifest.json", dir.string()));
    }
    out << manifest.dump(2) << '\n';
}

std::vector<CmvfmWeights> load_weights_dir(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) {
        throw std::runtime_error(
            fmt::format("{}: cannot open manifest.json", dir.string()));
    }
    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw std::runtime_error(fmt::format("{}: malformed manifest.json: {}",
                                             dir.string(), e.what()));
    }
    if (!manifest.contains("views") || !manifest["views"].is_array() ||
        manifest["views"].empty()) {
        throw std::runtime_error(fmt::format(
            "{}: manifest.json lacks a non-empty \"views\" array",
            dir.string()));
    }
    std::vector<CmvfmWeights> out;
    for (std::size_t v = 0; v < manifest["views"].size(); ++v) {
        const json& entry = manifest["views"][v];
        const std::string where = fmt::format("view {}", v);
        if (!entry.contains("block1") || !entry.contains("block2")) {
            throw std::runtime_error(fmt::format(
                "weights manifest: {} lacks block1/block2", where));
        }
        CmvfmWeights w;
        w.block1 = load_block(dir, entry["block1"], where + " block1");
        w.block2 = load_block(dir, entry["block2"], where + " block2");
        if (w.block1.out_channels != w.block2.in_channels) {
            throw std::runtime_error(fmt::format(
                "weights manifest: {} blocks disagree on mid channels", where));
        }
        out.push_back(std::move(w));
    }
    return out;
}

}  // namespace topo
