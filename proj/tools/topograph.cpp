// topograph — persistent-homology image encodings from the command line.
//
// Subcommands: diagram, topoimage, fuse, check, suggest-patch. Exit codes:
// 0 on success, 1 on invalid input or per-file failures, 2 when the internal
// self-check fails.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "topo/cubical.hpp"
#include "topo/filtration.hpp"
#include "topo/fusion.hpp"
#include "topo/image.hpp"
#include "topo/pipeline.hpp"
#include "topo/topoimage.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kDefaultMidChannels = 16;

// Shared pipeline options: a JSON config file plus per-flag overrides
// (explicitly passed flags win over the file).
struct CommonOpts {
    std::string config_path;
    int patch_size = 28;
    std::string pi_res = "7x7";
    double sigma = 0.05;
    std::string pi_mode = "combined";
    std::string filtrations = "intensity,gradient";
    std::string fusion = "none";
    std::string weights;
    std::uint64_t seed = 0;
    std::string out = ".";
    int jobs = 1;

    CLI::Option* o_patch = nullptr;
    CLI::Option* o_res = nullptr;
    CLI::Option* o_sigma = nullptr;
    CLI::Option* o_mode = nullptr;
    CLI::Option* o_filt = nullptr;
    CLI::Option* o_fusion = nullptr;
    CLI::Option* o_weights = nullptr;
    CLI::Option* o_seed = nullptr;
    CLI::Option* o_out = nullptr;
    CLI::Option* o_jobs = nullptr;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path,
                        "JSON config file (flags override its keys)");
        o_patch = cmd->add_option("--patch-size", patch_size,
                                  "Square patch side in pixels");
        o_res = cmd->add_option("--pi-res", pi_res,
                                "Persistence-image resolution, e.g. 7x7");
        o_sigma = cmd->add_option("--sigma", sigma,
                                  "Gaussian spread of the persistence image");
        o_mode = cmd->add_option(
            "--pi-mode", pi_mode,
            "Persistence-image mode: combined|per_dimension");
        o_filt = cmd->add_option("--filtrations", filtrations,
                                 "Comma-separated views: intensity,gradient");
        o_fusion = cmd->add_option("--fusion", fusion,
                                   "Fusion mode: none|cmvfm|concat|meanpool");
        o_weights = cmd->add_option("--weights", weights,
                                    "Weight directory for cmvfm fusion");
        o_seed = cmd->add_option(
            "--seed", seed, "Seed for generated cmvfm weights");
        o_out = cmd->add_option("--out", out, "Output directory");
        o_jobs = cmd->add_option("--jobs", jobs,
                                 "Worker threads for patch processing");
    }

    topo::PipelineConfig resolve() const {
        topo::PipelineConfig cfg;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) {
                throw std::invalid_argument(
                    fmt::format("{}: cannot open config", config_path));
            }
            const std::string text{std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>()};
            cfg = topo::parse_config(text);
        }
        if (o_patch->count()) cfg.patch_size = patch_size;
        if (o_res->count()) {
            int r = 0, c = 0;
            char x = 0;
            if (std::sscanf(pi_res.c_str(), "%d%c%d", &r, &x, &c) != 3 ||
                x != 'x') {
                throw std::invalid_argument(fmt::format(
                    "--pi-res \"{}\" is not of the form <rows>x<cols>",
                    pi_res));
            }
            cfg.pi_rows = r;
            cfg.pi_cols = c;
        }
        if (o_sigma->count()) cfg.sigma = sigma;
        if (o_mode->count()) {
            if (pi_mode == "combined") {
                cfg.pi_mode = topo::PIConfig::Mode::Combined;
            } else if (pi_mode == "per_dimension") {
                cfg.pi_mode = topo::PIConfig::Mode::PerDimension;
            } else {
                throw std::invalid_argument(fmt::format(
                    "--pi-mode \"{}\" is not combined|per_dimension",
                    pi_mode));
            }
        }
        if (o_filt->count()) {
            cfg.filtrations.clear();
            std::string rest = filtrations;
            while (!rest.empty()) {
                const std::size_t comma = rest.find(',');
                cfg.filtrations.push_back(topo::filtration_from_string(
                    rest.substr(0, comma)));
                rest = comma == std::string::npos ? ""
                                                  : rest.substr(comma + 1);
            }
        }
        if (o_fusion->count()) cfg.fusion = topo::fusion_from_string(fusion);
        if (o_weights->count()) cfg.weights_dir = weights;
        if (o_seed->count()) cfg.seed = seed;
        if (o_out->count()) cfg.out_dir = out;
        if (o_jobs->count()) cfg.jobs = jobs;
        cfg.validate();
        return cfg;
    }
};

// Expands mixed file/directory arguments: directories contribute their
// entries with the given extension, sorted by name.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& args,
                                    const std::string& extension) {
    std::vector<fs::path> paths;
    for (const std::string& arg : args) {
        const fs::path p(arg);
        if (fs::is_directory(p)) {
            std::vector<fs::path> inner;
            for (const auto& entry : fs::directory_iterator(p)) {
                if (entry.path().extension() == extension) {
                    inner.push_back(entry.path());
                }
            }
            std::sort(inner.begin(), inner.end());
            paths.insert(paths.end(), inner.begin(), inner.end());
        } else {
            paths.push_back(p);
        }
    }
    if (paths.empty()) {
        throw std::invalid_argument(
            fmt::format("no {} inputs found", extension));
    }
    return paths;
}

topo::ScalarGrid field_of(const topo::RasterImage& img,
                          topo::FiltrationKind kind) {
    return kind == topo::FiltrationKind::Intensity
               ? topo::intensity_filtration(img)
               : topo::gradient_filtration(img);
}

int cmd_diagram(const std::string& image, const std::string& filtration,
                const std::string& patch, int patch_size, bool normalize) {
    const topo::RasterImage img = topo::load_image(image);
    topo::ScalarGrid field =
        field_of(img, topo::filtration_from_string(filtration));

    if (!patch.empty()) {
        const topo::PatchGrid grid =
            topo::make_patch_grid(field.rows, field.cols, patch_size);
        int pr = 0, pc = 0;
        char sep = 0;
        if (std::sscanf(patch.c_str(), "%d%c%d", &pr, &sep, &pc) != 3 ||
            sep != ',') {
            throw std::invalid_argument(fmt::format(
                "--patch \"{}\" is not of the form <row>,<col>", patch));
        }
        if (pr < 0 || pr >= grid.patch_rows || pc < 0 ||
            pc >= grid.patch_cols) {
            throw std::invalid_argument(fmt::format(
                "patch ({},{}) outside the {}x{} patch grid", pr, pc,
                grid.patch_rows, grid.patch_cols));
        }
        topo::ScalarGrid local(patch_size, patch_size);
        for (int y = 0; y < patch_size; ++y) {
            for (int x = 0; x < patch_size; ++x) {
                local.at(y, x) = field.at(pr * patch_size + y,
                                          pc * patch_size + x);
            }
        }
        field = std::move(local);
    }
    if (normalize) topo::normalize_patch(field.values);

    fmt::print("{}", topo::format_diagram(topo::compute_diagram(field)));
    return 0;
}

int cmd_topoimage(const std::vector<std::string>& inputs,
                  const topo::PipelineConfig& cfg, int preview_channel) {
    const std::vector<fs::path> paths = expand_inputs(inputs, ".png");
    fs::create_directories(cfg.out_dir);

    std::vector<std::string> failures;
    for (const fs::path& input : paths) {
        try {
            const topo::RasterImage img = topo::load_image(input);
            const std::vector<topo::TopoImage> views =
                topo::build_multiview(img, cfg.topo(), cfg.jobs);
            for (std::size_t i = 0; i < views.size(); ++i) {
                const fs::path out =
                    fs::path(cfg.out_dir) /
                    topo::view_file_name(input, cfg.filtrations[i]);
                topo::export_tensor(views[i].tensor, out);
                fmt::print("wrote {}\n", out.string());
                if (preview_channel >= 0) {
                    const fs::path png =
                        fs::path(cfg.out_dir) /
                        fmt::format("{}.{}.ch{}.png", input.stem().string(),
                                    topo::to_string(cfg.filtrations[i]),
                                    preview_channel);
                    topo::export_png_preview(
                        views[i].tensor,
                        static_cast<std::size_t>(preview_channel), png);
                    fmt::print("wrote {}\n", png.string());
                }
            }
        } catch (const std::exception& e) {
            failures.push_back(fmt::format("{}: {}", input.string(),
                                           e.what()));
        }
    }
    for (const std::string& f : failures) {
        fmt::print(stderr, "error: {}\n", f);
    }
    return failures.empty() ? 0 : 1;
}

int cmd_fuse(const std::string& image, const std::vector<std::string>& views,
             const topo::PipelineConfig& cfg, int mid_channels) {
    const topo::RasterImage raster = topo::load_image(image);
    const topo::Tensor img = topo::to_tensor(raster);

    std::vector<topo::Tensor> view_tensors;
    for (const fs::path& p : expand_inputs(views, ".npy")) {
        view_tensors.push_back(topo::import_tensor(p));
    }

    topo::Tensor fused;
    switch (cfg.fusion) {
        case topo::PipelineConfig::Fusion::None:
            throw std::invalid_argument(
                "fuse requires --fusion cmvfm|concat|meanpool");
        case topo::PipelineConfig::Fusion::Concat:
            fused = topo::fuse_concat(img, view_tensors);
            break;
        case topo::PipelineConfig::Fusion::Meanpool:
            fused = topo::fuse_meanpool(img, view_tensors);
            break;
        case topo::PipelineConfig::Fusion::Cmvfm: {
            std::vector<topo::CmvfmWeights> weights;
            if (cfg.weights_dir) {
                weights = topo::load_weights_dir(*cfg.weights_dir);
            } else {
                for (const topo::Tensor& v : view_tensors) {
                    if (v.channels() != view_tensors.front().channels()) {
                        throw std::invalid_argument(
                            "views with differing channel counts need a "
                            "weights directory");
                    }
                }
                weights = topo::init_weights(
                    *cfg.seed, static_cast<int>(view_tensors.size()),
                    static_cast<int>(view_tensors.front().channels()),
                    mid_channels, static_cast<int>(img.channels()));
            }
            fused = topo::cmvfm_fuse(img, view_tensors, weights);
            break;
        }
    }

    fs::create_directories(cfg.out_dir);
    const fs::path out =
        fs::path(cfg.out_dir) /
        fmt::format("{}.fused.npy", fs::path(image).stem().string());
    topo::export_tensor(fused, out);
    fmt::print("wrote {}\n", out.string());
    return 0;
}

int cmd_check(int grids, std::uint64_t seed, bool corrupt_pairing) {
    const topo::CheckReport report =
        topo::run_self_check(grids, seed, corrupt_pairing);
    fmt::print("oracle equivalence: {}/{} diagrams match\n",
               report.diagrams_matched, report.grids);
    fmt::print("euler identity:     {}/{} grids consistent\n",
               report.euler_consistent, report.grids);
    fmt::print("wall clock:         {:.3f} ms/diagram\n",
               report.ms_per_diagram);
    fmt::print("self-check {}\n", report.passed() ? "PASSED" : "FAILED");
    return report.passed() ? 0 : 2;
}

int cmd_suggest_patch(std::int64_t avg_object_pixels, int side) {
    fmt::print("{}\n", topo::suggest_patch_size(avg_object_pixels, side));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Topological image encodings via cubical persistence"};
    app.require_subcommand(1);

    // diagram
    auto* diagram = app.add_subcommand(
        "diagram", "Print the persistence diagram of one image");
    std::string d_image, d_filtration = "intensity", d_patch;
    int d_patch_size = 28;
    bool d_normalize = false;
    diagram->add_option("image", d_image, "PNG input")->required();
    diagram->add_option("--filtration", d_filtration,
                        "intensity|gradient");
    diagram->add_option("--patch", d_patch,
                        "Restrict to patch <row>,<col> of the tiling");
    diagram->add_option("--patch-size", d_patch_size,
                        "Patch side used with --patch");
    diagram->add_flag("--normalize", d_normalize,
                      "Min-max normalize the field before the diagram");

    // topoimage
    auto* topoimage = app.add_subcommand(
        "topoimage", "Build TopoImage tensors for PNG inputs");
    std::vector<std::string> t_inputs;
    int t_preview = -1;
    topoimage->add_option("inputs", t_inputs, "PNG files or directories")
        ->required();
    topoimage->add_option("--preview", t_preview,
                          "Also write a PNG preview of this channel");
    CommonOpts t_opts;
    t_opts.attach(topoimage);

    // fuse
    auto* fuse = app.add_subcommand(
        "fuse", "Fuse TopoImage views with their source image");
    std::string f_image;
    std::vector<std::string> f_views;
    int f_mid_channels = kDefaultMidChannels;
    fuse->add_option("image", f_image, "PNG input")->required();
    fuse->add_option("--views", f_views, "NPY view files or directories")
        ->required();
    fuse->add_option("--mid-channels", f_mid_channels,
                     "Hidden width of generated cmvfm weights");
    CommonOpts f_opts;
    f_opts.attach(fuse);

    // check
    auto* check = app.add_subcommand(
        "check", "Cross-validate the persistence engine against its oracle");
    int c_grids = 100;
    std::uint64_t c_seed = 7;
    bool c_corrupt = false;
    check->add_option("--grids", c_grids, "Number of random grids");
    check->add_option("--seed", c_seed, "Grid generator seed");
    check->add_flag("--corrupt-pairing", c_corrupt)->group("");  // test hook

    // suggest-patch
    auto* suggest = app.add_subcommand(
        "suggest-patch", "Recommend a patch size for an object scale");
    std::int64_t s_pixels = 0;
    int s_side = 224;
    suggest->add_option("avg_object_pixels", s_pixels,
                        "Average object size in pixels")
        ->required();
    suggest->add_option("--side", s_side, "Image side length");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(diagram)) {
            return cmd_diagram(d_image, d_filtration, d_patch, d_patch_size,
                               d_normalize);
        }
        if (app.got_subcommand(topoimage)) {
            return cmd_topoimage(t_inputs, t_opts.resolve(), t_preview);
        }
        if (app.got_subcommand(fuse)) {
            return cmd_fuse(f_image, f_views, f_opts.resolve(),
                            f_mid_channels);
        }
        if (app.got_subcommand(check)) {
            return cmd_check(c_grids, c_seed, c_corrupt);
        }
        if (app.got_subcommand(suggest)) {
            return cmd_suggest_patch(s_pixels, s_side);
        }
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
    return 0;
}
