#include "topo/pipeline.hpp"

#include <fmt/format.h>

#include <chrono>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "topo/cubical.hpp"

namespace topo {

TopoConfig PipelineConfig::topo() const {
    TopoConfig t;
    t.patch_size = patch_size;
    t.pi.rows = pi_rows;
    t.pi.cols = pi_cols;
    t.pi.sigma = sigma;
    t.pi.mode = pi_mode;
    t.filtrations = filtrations;
    return t;
}

void PipelineConfig::validate() const {
    topo().pi.validate();
    if (patch_size < 1) {
        throw std::invalid_argument(
            fmt::format("config: patch_size {} must be positive", patch_size));
    }
    if (jobs < 1) {
        throw std::invalid_argument(
            fmt::format("config: jobs {} must be positive", jobs));
    }
    if (filtrations.empty()) {
        throw std::invalid_argument("config: no filtrations selected");
    }
    if (fusion == Fusion::Cmvfm && !weights_dir && !seed) {
        throw std::invalid_argument(
            "config: cmvfm fusion needs either a weights directory or a seed");
    }
}

std::string to_string(PipelineConfig::Fusion f) {
    switch (f) {
        case PipelineConfig::Fusion::None: return "none";
        case PipelineConfig::Fusion::Cmvfm: return "cmvfm";
        case PipelineConfig::Fusion::Concat: return "concat";
        case PipelineConfig::Fusion::Meanpool: return "meanpool";
    }
    throw std::invalid_argument("unknown fusion mode");
}

PipelineConfig::Fusion fusion_from_string(std::string_view name) {
    if (name == "none") return PipelineConfig::Fusion::None;
    if (name == "cmvfm") return PipelineConfig::Fusion::Cmvfm;
    if (name == "concat") return PipelineConfig::Fusion::Concat;
    if (name == "meanpool") return PipelineConfig::Fusion::Meanpool;
    throw std::invalid_argument(fmt::format(
        "unknown fusion \"{}\" (expected none|cmvfm|concat|meanpool)", name));
}

namespace {

using nlohmann::json;

PIConfig::Mode mode_from_string(std::string_view name) {
    if (name == "combined") return PIConfig::Mode::Combined;
    if (name == "per_dimension") return PIConfig::Mode::PerDimension;
    throw std::invalid_argument(fmt::format(
        "unknown pi mode \"{}\" (expected combined|per_dimension)", name));
}

std::string mode_to_string(PIConfig::Mode m) {
    return m == PIConfig::Mode::Combined ? "combined" : "per_dimension";
}

}  // namespace

PipelineConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(
            fmt::format("config: malformed JSON: {}", e.what()));
    }
    if (!j.is_object()) {
        throw std::invalid_argument("config: top level must be a JSON object");
    }

    PipelineConfig cfg;
    for (const auto& [key, value] : j.items()) {
        if (key == "patch_size") {
            cfg.patch_size = value.get<int>();
        } else if (key == "pi") {
            for (const auto& [pkey, pval] : value.items()) {
                if (pkey == "resolution") {
                    const auto res = pval.get<std::vector<int>>();
                    if (res.size() != 2) {
                        throw std::invalid_argument(
                            "config: pi.resolution must be [rows, cols]");
                    }
                    cfg.pi_rows = res[0];
                    cfg.pi_cols = res[1];
                } else if (pkey == "sigma") {
                    cfg.sigma = pval.get<double>();
                } else if (pkey == "mode") {
                    cfg.pi_mode = mode_from_string(pval.get<std::string>());
                } else {
                    throw std::invalid_argument(
                        fmt::format("config: unknown key pi.{}", pkey));
                }
            }
        } else if (key == "filtrations") {
            cfg.filtrations.clear();
            for (const auto& name : value) {
                cfg.filtrations.push_back(
                    filtration_from_string(name.get<std::string>()));
            }
        } else if (key == "fusion") {
            cfg.fusion = fusion_from_string(value.get<std::string>());
        } else if (key == "weights") {
            if (!value.is_null()) cfg.weights_dir = value.get<std::string>();
        } else if (key == "seed") {
            if (!value.is_null()) cfg.seed = value.get<std::uint64_t>();
        } else if (key == "out") {
            cfg.out_dir = value.get<std::string>();
        } else if (key == "jobs") {
            cfg.jobs = value.get<int>();
        } else {
            throw std::invalid_argument(
                fmt::format("config: unknown key \"{}\"", key));
        }
    }
    cfg.validate();
    return cfg;
}

std::string config_to_json_text(const PipelineConfig& cfg) {
    json j;
    j["patch_size"] = cfg.patch_size;
    j["pi"]["resolution"] = {cfg.pi_rows, cfg.pi_cols};
    j["pi"]["sigma"] = cfg.sigma;
    j["pi"]["mode"] = mode_to_string(cfg.pi_mode);
    j["filtrations"] = json::array();
    for (FiltrationKind k : cfg.filtrations) {
        j["filtrations"].push_back(to_string(k));
    }
    j["fusion"] = to_string(cfg.fusion);
    j["weights"] = cfg.weights_dir ? json(*cfg.weights_dir) : json(nullptr);
    j["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);
    j["out"] = cfg.out_dir;
    j["jobs"] = cfg.jobs;
    return j.dump(2);
}

void parallel_for(std::size_t n, int jobs,
                  const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t workers =
        std::min<std::size_t>(std::max(jobs, 1), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::mutex mu;
    std::exception_ptr first_error;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            const std::size_t begin = w * n / workers;
            const std::size_t end = (w + 1) * n / workers;
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(mu);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (std::thread& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

CheckReport run_self_check(int grids, std::uint64_t seed,
                           bool corrupt_pairing) {
    CheckReport report;
    report.grids = grids;
    std::mt19937_64 rng(seed);
    std::chrono::duration<double, std::milli> elapsed{0};

    for (int g = 0; g < grids; ++g) {
        const int rows = static_cast<int>(rng() % 6) + 1;
        const int cols = static_cast<int>(rng() % 6) + 1;
        ScalarGrid grid(rows, cols);
        for (double& v : grid.values) {
            v = static_cast<double>(rng() % 5) / 4.0;
        }

        const auto t0 = std::chrono::steady_clock::now();
        PersistenceDiagram fast = compute_diagram(grid);
        elapsed += std::chrono::steady_clock::now() - t0;

        if (corrupt_pairing && !fast.pairs.empty()) {
            fast.pairs.front().death -= 0.125;  // forced mismatch (test hook)
        }

        const CubicalComplex cx(grid);
        const PersistenceDiagram oracle = oracle_diagram(cx);
        if (fast.pairs == oracle.pairs) report.diagrams_matched += 1;

        bool euler_ok = true;
        for (double tau : grid.values) {
            const auto [b0, b1] = betti_at(fast, tau);
            int alive = 0;
            for (std::size_t v = 0; v < cx.vertex_count(); ++v) {
                alive += cx.vertex_value(v) >= tau;
            }
            for (std::size_t e = 0; e < cx.edge_count(); ++e) {
                alive -= cx.edge_value(e) >= tau;
            }
            for (std::size_t s = 0; s < cx.square_count(); ++s) {
                alive += cx.square_value(s) >= tau;
            }
            if (b0 - b1 != alive) {
                euler_ok = false;
                break;
            }
        }
        if (euler_ok) report.euler_consistent += 1;
    }
    report.ms_per_diagram = grids > 0 ? elapsed.count() / grids : 0.0;
    return report;
}

std::string view_file_name(const std::filesystem::path& input,
                           FiltrationKind kind) {
    return fmt::format("{}.{}.npy", input.stem().string(), to_string(kind));
}

}  // namespace topo
