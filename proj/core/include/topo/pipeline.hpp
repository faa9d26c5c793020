#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "topo/fusion.hpp"
#include "topo/topoimage.hpp"

namespace topo {

/// Everything a pipeline run needs, loadable from a JSON config file with
/// per-flag CLI overrides layered on top.
struct PipelineConfig {
    int patch_size = 28;
    int pi_rows = 7;
    int pi_cols = 7;
    double sigma = 0.05;
    PIConfig::Mode pi_mode = PIConfig::Mode::Combined;
    std::vector<FiltrationKind> filtrations{FiltrationKind::Intensity,
                                            FiltrationKind::Gradient};

    enum class Fusion { None, Cmvfm, Concat, Meanpool };
    Fusion fusion = Fusion::None;
    std::optional<std::string> weights_dir;  // cmvfm with pretrained weights
    std::optional<std::uint64_t> seed;       // cmvfm with generated weights
    std::string out_dir = ".";
    int jobs = 1;

    TopoConfig topo() const;

    /// Throws std::invalid_argument on out-of-range values or a cmvfm setup
    /// with neither weights_dir nor seed.
    void validate() const;

    friend bool operator==(const PipelineConfig&,
                           const PipelineConfig&) = default;
};

std::string to_string(PipelineConfig::Fusion f);
PipelineConfig::Fusion fusion_from_string(std::string_view name);

/// JSON round-trip. parse_config accepts a JSON object with optional keys
/// (missing keys keep defaults): patch_size, pi {resolution, sigma, mode},
/// filtrations, fusion, weights, seed, out, jobs. Unknown keys are an error.
PipelineConfig parse_config(const std::string& json_text);
std::string config_to_json_text(const PipelineConfig& cfg);

/// Runs fn(i) for i in [0,n) on up to `jobs` threads (static partition).
/// The first exception thrown by any fn is rethrown after all threads join.
void parallel_for(std::size_t n, int jobs,
                  const std::function<void(std::size_t)>& fn);

/// Self-check outcome (cmd `check`): the randomized oracle-equivalence and
/// Euler-identity suites at reduced count, with wall-clock bookkeeping.
struct CheckReport {
    int grids = 0;
    int diagrams_matched = 0;
    int euler_consistent = 0;
    double ms_per_diagram = 0.0;

    bool passed() const {
        return diagrams_matched == grids && euler_consistent == grids;
    }
};

/// Computes `grids` random small-grid diagrams on both routes and compares
/// them exactly, plus the Euler identity at every distinct threshold.
/// `corrupt_pairing` is a test hook that perturbs one fast-path pair per
/// grid so the comparison must fail.
CheckReport run_self_check(int grids = 100, std::uint64_t seed = 7,
                           bool corrupt_pairing = false);

/// Output file name for one view of one input: "<stem>.<filtration>.npy".
std::string view_file_name(const std::filesystem::path& input,
                           FiltrationKind kind);

}  // namespace topo
