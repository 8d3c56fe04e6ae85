#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vlp/mesh/pipeline.hpp"
#include "vlp/simulator.hpp"
#include "vlp/stats.hpp"

namespace vlp {

enum class ExperimentMode { Static, Grid, Dynamic };

// Desk-scale reproduction of the platform experiments. Presets A..F mirror
// the dynamic runs (paths, resolution, topology); "static" and "grid" mirror
// the stationary dispersion and 36-point accuracy studies.
struct ExperimentSpec {
    std::string name = "custom";
    ExperimentMode mode = ExperimentMode::Dynamic;
    Trajectory trajectory;                      // dynamic mode
    int grid_nx = 6;                            // grid mode: nx*ny points
    int grid_ny = 6;
    double grid_margin_cm = 10.0;
    int repetitions = 12;                       // fixes per grid point / static pose
    CameraPose static_pose;                     // static mode
    bool static_yaw_sweep = true;               // rotate in place across fixes
    double centroid_noise_sigma_px = 0.5;
    // principal-point miscalibration injected into the locator (working px)
    double center_offset_px_x = 0.0;
    double center_offset_px_y = 0.0;
    bool apply_center_correction = false;       // calibrate first, then run corrected
    mesh::Topology topology = mesh::Topology::Local;
    bool use_compressed = true;                 // 800x600 preset vs native
    double t_exp_s = 200e-6;
    double fps = 1.0;
    std::uint64_t seed = 1;
    std::optional<std::uint32_t> max_frames;

    // spec names: "A".."F", "static", "grid"
    static std::optional<ExperimentSpec> preset(const std::string& name);
    static ExperimentSpec from_json(const std::string& text);
    std::string to_json() const;
    static ExperimentSpec load(const std::string& path_or_preset);

    RenderConfig render_config() const;
    FitAxis dominant_axis() const;
};

struct ExperimentResult {
    ErrorStats stats;
    mesh::LatencyReport latency;
    LineFit fit;                                 // dynamic mode
    double straight_line_mean_error_cm = 0.0;    // paper's drawn-path metric
    std::uint32_t frames_total = 0;
    std::uint32_t frames_with_pair = 0;
    std::pair<double, double> calibrated_center{0.0, 0.0};
    std::string samples_csv;                     // deterministic for (spec, seed)
    std::string summary_text;
};

// Runs the experiment; when out_dir is non-empty writes samples.csv,
// latency.csv and summary.txt there. Throws on pipeline failure but leaves
// partial CSV content in the result.
ExperimentResult run_experiment(const ExperimentSpec& spec, const std::string& out_dir = "");

// Static-mode helper used by the correction study: direct solve stream (no
// image pipeline) with Gaussian centroid noise, optional principal-point
// miscalibration, optional heading sweep.
struct StaticRunConfig {
    CameraPose pose;
    int fixes = 120;
    bool yaw_sweep = true;
    double noise_sigma_px = 0.5;
    double center_offset_px_x = 0.0;
    double center_offset_px_y = 0.0;
    bool corrected = false;                      // estimate center first, then re-run
    std::uint64_t seed = 1;
    RenderConfig render = RenderConfig::compressed_preset();
};
struct StaticRunResult {
    std::vector<Sample2D> samples;
    double dispersion_radius_cm = 0.0;
    std::pair<double, double> center_used{0.0, 0.0};
};
StaticRunResult run_static_solves(const ScenePlatform& scene, const StaticRunConfig& cfg);

} // namespace vlp
