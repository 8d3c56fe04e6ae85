#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vlp/frame.hpp"
#include "vlp/geometry.hpp"
#include "vlp/luminaire.hpp"

namespace vlp {

// Scripted interval during which a lamp is masked out of the render.
struct OcclusionWindow {
    std::string led_id;
    double t_start_s = 0.0;
    double t_end_s = 0.0;
};

// The desk-scale rig: a 1 m x 1 m platform with lamps on a plane above it.
struct ScenePlatform {
    double extent_x_cm = 100.0;
    double extent_y_cm = 100.0;
    double led_plane_z_cm = 150.0;
    double led_radius_cm = 5.0;
    LuminaireDatabase luminaires;
    std::vector<OcclusionWindow> occlusions;

    static ScenePlatform default_scene();
    static ScenePlatform from_json(const std::string& text);
    std::string to_json() const;
    static ScenePlatform load_file(const std::string& path);

    bool occluded(const std::string& id, double t_s) const;
};

// Render geometry/timing. Presets mirror the experiment configurations:
// native 2048x1536, compressed 800x600 (nearest-neighbor resize of the
// native render). Exposure: 200 us camera-node setting by default, 20 us
// datasheet preset available.
struct RenderConfig {
    int width = 2048;
    int height = 1536;
    double t_row_s = 25e-6;
    double t_exp_s = 200e-6;
    double fps = 1.0;
    double centroid_noise_sigma_px = 0.0;  // native px; jitters each disk's drawn position
    double row_time_jitter_s = 0.0;        // per-row integration window jitter (band jitter)
    double pixel_noise_sigma = 0.0;        // additive intensity noise inside disk footprints
    std::uint64_t seed = 0;

    static RenderConfig native_preset();
    static RenderConfig compressed_preset();

    bool compressed() const { return width != 2048 || height != 1536; }
};

struct CameraPose {
    double x = 0.0;   // cm
    double y = 0.0;
    double z = 0.0;
    double yaw = 0.0; // radians
};

// Build intrinsics consistent with a render config (f0 = 0.4 cm, dx = 3.2 um).
CameraIntrinsics intrinsics_for(const RenderConfig& render);

// Pinhole projection with vertical optical axis. The geometry module's
// locate() is its exact inverse. Throws DomainError when the point is not
// above the camera; returns nullopt when it projects outside the frame.
std::optional<PixelPoint> project(const WorldPoint& p, const CameraPose& pose,
                                  const CameraIntrinsics& intr);

// Same, without the visibility cut (may land outside the raster).
PixelPoint project_unchecked(const WorldPoint& p, const CameraPose& pose,
                             const CameraIntrinsics& intr);

// One rolling-shutter exposure of the scene. Deterministic for identical
// inputs and seed. Compressed configs render the native raster and resize.
Frame render_frame(const ScenePlatform& scene, const CameraPose& pose, double t_s,
                   const RenderConfig& render);

struct Waypoint {
    double x = 0.0;
    double y = 0.0;
    double yaw = 0.0;   // radians
    double t_s = 0.0;
};

struct Trajectory {
    std::vector<Waypoint> waypoints;
    double speed_cm_s = 0.4;

    // waypoint times from cumulative path length / speed
    static Trajectory line(double x0, double y0, double x1, double y1, double speed_cm_s = 0.4,
                           double yaw = 0.0);
    static Trajectory from_json(const std::string& text);
    std::string to_json() const;

    double duration_s() const;
    CameraPose pose_at(double t_s) const;  // linear interpolation
};

struct SimFrame {
    Frame frame;
    CameraPose truth;
    double t_s = 0.0;
    std::uint32_t index = 0;
};

// Frame stream at the config's fps with exact interpolated ground truth.
// The callback returns false to stop early.
void run_trajectory(const ScenePlatform& scene, const Trajectory& traj,
                    const RenderConfig& render,
                    const std::function<bool(const SimFrame&)>& sink);

// Convenience: collect the whole stream (small runs and tests).
std::vector<SimFrame> run_trajectory_collect(const ScenePlatform& scene, const Trajectory& traj,
                                             const RenderConfig& render);

} // namespace vlp
