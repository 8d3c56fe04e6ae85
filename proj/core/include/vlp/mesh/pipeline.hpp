#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vlp/mesh/broker.hpp"
#include "vlp/mesh/wire.hpp"
#include "vlp/simulator.hpp"
#include "vlp/tracker.hpp"

namespace vlp::mesh {

enum class Topology { Local, Split };

// Per-fix stage timings, CLOCK_MONOTONIC nanoseconds.
struct FixLatency {
    std::uint32_t fix_seq = 0;
    std::uint64_t capture_to_publish_ns = 0;
    std::uint64_t transport_ns = 0;
    std::uint64_t track_ns = 0;
    std::uint64_t id_ns = 0;
    std::uint64_t solve_ns = 0;
    std::uint64_t total_ns = 0;
};

struct LatencyReport {
    std::vector<FixLatency> fixes;
    std::uint64_t frames_published = 0;
    std::uint64_t frames_dropped = 0;

    double mean_total_s() const;
    double mean_stage_s(const char* stage) const;  // "transport", "track", ...
    std::string to_csv() const;                    // fix_seq,stage,ns
};

struct PipelineConfig {
    Topology topology = Topology::Local;
    ScenePlatform scene;
    Trajectory trajectory;
    RenderConfig render;
    TrackerConfig tracker;
    double mount_offset = 0.0;
    // principal-point override for the locator (miscalibration injection /
    // calibration result); working pixels
    std::optional<std::pair<double, double>> locator_center;
    // camera publishes the next frame only after the previous one was
    // processed (no forced drops); off reproduces the paced queue-1 behavior
    bool flow_control = true;
    int service_timeout_ms = 5000;
    std::optional<std::uint32_t> max_frames;
    // split topology: executable to spawn for the camera process; empty means
    // /proc/self/exe (the host binary must call maybe_run_camera_node first
    // thing in main)
    std::string camera_exec;
    std::string work_dir = "/tmp";   // split-topology config handoff
};

struct PipelineResult {
    std::vector<PositionBody> fixes;
    LatencyReport latency;
    std::uint32_t frames_total = 0;
    // frames in which >= 2 lamps were identified and tracking (solve issued)
    std::uint32_t frames_with_pair = 0;
    std::vector<std::string> wrong_id_events;  // id mismatches vs scene truth (diagnostics)
};

// Wires camera -> tracker -> {id, locator} -> location and runs the
// trajectory to completion. Local: everything in-process. Split: the camera
// runs in a child process and streams frames over TCP loopback.
PipelineResult run_pipeline(const PipelineConfig& config);

// Child-process entry: connect to the parent and stream rendered frames.
int camera_node_main(const std::vector<std::string>& args);

// Hook for main(): when argv marks this process as a spawned camera node,
// runs it and returns its exit code; returns nullopt otherwise.
std::optional<int> maybe_run_camera_node(int argc, char** argv);

inline constexpr const char* kCameraNodeArg = "__vlp_camera_node";

} // namespace vlp::mesh
