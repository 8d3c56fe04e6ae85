#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "vlp/frame.hpp"
#include "vlp/luminaire.hpp"

namespace vlp {

// Fractional-center search window.
struct SearchWindow {
    double cx = 0.0;
    double cy = 0.0;
    double w = 4.0;
    double h = 4.0;

    SearchWindowRect rect(const Frame& f) const;  // clamped integer footprint
};

// Normalized intensity histogram of the target's bright structure.
struct TargetModel {
    static constexpr int kBins = 32;
    std::vector<double> bins = std::vector<double>(kBins, 0.0);
};

struct KalmanState {
    Eigen::Vector4d state = Eigen::Vector4d::Zero();   // x, y, vx, vy
    Eigen::Matrix4d P = Eigen::Matrix4d::Identity();
    Eigen::Matrix4d Q;                                 // process noise
    Eigen::Matrix2d R0;                                // base measurement noise

    static KalmanState init(double x, double y, double process_noise = 1.0,
                            double measurement_sigma_px = 2.0);
};

enum class TrackStatus { Tracking, Occluded, Lost };

struct TrackedLamp {
    SearchWindow window;
    TargetModel model;
    KalmanState kalman;
    std::string id;                  // empty until recognized
    TrackStatus status = TrackStatus::Tracking;
    double last_bc = 1.0;
    // measurement refined from the raw frame, valid while Tracking
    double meas_x = 0.0;
    double meas_y = 0.0;
};

struct TrackerConfig {
    double bc_threshold = 0.6;
    double eps_px = 1.0;
    int max_iter = 10;
    int expansion_cap = 4;
    double expansion_factor = 1.5;
    int min_blob_area_px = 30;
    int min_blob_dim_px = 6;
};

// Full-frame bright-blob detection: global threshold, vertical band bridging
// (stripe bands of one lamp are disconnected), connected components, and a
// shape filter. Returns one window per plausible LED region.
std::vector<SearchWindow> detect_rois(const Frame& frame, const TrackerConfig& cfg = {});

// Histogram of the bright structure inside the window (dark/background bins
// suppressed so back-projection does not light up the background).
TargetModel build_model(const Frame& frame, const SearchWindow& win);

// Per-pixel model weight of the pixel's intensity bin, in [0, 1].
std::vector<float> backproject(const Frame& frame, const TargetModel& model);

// Mean-shift to the weighted centroid until the step is below eps, then one
// Camshift moment-based resize. Throws NoSignalError when the window holds no
// probability mass.
SearchWindow meanshift_iterate(const std::vector<float>& map, int map_w, int map_h,
                               const SearchWindow& start, double eps_px, int max_iter);

// sum_k sqrt(h1_k * h2_k)
double bhattacharyya(const TargetModel& h1, const TargetModel& h2);

// Constant-velocity predict + correct with measurement noise R0 / max(bc^2, eps):
// bc = 1 trusts the measurement at its base noise, bc -> 0 rejects it.
KalmanState kalman_step(const KalmanState& ks, double meas_x, double meas_y, double bc);

// Occlusion recovery: probe the eight neighboring window placements, take the
// best Bhattacharyya score, and expand the window up to the cap until the
// score clears the threshold. Lost when the cap runs out.
TrackedLamp recover(const Frame& frame, const TrackedLamp& lamp, const TrackerConfig& cfg = {});

struct TrackFrameResult {
    std::vector<TrackedLamp> lamps;
    std::vector<SearchWindow> new_rois;  // unmarked blobs -> ID recognition requests
};

// One tracking cycle over all lamps plus new-blob discovery.
TrackFrameResult track_frame(const std::vector<TrackedLamp>& lamps, const Frame& frame,
                             const TrackerConfig& cfg = {});

// Sub-pixel LED center from the disk's bright chords: per-row midpoints give
// x, a linear fit of (halfwidth^2 + y^2) against y gives y. Immune to the
// stripe pattern, which only removes whole rows. Returns nullopt when fewer
// than three usable chords exist.
struct DiskCenter {
    double x = 0.0;
    double y = 0.0;
};
std::optional<DiskCenter> refine_disk_center(const Frame& frame, const SearchWindowRect& roi);

} // namespace vlp
