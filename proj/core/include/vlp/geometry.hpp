#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vlp/error.hpp"

namespace vlp {

// Camera model for the double-lamp solver. Working resolution may be a
// compressed copy of the native sensor raster; `a` is the compression factor
// and `f1 = f0 / a` the equivalent focal length that keeps the height
// equation valid on compressed pixels.
//
// Canonical route used throughout this library: image coordinates are formed
// from working pixels with pitch dx*a and the solver uses f0. The f1 route
// (pitch dx, focal f1) is algebraically identical and is exercised by the
// equivalence tests only.
struct CameraIntrinsics {
    double f0 = 0.4;          // native focal length, cm
    double dx = 3.2e-4;       // native pixel pitch, cm/pixel
    int native_width = 2048;
    int native_height = 1536;
    int working_width = 2048;
    int working_height = 1536;
    double a = 1.0;           // native_width / working_width
    double f1 = 0.4;          // f0 / a
    double cx = 1024.0;       // principal point, working pixels
    double cy = 768.0;

    static CameraIntrinsics make(double f0_cm, double dx_cm, int native_w, int native_h,
                                 int working_w, int working_h);

    // principal point override (calibration result); keeps everything else
    CameraIntrinsics with_center(double new_cx, double new_cy) const;

    double working_pitch() const { return dx * a; }  // cm per working pixel
};

// Fractional pixel position, origin top-left. Pixel (i,j) covers
// [i,i+1)x[j,j+1); integer+0.5 is a pixel center.
struct PixelPoint {
    double u = 0.0;
    double v = 0.0;
};

// Physical sensor-plane position in cm, origin at the principal point.
struct ImagePoint {
    double i = 0.0;
    double j = 0.0;
};

struct WorldPoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

// One position solve.
struct PoseFix {
    double x_w = 0.0;              // cm
    double y_w = 0.0;              // cm
    double z_w = 0.0;              // cm (LED plane z minus H)
    double height = 0.0;           // H: camera to LED plane, cm
    double theta = 0.0;            // camera rotation about vertical, (-pi, pi]
    std::uint64_t timestamp_ns = 0;
    std::pair<std::string, std::string> pair;  // contributing lamp ids
};

// A lamp visible in the current frame with a known identity.
struct AnchorLamp {
    std::string id;
    WorldPoint world;
    ImagePoint image;
};

// normalize angle to (-pi, pi]
double wrap_angle(double theta);

// pixel -> physical image coordinates (canonical dx*a route)
ImagePoint pixel_to_image(const PixelPoint& p, const CameraIntrinsics& intr);

// f1-route conversion: pitch dx, intended to pair with f = f1. Exists for the
// compression-equivalence checks.
ImagePoint pixel_to_image_f1(const PixelPoint& p, const CameraIntrinsics& intr);

// H = f * |L1-L2| / |p1-p2|, lamps at equal z.
double estimate_height(const WorldPoint& l1, const WorldPoint& l2,
                       const ImagePoint& p1, const ImagePoint& p2,
                       const CameraIntrinsics& intr);

// angle of the lamp-pair vector in the image plane
double estimate_rotation(const ImagePoint& p1, const ImagePoint& p2);

// Similar-triangles planar solve. Lamp coordinates are taken in whatever
// horizontal frame the caller supplies; the result is in that same frame.
// locate() passes lamps rotated into the camera-aligned frame and rotates the
// result back with to_world.
std::pair<double, double> estimate_planar(const WorldPoint& l1, const WorldPoint& l2,
                                          const ImagePoint& p1, const ImagePoint& p2,
                                          double height, const CameraIntrinsics& intr);

// Rotation about the vertical axis:
//   [x_w, y_w, z_w]^T = [[cos p, sin p, 0], [-sin p, cos p, 0], [0, 0, 1]] [x, y, z]^T
WorldPoint to_world(double x, double y, double z, double phi);

// Pick the anchor pair for the solve: world x must differ AND world y must
// differ; among valid pairs the one with greatest image separation wins,
// ties broken by lexicographically smallest (id, id).
std::pair<AnchorLamp, AnchorLamp> select_lamp_pair(const std::vector<AnchorLamp>& lamps);

struct LocateOptions {
    double mount_offset = 0.0;      // extra camera-mount rotation, radians
    double led_plane_z = 150.0;     // cm; z_w of the fix = led_plane_z - H
};

// Full double-lamp solve from one anchor pair.
PoseFix locate(const AnchorLamp& a, const AnchorLamp& b, const CameraIntrinsics& intr,
               const LocateOptions& opts = {});

// Estimate the true principal point from stationary fixes taken while the
// camera sweeps its heading. A principal-point offset displaces each fix by
// -(H/f) * R(-theta) * delta; regressing the fix residuals against the
// recovered headings isolates delta.
//
// `fixes` are (fix, assumed-center) pairs produced with intrinsics `intr`;
// returns the corrected (cx, cy) in working pixels.
struct StaticFixSample {
    PoseFix fix;
};
std::pair<double, double> calibrate_center(const std::vector<StaticFixSample>& fixes,
                                           const CameraIntrinsics& intr);

} // namespace vlp
