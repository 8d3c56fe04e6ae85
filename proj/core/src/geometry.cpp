#include "vlp/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace vlp {

namespace {

constexpr double kCoincidentTol = 1e-12;

struct Rot2 {
    double c, s;
    explicit Rot2(double t) : c(std::cos(t)), s(std::sin(t)) {}
    // counter-clockwise rotation
    std::pair<double, double> fwd(double x, double y) const { return {c * x - s * y, s * x + c * y}; }
};

} // namespace

double wrap_angle(double theta) {
    double t = std::remainder(theta, 2.0 * M_PI);
    if (t <= -M_PI) t += 2.0 * M_PI;
    return t;
}

CameraIntrinsics CameraIntrinsics::make(double f0_cm, double dx_cm, int native_w, int native_h,
                                        int working_w, int working_h) {
    if (f0_cm <= 0 || dx_cm <= 0) throw DomainError("focal length and pixel pitch must be positive");
    if (native_w <= 0 || native_h <= 0 || working_w <= 0 || working_h <= 0)
        throw DomainError("resolutions must be positive");
    CameraIntrinsics k;
    k.f0 = f0_cm;
    k.dx = dx_cm;
    k.native_width = native_w;
    k.native_height = native_h;
    k.working_width = working_w;
    k.working_height = working_h;
    k.a = static_cast<double>(native_w) / static_cast<double>(working_w);
    k.f1 = f0_cm / k.a;
    k.cx = working_w / 2.0;
    k.cy = working_h / 2.0;
    return k;
}

CameraIntrinsics CameraIntrinsics::with_center(double new_cx, double new_cy) const {
    CameraIntrinsics k = *this;
    k.cx = new_cx;
    k.cy = new_cy;
    return k;
}

ImagePoint pixel_to_image(const PixelPoint& p, const CameraIntrinsics& intr) {
    if (p.u < 0 || p.u > intr.working_width || p.v < 0 || p.v > intr.working_height)
        throw DomainError("pixel outside working resolution");
    return {(p.u - intr.cx) * intr.dx * intr.a, (p.v - intr.cy) * intr.dx * intr.a};
}

ImagePoint pixel_to_image_f1(const PixelPoint& p, const CameraIntrinsics& intr) {
    if (p.u < 0 || p.u > intr.working_width || p.v < 0 || p.v > intr.working_height)
        throw DomainError("pixel outside working resolution");
    return {(p.u - intr.cx) * intr.dx, (p.v - intr.cy) * intr.dx};
}

double estimate_height(const WorldPoint& l1, const WorldPoint& l2,
                       const ImagePoint& p1, const ImagePoint& p2,
                       const CameraIntrinsics& intr) {
    if (std::abs(l1.z - l2.z) > 1e-9)
        throw UnsupportedConfigurationError("lamps not on a common plane");
    double D = std::hypot(l1.x - l2.x, l1.y - l2.y);
    if (D < kCoincidentTol)
        throw DegenerateGeometryError("lamps coincide in the horizontal plane");
    double d = std::hypot(p1.i - p2.i, p1.j - p2.j);
    if (d < kCoincidentTol)
        throw DegenerateGeometryError("image points coincide");
    return intr.f0 * D / d;
}

double estimate_rotation(const ImagePoint& p1, const ImagePoint& p2) {
    double di = p1.i - p2.i;
    double dj = p1.j - p2.j;
    if (std::abs(di) < kCoincidentTol && std::abs(dj) < kCoincidentTol)
        throw DegenerateGeometryError("image points coincide");
    return std::atan2(dj, di);
}

std::pair<double, double> estimate_planar(const WorldPoint& l1, const WorldPoint& l2,
                                          const ImagePoint& p1, const ImagePoint& p2,
                                          double height, const CameraIntrinsics& intr) {
    if (height <= 0) throw DomainError("height must be positive");
    // Similar triangles on the midpoints: the camera offset from the lamp
    // midpoint is -(H/f) times the image midpoint. Frames must match: the
    // lamp coordinates are interpreted in the same horizontal frame as the
    // image axes (locate() rotates world lamps into the camera frame first).
    double mx = 0.5 * (p1.i + p2.i);
    double my = 0.5 * (p1.j + p2.j);
    double x = 0.5 * (l1.x + l2.x) - height * mx / intr.f0;
    double y = 0.5 * (l1.y + l2.y) - height * my / intr.f0;
    return {x, y};
}

WorldPoint to_world(double x, double y, double z, double phi) {
    double c = std::cos(phi);
    double s = std::sin(phi);
    return {c * x + s * y, -s * x + c * y, z};
}

std::pair<AnchorLamp, AnchorLamp> select_lamp_pair(const std::vector<AnchorLamp>& lamps) {
    if (lamps.size() < 2)
        throw InsufficientAnchorsError("need at least two identified lamps");
    int best_i = -1, best_j = -1;
    double best_sep = -1.0;
    for (std::size_t i = 0; i < lamps.size(); ++i) {
        for (std::size_t j = i + 1; j < lamps.size(); ++j) {
            const auto& a = lamps[i];
            const auto& b = lamps[j];
            if (a.world.x == b.world.x || a.world.y == b.world.y) continue;
            double sep = std::hypot(a.image.i - b.image.i, a.image.j - b.image.j);
            bool better = sep > best_sep + kCoincidentTol;
            if (!better && std::abs(sep - best_sep) <= kCoincidentTol && best_i >= 0) {
                auto key = std::minmax(a.id, b.id);
                auto best_key = std::minmax(lamps[best_i].id, lamps[best_j].id);
                better = std::pair(key.first, key.second) <
                         std::pair(best_key.first, best_key.second);
            }
            if (better) {
                best_sep = sep;
                best_i = static_cast<int>(i);
                best_j = static_cast<int>(j);
            }
        }
    }
    if (best_i < 0)
        throw DegenerateLayoutError("no lamp pair with distinct x and distinct y");
    // stable order: smaller id first, so the pair's world angle is well defined
    const AnchorLamp& a = lamps[best_i];
    const AnchorLamp& b = lamps[best_j];
    if (b.id < a.id) return {b, a};
    return {a, b};
}

PoseFix locate(const AnchorLamp& a, const AnchorLamp& b, const CameraIntrinsics& intr,
               const LocateOptions& opts) {
    double H = estimate_height(a.world, b.world, a.image, b.image, intr);
    double theta_img = estimate_rotation(a.image, b.image);
    // The image-plane stripe axis assumption only fixes the pair direction up
    // to the pair's world bearing; subtracting it yields the camera heading.
    double alpha = std::atan2(a.world.y - b.world.y, a.world.x - b.world.x);
    double psi = wrap_angle(theta_img - alpha + opts.mount_offset);

    // world lamps seen in the camera-aligned frame
    Rot2 r(psi);
    auto [ax, ay] = r.fwd(a.world.x, a.world.y);
    auto [bx, by] = r.fwd(b.world.x, b.world.y);
    WorldPoint la{ax, ay, a.world.z};
    WorldPoint lb{bx, by, b.world.z};

    auto [x_cam, y_cam] = estimate_planar(la, lb, a.image, b.image, H, intr);
    double z_cam = opts.led_plane_z - H;
    WorldPoint w = to_world(x_cam, y_cam, z_cam, psi);

    PoseFix fix;
    fix.x_w = w.x;
    fix.y_w = w.y;
    fix.z_w = w.z;
    fix.height = H;
    fix.theta = psi;
    fix.pair = {a.id, b.id};
    return fix;
}

std::pair<double, double> calibrate_center(const std::vector<StaticFixSample>& fixes,
                                           const CameraIntrinsics& intr) {
    if (fixes.size() < 4)
        throw DomainError("center calibration needs at least 4 fixes");
    double mx = 0.0, my = 0.0;
    for (const auto& s : fixes) {
        mx += s.fix.x_w;
        my += s.fix.y_w;
    }
    mx /= fixes.size();
    my /= fixes.size();

    // fix = C - (H/f) R(-theta) delta  =>  delta = -(f/H) R(theta) (fix - C)
    double dx_cm = 0.0, dy_cm = 0.0;
    for (const auto& s : fixes) {
        double rx = s.fix.x_w - mx;
        double ry = s.fix.y_w - my;
        Rot2 r(s.fix.theta);
        auto [ux, uy] = r.fwd(rx, ry);
        double scale = -intr.f0 / s.fix.height;
        dx_cm += scale * ux;
        dy_cm += scale * uy;
    }
    dx_cm /= fixes.size();
    dy_cm /= fixes.size();

    double pitch = intr.working_pitch();
    return {intr.cx + dx_cm / pitch, intr.cy + dy_cm / pitch};
}

} // namespace vlp
