#include "vlp/simulator.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vlp/rng.hpp"

namespace vlp {

namespace {
using nlohmann::json;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t h = seed ^ (a * 0x9e3779b97f4a7c15ull) ^ (b * 0xbf58476d1ce4e5b9ull);
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ull;
    h ^= h >> 27;
    return h;
}
} // namespace

bool ScenePlatform::occluded(const std::string& id, double t_s) const {
    for (const auto& o : occlusions)
        if (o.led_id == id && t_s >= o.t_start_s && t_s < o.t_end_s) return true;
    return false;
}

ScenePlatform ScenePlatform::default_scene() {
    ScenePlatform s;
    s.luminaires = LuminaireDatabase::default_database();
    return s;
}

RenderConfig RenderConfig::native_preset() {
    return RenderConfig{};
}

RenderConfig RenderConfig::compressed_preset() {
    RenderConfig r;
    r.width = 800;
    r.height = 600;
    return r;
}

CameraIntrinsics intrinsics_for(const RenderConfig& render) {
    return CameraIntrinsics::make(0.4, 3.2e-4, 2048, 1536, render.width, render.height);
}

PixelPoint project_unchecked(const WorldPoint& p, const CameraPose& pose,
                             const CameraIntrinsics& intr) {
    double H = p.z - pose.z;
    if (H <= 0) throw DomainError("point not above the camera plane");
    double dx_w = p.x - pose.x;
    double dy_w = p.y - pose.y;
    double c = std::cos(pose.yaw);
    double s = std::sin(pose.yaw);
    // camera yaw rotates world offsets by +yaw in the image plane
    double qx = c * dx_w - s * dy_w;
    double qy = s * dx_w + c * dy_w;
    double i = intr.f0 * qx / H;
    double j = intr.f0 * qy / H;
    double pitch = intr.working_pitch();
    return {intr.cx + i / pitch, intr.cy + j / pitch};
}

std::optional<PixelPoint> project(const WorldPoint& p, const CameraPose& pose,
                                  const CameraIntrinsics& intr) {
    PixelPoint px = project_unchecked(p, pose, intr);
    if (px.u < 0 || px.u >= intr.working_width || px.v < 0 || px.v >= intr.working_height)
        return std::nullopt;
    return px;
}

namespace {

void draw_luminaire(Frame& native, const ScenePlatform& scene, const LuminaireRecord& rec,
                    const CameraPose& pose, double t_s, const RenderConfig& render,
                    const CameraIntrinsics& native_intr, std::uint64_t lamp_seed) {
    double H = rec.position.z - pose.z;
    if (H <= 0) return;
    PixelPoint center = project_unchecked(rec.position, pose, native_intr);

    if (render.centroid_noise_sigma_px > 0.0) {
        Rng rng(lamp_seed);
        center.u += rng.gaussian(0.0, render.centroid_noise_sigma_px);
        center.v += rng.gaussian(0.0, render.centroid_noise_sigma_px);
    }

    double radius_px = native_intr.f0 * scene.led_radius_cm / H / native_intr.dx;
    if (center.u < -radius_px || center.u > native.width + radius_px || center.v < -radius_px ||
        center.v > native.height + radius_px)
        return;

    // Lambertian falloff toward the camera; order from the half-power angle.
    double dist = std::sqrt((rec.position.x - pose.x) * (rec.position.x - pose.x) +
                            (rec.position.y - pose.y) * (rec.position.y - pose.y) + H * H);
    double cos_e = H / dist;
    double m = -std::log(2.0) / std::log(std::cos(rec.half_power_deg * M_PI / 180.0));
    double peak = 255.0 * std::pow(cos_e, m);

    int r0 = std::max(0, static_cast<int>(std::floor(center.v - radius_px - 1)));
    int r1 = std::min(native.height - 1, static_cast<int>(std::ceil(center.v + radius_px + 1)));
    int c0 = std::max(0, static_cast<int>(std::floor(center.u - radius_px - 1)));
    int c1 = std::min(native.width - 1, static_cast<int>(std::ceil(center.u + radius_px + 1)));

    Rng jitter_rng(mix_seed(lamp_seed, 0x6a75, 0));
    Rng noise_rng(mix_seed(lamp_seed, 0x6e6f, 1));

    for (int r = r0; r <= r1; ++r) {
        double row_t = t_s + r * render.t_row_s;
        if (render.row_time_jitter_s > 0.0)
            row_t += jitter_rng.gaussian(0.0, render.row_time_jitter_s);
        double lo = std::max(row_t, 0.0);
        double brightness = (waveform_on_time(rec.profile, lo + render.t_exp_s) -
                             waveform_on_time(rec.profile, lo)) /
                            render.t_exp_s;
        if (brightness <= 0.0) continue;
        double yc = r + 0.5;
        for (int c = c0; c <= c1; ++c) {
            double rho = std::hypot(c + 0.5 - center.u, yc - center.v);
            double coverage = std::clamp(radius_px + 0.5 - rho, 0.0, 1.0);
            if (coverage <= 0.0) continue;
            double v = peak * brightness * coverage;
            if (render.pixel_noise_sigma > 0.0) v += noise_rng.gaussian(0.0, render.pixel_noise_sigma);
            std::uint8_t q = static_cast<std::uint8_t>(std::clamp(v + 0.5, 0.0, 255.0));
            native.at(c, r) = std::max(native.at(c, r), q);
        }
    }
}

} // namespace

Frame render_frame(const ScenePlatform& scene, const CameraPose& pose, double t_s,
                   const RenderConfig& render) {
    CameraIntrinsics native_intr = CameraIntrinsics::make(0.4, 3.2e-4, 2048, 1536, 2048, 1536);
    Frame native(2048, 1536);

    const auto& recs = scene.luminaires.records();
    for (std::size_t li = 0; li < recs.size(); ++li) {
        if (scene.occluded(recs[li].id, t_s)) continue;
        std::uint64_t frame_idx = static_cast<std::uint64_t>(std::llround(t_s * 1e6));
        std::uint64_t lamp_seed = mix_seed(render.seed, frame_idx, li + 1);
        draw_luminaire(native, scene, recs[li], pose, t_s, render, native_intr, lamp_seed);
    }

    Frame out = render.compressed() ? native.resized(render.width, render.height)
                                    : std::move(native);
    out.timestamp_ns = static_cast<std::uint64_t>(t_s * 1e9);
    return out;
}

Trajectory Trajectory::line(double x0, double y0, double x1, double y1, double speed_cm_s,
                            double yaw) {
    Trajectory t;
    t.speed_cm_s = speed_cm_s;
    double len = std::hypot(x1 - x0, y1 - y0);
    t.waypoints.push_back({x0, y0, yaw, 0.0});
    t.waypoints.push_back({x1, y1, yaw, speed_cm_s > 0 ? len / speed_cm_s : 0.0});
    return t;
}

double Trajectory::duration_s() const {
    return waypoints.empty() ? 0.0 : waypoints.back().t_s;
}

CameraPose Trajectory::pose_at(double t_s) const {
    if (waypoints.empty()) return {};
    if (t_s <= waypoints.front().t_s) {
        const auto& w = waypoints.front();
        return {w.x, w.y, 0.0, w.yaw};
    }
    if (t_s >= waypoints.back().t_s) {
        const auto& w = waypoints.back();
        return {w.x, w.y, 0.0, w.yaw};
    }
    for (std::size_t k = 1; k < waypoints.size(); ++k) {
        if (t_s <= waypoints[k].t_s) {
            const auto& a = waypoints[k - 1];
            const auto& b = waypoints[k];
            double span = b.t_s - a.t_s;
            double u = span > 0 ? (t_s - a.t_s) / span : 0.0;
            return {a.x + u * (b.x - a.x), a.y + u * (b.y - a.y), 0.0,
                    a.yaw + u * (b.yaw - a.yaw)};
        }
    }
    const auto& w = waypoints.back();
    return {w.x, w.y, 0.0, w.yaw};
}

void run_trajectory(const ScenePlatform& scene, const Trajectory& traj,
                    const RenderConfig& render,
                    const std::function<bool(const SimFrame&)>& sink) {
    if (traj.waypoints.empty()) throw DomainError("trajectory has no waypoints");
    for (std::size_t k = 1; k < traj.waypoints.size(); ++k)
        if (traj.waypoints[k].t_s <= traj.waypoints[k - 1].t_s)
            throw DomainError("waypoint timestamps must strictly increase");

    double duration = traj.duration_s();
    double dt = render.fps > 0 ? 1.0 / render.fps : 1.0;
    std::uint32_t index = 0;
    for (double t = 0.0; t <= duration + 1e-9; t += dt) {
        SimFrame sf;
        sf.t_s = t;
        sf.index = index++;
        sf.truth = traj.pose_at(t);
        sf.frame = render_frame(scene, sf.truth, t, render);
        if (!sink(sf)) return;
        if (duration == 0.0) return;  // single repeated pose
    }
}

std::vector<SimFrame> run_trajectory_collect(const ScenePlatform& scene, const Trajectory& traj,
                                             const RenderConfig& render) {
    std::vector<SimFrame> out;
    run_trajectory(scene, traj, render, [&](const SimFrame& sf) {
        out.push_back(sf);
        return true;
    });
    return out;
}

// ---- JSON ----

ScenePlatform ScenePlatform::from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.value("version", 1) != 1) throw FormatError("scene: unsupported schema version");
    ScenePlatform s;
    if (j.contains("platform")) {
        const auto& p = j["platform"];
        s.extent_x_cm = p.value("extent_x_cm", s.extent_x_cm);
        s.extent_y_cm = p.value("extent_y_cm", s.extent_y_cm);
        s.led_plane_z_cm = p.value("led_plane_z_cm", s.led_plane_z_cm);
        s.led_radius_cm = p.value("led_radius_cm", s.led_radius_cm);
    }
    if (j.contains("luminaires"))
        s.luminaires = LuminaireDatabase::from_json(j["luminaires"].dump());
    else
        s.luminaires = LuminaireDatabase::default_database();
    if (j.contains("occlusions")) {
        for (const auto& o : j["occlusions"])
            s.occlusions.push_back({o.at("led_id").get<std::string>(),
                                    o.at("t_start_s").get<double>(),
                                    o.at("t_end_s").get<double>()});
    }
    return s;
}

std::string ScenePlatform::to_json() const {
    json occ = json::array();
    for (const auto& o : occlusions)
        occ.push_back({{"led_id", o.led_id}, {"t_start_s", o.t_start_s}, {"t_end_s", o.t_end_s}});
    json j = {{"version", 1},
              {"platform",
               {{"extent_x_cm", extent_x_cm},
                {"extent_y_cm", extent_y_cm},
                {"led_plane_z_cm", led_plane_z_cm},
                {"led_radius_cm", led_radius_cm}}},
              {"luminaires", json::parse(luminaires.to_json())},
              {"occlusions", occ}};
    return j.dump(2);
}

ScenePlatform ScenePlatform::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open scene file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

Trajectory Trajectory::from_json(const std::string& text) {
    json j = json::parse(text);
    Trajectory t;
    t.speed_cm_s = j.value("speed_cm_s", 0.4);
    for (const auto& w : j.at("waypoints"))
        t.waypoints.push_back({w.at("x").get<double>(), w.at("y").get<double>(),
                               w.value("yaw", 0.0), w.at("t_s").get<double>()});
    return t;
}

std::string Trajectory::to_json() const {
    json ws = json::array();
    for (const auto& w : waypoints)
        ws.push_back({{"x", w.x}, {"y", w.y}, {"yaw", w.yaw}, {"t_s", w.t_s}});
    return json{{"speed_cm_s", speed_cm_s}, {"waypoints", ws}}.dump(2);
}

} // namespace vlp
