#include "vlp/tracker.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <numeric>

namespace vlp {

namespace {

int intensity_bin(std::uint8_t v) { return v * TargetModel::kBins / 256; }

// global Otsu over the whole frame
int frame_otsu(const Frame& f) {
    std::array<std::uint64_t, 256> hist{};
    for (std::uint8_t v : f.pixels) ++hist[v];
    const std::uint64_t total = f.pixels.size();
    double sum = 0;
    for (int i = 0; i < 256; ++i) sum += static_cast<double>(i) * hist[i];
    double sum_b = 0;
    std::uint64_t w_b = 0;
    double best_var = -1.0;
    int best_t = 1;
    for (int t = 0; t < 256; ++t) {
        w_b += hist[t];
        if (w_b == 0) continue;
        std::uint64_t w_f = total - w_b;
        if (w_f == 0) break;
        sum_b += static_cast<double>(t) * hist[t];
        double m_b = sum_b / w_b;
        double m_f = (sum - sum_b) / w_f;
        double var = static_cast<double>(w_b) * static_cast<double>(w_f) * (m_b - m_f) * (m_b - m_f);
        if (var > best_var) {
            best_var = var;
            best_t = t;
        }
    }
    return std::max(best_t, 8);  // keep the all-dark background out
}

struct Blob {
    long sum_x = 0, sum_y = 0;
    int min_x = 1 << 30, max_x = -1, min_y = 1 << 30, max_y = -1;
    int area = 0;
};

bool windows_overlap(const SearchWindow& a, const SearchWindow& b) {
    return std::abs(a.cx - b.cx) * 2.0 <= a.w + b.w && std::abs(a.cy - b.cy) * 2.0 <= a.h + b.h;
}

} // namespace

SearchWindowRect SearchWindow::rect(const Frame& f) const {
    int x0 = static_cast<int>(std::floor(cx - w / 2.0));
    int y0 = static_cast<int>(std::floor(cy - h / 2.0));
    int x1 = static_cast<int>(std::ceil(cx + w / 2.0));
    int y1 = static_cast<int>(std::ceil(cy + h / 2.0));
    x0 = std::clamp(x0, 0, f.width - 1);
    y0 = std::clamp(y0, 0, f.height - 1);
    x1 = std::clamp(x1, x0 + 1, f.width);
    y1 = std::clamp(y1, y0 + 1, f.height);
    return {x0, y0, x1 - x0, y1 - y0};
}

std::vector<SearchWindow> detect_rois(const Frame& frame, const TrackerConfig& cfg) {
    const int thresh = frame_otsu(frame);
    const int w = frame.width;
    const int h = frame.height;

    // Bridge the stripe gaps: a pixel is blob material if anything within
    // +-bridge rows in its column is bright. Bridge scales with frame height
    // so one lamp's bands connect at both resolutions.
    const int bridge = std::max(8, h / 48);
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(w) * h, 0);
    for (int x = 0; x < w; ++x) {
        int last_bright = -2 * bridge;
        for (int y = 0; y < h; ++y) {
            if (frame.at(x, y) >= thresh) last_bright = y;
            if (y - last_bright <= bridge) mask[static_cast<std::size_t>(y) * w + x] = 1;
        }
        int next_bright = h + 2 * bridge;
        for (int y = h - 1; y >= 0; --y) {
            if (frame.at(x, y) >= thresh) next_bright = y;
            if (next_bright - y <= bridge) mask[static_cast<std::size_t>(y) * w + x] = 1;
        }
    }

    // connected components on the bridged mask (4-connectivity, BFS)
    std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
    std::vector<Blob> blobs;
    std::deque<std::pair<int, int>> queue;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::size_t idx = static_cast<std::size_t>(y) * w + x;
            if (!mask[idx] || label[idx] >= 0) continue;
            int id = static_cast<int>(blobs.size());
            blobs.emplace_back();
            label[idx] = id;
            queue.clear();
            queue.emplace_back(x, y);
            while (!queue.empty()) {
                auto [px, py] = queue.front();
                queue.pop_front();
                Blob& b = blobs[id];
                b.sum_x += px;
                b.sum_y += py;
                b.min_x = std::min(b.min_x, px);
                b.max_x = std::max(b.max_x, px);
                b.min_y = std::min(b.min_y, py);
                b.max_y = std::max(b.max_y, py);
                ++b.area;
                const int nx[4] = {px - 1, px + 1, px, px};
                const int ny[4] = {py, py, py - 1, py + 1};
                for (int k = 0; k < 4; ++k) {
                    if (nx[k] < 0 || nx[k] >= w || ny[k] < 0 || ny[k] >= h) continue;
                    std::size_t nidx = static_cast<std::size_t>(ny[k]) * w + nx[k];
                    if (mask[nidx] && label[nidx] < 0) {
                        label[nidx] = id;
                        queue.emplace_back(nx[k], ny[k]);
                    }
                }
            }
        }
    }

    std::vector<SearchWindow> out;
    for (const Blob& b : blobs) {
        int bw = b.max_x - b.min_x + 1;
        int bh = b.max_y - b.min_y + 1;
        if (b.area < cfg.min_blob_area_px) continue;
        if (bw < cfg.min_blob_dim_px || bh < cfg.min_blob_dim_px) continue;
        double aspect = static_cast<double>(bw) / bh;
        if (aspect < 0.4 || aspect > 2.5) continue;  // LED disks come out near-square
        double fill = static_cast<double>(b.area) / (static_cast<double>(bw) * bh);
        if (fill < 0.3) continue;
        SearchWindow win;
        win.cx = b.min_x + bw / 2.0;
        win.cy = b.min_y + bh / 2.0;
        win.w = bw;
        win.h = bh;
        out.push_back(win);
    }
    std::sort(out.begin(), out.end(),
              [](const SearchWindow& a, const SearchWindow& b) { return a.cx < b.cx; });
    return out;
}

TargetModel build_model(const Frame& frame, const SearchWindow& win) {
    SearchWindowRect r = win.rect(frame);
    std::array<std::uint32_t, 256> hist{};
    std::uint8_t vmax = 0;
    for (int y = r.y; y < r.y + r.h; ++y)
        for (int x = r.x; x < r.x + r.w; ++x) {
            std::uint8_t v = frame.at(x, y);
            ++hist[v];
            vmax = std::max(vmax, v);
        }
    // suppress the dark background so back-projection tracks the bright
    // stripe structure, not the gaps between lamps
    int cut = std::max(8, vmax / 4);
    TargetModel m;
    double total = 0.0;
    for (int v = cut; v < 256; ++v) {
        m.bins[intensity_bin(static_cast<std::uint8_t>(v))] += hist[v];
        total += hist[v];
    }
    if (total > 0)
        for (double& b : m.bins) b /= total;
    return m;
}

std::vector<float> backproject(const Frame& frame, const TargetModel& model) {
    std::array<float, 256> lut{};
    for (int v = 0; v < 256; ++v) lut[v] = static_cast<float>(model.bins[intensity_bin(v)]);
    std::vector<float> map(frame.pixels.size());
    for (std::size_t i = 0; i < frame.pixels.size(); ++i) map[i] = lut[frame.pixels[i]];
    return map;
}

namespace {

struct Moments {
    double m00 = 0.0, m10 = 0.0, m01 = 0.0;
};

Moments window_moments(const std::vector<float>& map, int map_w, int map_h,
                       const SearchWindow& win) {
    int x0 = std::clamp(static_cast<int>(std::floor(win.cx - win.w / 2.0)), 0, map_w - 1);
    int y0 = std::clamp(static_cast<int>(std::floor(win.cy - win.h / 2.0)), 0, map_h - 1);
    int x1 = std::clamp(static_cast<int>(std::ceil(win.cx + win.w / 2.0)), x0 + 1, map_w);
    int y1 = std::clamp(static_cast<int>(std::ceil(win.cy + win.h / 2.0)), y0 + 1, map_h);
    Moments mo;
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
            double v = map[static_cast<std::size_t>(y) * map_w + x];
            mo.m00 += v;
            mo.m10 += v * (x + 0.5);
            mo.m01 += v * (y + 0.5);
        }
    return mo;
}

} // namespace

SearchWindow meanshift_iterate(const std::vector<float>& map, int map_w, int map_h,
                               const SearchWindow& start, double eps_px, int max_iter) {
    if (eps_px <= 0) throw DomainError("eps must be positive");
    if (max_iter < 1) throw DomainError("max_iter must be at least 1");
    SearchWindow win = start;
    Moments mo;
    for (int it = 0; it < max_iter; ++it) {
        mo = window_moments(map, map_w, map_h, win);
        if (mo.m00 <= 0.0) throw NoSignalError("no probability mass in search window");
        double nx = mo.m10 / mo.m00;
        double ny = mo.m01 / mo.m00;
        double step = std::hypot(nx - win.cx, ny - win.cy);
        win.cx = nx;
        win.cy = ny;
        if (step < eps_px) break;
    }
    // Camshift moment-based resize, 2*sqrt(M00) on the normalized map
    // (the classic 0..255 formulation divides its M00 by 255)
    double side = 2.0 * std::sqrt(mo.m00);
    side = std::clamp(side, 8.0, static_cast<double>(std::max(map_w, map_h)));
    win.w = std::min(side, static_cast<double>(map_w));
    win.h = std::min(side, static_cast<double>(map_h));
    return win;
}

double bhattacharyya(const TargetModel& h1, const TargetModel& h2) {
    double acc = 0.0;
    for (int k = 0; k < TargetModel::kBins; ++k) acc += std::sqrt(h1.bins[k] * h2.bins[k]);
    return std::min(acc, 1.0);
}

KalmanState KalmanState::init(double x, double y, double process_noise,
                              double measurement_sigma_px) {
    KalmanState ks;
    ks.state << x, y, 0.0, 0.0;
    ks.P = Eigen::Matrix4d::Identity() * 10.0;
    // white-acceleration constant-velocity model, dt = 1 frame
    Eigen::Matrix4d q;
    q << 0.25, 0, 0.5, 0,
         0, 0.25, 0, 0.5,
         0.5, 0, 1.0, 0,
         0, 0.5, 0, 1.0;
    ks.Q = q * process_noise;
    ks.R0 = Eigen::Matrix2d::Identity() * (measurement_sigma_px * measurement_sigma_px);
    return ks;
}

KalmanState kalman_step(const KalmanState& ks, double meas_x, double meas_y, double bc) {
    if (bc < 0.0 || bc > 1.0) throw DomainError("bhattacharyya coefficient out of [0,1]");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(ks.P);
    if (es.eigenvalues().minCoeff() < -1e-6) throw Error("state covariance not PSD");

    Eigen::Matrix4d F = Eigen::Matrix4d::Identity();
    F(0, 2) = 1.0;
    F(1, 3) = 1.0;
    Eigen::Matrix<double, 2, 4> H = Eigen::Matrix<double, 2, 4>::Zero();
    H(0, 0) = 1.0;
    H(1, 1) = 1.0;

    KalmanState out = ks;
    out.state = F * ks.state;
    Eigen::Matrix4d P = F * ks.P * F.transpose() + ks.Q;

    // similarity-scaled measurement noise: full trust at bc = 1, the
    // measurement is effectively discarded as bc -> 0
    constexpr double kEps = 1e-3;
    double g = 1.0 / std::max(bc * bc, kEps);
    Eigen::Matrix2d R = ks.R0 * g;

    Eigen::Vector2d z(meas_x, meas_y);
    Eigen::Vector2d innov = z - H * out.state;
    Eigen::Matrix2d S = H * P * H.transpose() + R;
    Eigen::Matrix<double, 4, 2> K = P * H.transpose() * S.inverse();
    out.state += K * innov;
    // Joseph form keeps P symmetric PSD under roundoff
    Eigen::Matrix4d IKH = Eigen::Matrix4d::Identity() - K * H;
    out.P = IKH * P * IKH.transpose() + K * R * K.transpose();
    out.P = 0.5 * (out.P + out.P.transpose());
    return out;
}

namespace {

double window_bc(const Frame& frame, const TargetModel& model, const SearchWindow& win) {
    return bhattacharyya(build_model(frame, win), model);
}

} // namespace

TrackedLamp recover(const Frame& frame, const TrackedLamp& lamp, const TrackerConfig& cfg) {
    if (lamp.status == TrackStatus::Tracking) return lamp;
    TrackedLamp out = lamp;
    SearchWindow base = lamp.window;
    for (int expansion = 0; expansion <= cfg.expansion_cap; ++expansion) {
        // the window itself plus its eight neighbors, offset by one window size
        SearchWindow best = base;
        double best_bc = window_bc(frame, lamp.model, base);
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                SearchWindow cand = base;
                cand.cx = std::clamp(base.cx + dx * base.w, 0.0, frame.width - 1.0);
                cand.cy = std::clamp(base.cy + dy * base.h, 0.0, frame.height - 1.0);
                double bc = window_bc(frame, lamp.model, cand);
                if (bc > best_bc) {
                    best_bc = bc;
                    best = cand;
                }
            }
        }
        if (best_bc >= cfg.bc_threshold) {
            out.window = best;
            out.last_bc = best_bc;
            out.status = TrackStatus::Tracking;
            out.kalman.state(0) = best.cx;
            out.kalman.state(1) = best.cy;
            out.kalman.state(2) = 0.0;
            out.kalman.state(3) = 0.0;
            out.kalman.P = Eigen::Matrix4d::Identity() * 25.0;
            return out;
        }
        // widen and retry from the best placement so far
        base = best;
        base.w = std::min(base.w * cfg.expansion_factor, static_cast<double>(frame.width));
        base.h = std::min(base.h * cfg.expansion_factor, static_cast<double>(frame.height));
    }
    out.status = TrackStatus::Lost;
    return out;
}

TrackFrameResult track_frame(const std::vector<TrackedLamp>& lamps, const Frame& frame,
                             const TrackerConfig& cfg) {
    TrackFrameResult result;
    result.lamps.reserve(lamps.size());

    for (const TrackedLamp& in : lamps) {
        TrackedLamp lamp = in;
        if (lamp.status != TrackStatus::Tracking) {
            lamp = recover(frame, lamp, cfg);
            result.lamps.push_back(lamp);
            continue;
        }

        // seed the search at the motion prediction
        SearchWindow seed = lamp.window;
        seed.cx = lamp.kalman.state(0) + lamp.kalman.state(2);
        seed.cy = lamp.kalman.state(1) + lamp.kalman.state(3);
        seed.cx = std::clamp(seed.cx, 0.0, frame.width - 1.0);
        seed.cy = std::clamp(seed.cy, 0.0, frame.height - 1.0);

        // back-project only a padded neighborhood of the prediction; the
        // full-frame map is equivalent but wasteful at native resolution
        double pad = 1.5 * std::max(seed.w, seed.h) + 8.0;
        int rx0 = std::clamp(static_cast<int>(seed.cx - seed.w / 2.0 - pad), 0, frame.width - 1);
        int ry0 = std::clamp(static_cast<int>(seed.cy - seed.h / 2.0 - pad), 0, frame.height - 1);
        int rx1 = std::clamp(static_cast<int>(seed.cx + seed.w / 2.0 + pad) + 1, rx0 + 1,
                             frame.width);
        int ry1 = std::clamp(static_cast<int>(seed.cy + seed.h / 2.0 + pad) + 1, ry0 + 1,
                             frame.height);
        Frame crop(rx1 - rx0, ry1 - ry0);
        for (int y = ry0; y < ry1; ++y)
            for (int x = rx0; x < rx1; ++x) crop.at(x - rx0, y - ry0) = frame.at(x, y);

        std::vector<float> map = backproject(crop, lamp.model);
        SearchWindow local = seed;
        local.cx -= rx0;
        local.cy -= ry0;
        SearchWindow converged;
        double bc = 0.0;
        bool no_mass = false;
        try {
            converged = meanshift_iterate(map, crop.width, crop.height, local, cfg.eps_px,
                                          cfg.max_iter);
            converged.cx += rx0;
            converged.cy += ry0;
            bc = window_bc(frame, lamp.model, converged);
        } catch (const NoSignalError&) {
            no_mass = true;
        }

        if (no_mass || bc < cfg.bc_threshold) {
            lamp.status = TrackStatus::Occluded;
            lamp.last_bc = no_mass ? 0.0 : bc;
            lamp = recover(frame, lamp, cfg);
            result.lamps.push_back(lamp);
            continue;
        }

        lamp.kalman = kalman_step(lamp.kalman, converged.cx, converged.cy, bc);
        lamp.window = converged;
        lamp.window.cx = lamp.kalman.state(0);
        lamp.window.cy = lamp.kalman.state(1);
        lamp.last_bc = bc;
        lamp.status = TrackStatus::Tracking;

        // refined sub-pixel measurement for the locator
        if (auto center = refine_disk_center(frame, lamp.window.rect(frame))) {
            lamp.meas_x = center->x;
            lamp.meas_y = center->y;
        } else {
            lamp.meas_x = lamp.window.cx;
            lamp.meas_y = lamp.window.cy;
        }
        result.lamps.push_back(lamp);
    }

    // unmarked blobs: candidate new lamps -> ID recognition requests
    std::vector<SearchWindow> blobs = detect_rois(frame, cfg);
    for (const SearchWindow& b : blobs) {
        bool covered = false;
        for (const TrackedLamp& lamp : result.lamps)
            if (lamp.status != TrackStatus::Lost && windows_overlap(b, lamp.window)) {
                covered = true;
                break;
            }
        if (!covered) result.new_rois.push_back(b);
    }
    return result;
}

std::optional<DiskCenter> refine_disk_center(const Frame& frame, const SearchWindowRect& roi) {
    if (roi.x < 0 || roi.y < 0 || roi.w <= 0 || roi.h <= 0 || roi.x + roi.w > frame.width ||
        roi.y + roi.h > frame.height)
        return std::nullopt;
    std::uint8_t vmax = 0;
    for (int y = roi.y; y < roi.y + roi.h; ++y)
        for (int x = roi.x; x < roi.x + roi.w; ++x) vmax = std::max(vmax, frame.at(x, y));
    if (vmax < 16) return std::nullopt;
    int thresh = vmax / 2;

    // per-row chord midpoints and widths; the fit below needs only bright
    // rows, so the stripe pattern cannot bias it
    double sw = 0.0, sx = 0.0;
    std::vector<std::array<double, 3>> rows;  // y_center, halfwidth, weight
    for (int y = roi.y; y < roi.y + roi.h; ++y) {
        int first = -1, last = -1;
        for (int x = roi.x; x < roi.x + roi.w; ++x) {
            if (frame.at(x, y) >= thresh) {
                if (first < 0) first = x;
                last = x;
            }
        }
        if (first < 0 || last - first < 2) continue;
        // chords clipped by the ROI edge would bias the fit
        if (first == roi.x || last == roi.x + roi.w - 1) continue;
        double width = last - first + 1;
        double mid = first + width / 2.0;
        rows.push_back({y + 0.5, width / 2.0, width});
        sw += width;
        sx += mid * width;
    }
    if (rows.size() < 3 || sw <= 0.0) return std::nullopt;

    DiskCenter c;
    c.x = sx / sw;

    // halfwidth^2 = R^2 - (y - y0)^2  =>  halfwidth^2 + y^2 = (R^2 - y0^2) + 2 y0 y
    double n = 0, sy = 0, syy = 0, sz = 0, szy = 0;
    for (const auto& r : rows) {
        double w = r[2];
        double z = r[1] * r[1] + r[0] * r[0];
        n += w;
        sy += w * r[0];
        syy += w * r[0] * r[0];
        sz += w * z;
        szy += w * z * r[0];
    }
    double den = n * syy - sy * sy;
    if (std::abs(den) < 1e-9) return std::nullopt;
    double slope = (n * szy - sz * sy) / den;
    c.y = slope / 2.0;
    return c;
}

} // namespace vlp
