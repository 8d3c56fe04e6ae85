#include "vlp/luminaire.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>

#include "vlp/rng.hpp"

namespace vlp {

namespace {

using nlohmann::json;

struct WaveformShape {
    double T;    // base period, s
    double W1;   // first pulse width
    double W2;   // second pulse width (clipped, no wrap)
    double off2; // second pulse start within the 2T super-period

    explicit WaveformShape(const ModulationProfile& p) {
        double f_eff = p.manchester ? 2.0 * p.frequency_hz : p.frequency_hz;
        T = 1.0 / f_eff;
        W1 = p.duty_cycle * T;
        off2 = T + p.phase_coefficient * T;
        W2 = std::min(W1, 2.0 * T - off2);
    }
};

void validate_profile(const ModulationProfile& p) {
    if (p.frequency_hz <= 0) throw DomainError("modulation frequency must be positive");
    if (p.duty_cycle <= 0 || p.duty_cycle > 1) throw DomainError("duty cycle must be in (0, 1]");
    if (p.phase_coefficient < 0 || p.phase_coefficient >= 1)
        throw DomainError("phase coefficient must be in [0, 1)");
}

// Otsu threshold over an 8-bit histogram. Returns 0 when all mass sits in one
// bin (caller handles the uniform case).
int otsu_threshold(const std::array<std::uint32_t, 256>& hist, std::uint64_t total) {
    double sum = 0;
    for (int i = 0; i < 256; ++i) sum += static_cast<double>(i) * hist[i];
    double sum_b = 0;
    std::uint64_t w_b = 0;
    double best_var = -1.0;
    int best_t = 0;
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
    return best_t;
}

struct BandScan {
    std::vector<int> starts;          // band start rows (relative to ROI)
    std::vector<int> ends;            // inclusive
    int band_count = 0;
};

BandScan scan_bands(const std::vector<bool>& on) {
    BandScan s;
    const int n = static_cast<int>(on.size());
    for (int r = 0; r < n; ++r) {
        if (on[r] && (r == 0 || !on[r - 1])) {
            s.starts.push_back(r);
            ++s.band_count;
        }
        if (on[r] && (r == n - 1 || !on[r + 1])) s.ends.push_back(r);
    }
    return s;
}

} // namespace

double waveform_on_time(const ModulationProfile& p, double t) {
    validate_profile(p);
    WaveformShape w(p);
    double P = 2.0 * w.T;
    double per_period = w.W1 + w.W2;
    double n = std::floor(t / P);
    double r = t - n * P;
    double acc = n * per_period;
    acc += std::clamp(r, 0.0, w.W1);
    acc += std::clamp(r - w.off2, 0.0, w.W2);
    return acc;
}

StripeFeatures expected_features(const ModulationProfile& profile,
                                 const StripeRenderParams& render, int roi_height_px) {
    validate_profile(profile);
    if (render.t_row_s <= 0) throw DomainError("row time must be positive");
    double f_eff = profile.manchester ? 2.0 * profile.frequency_hz : profile.frequency_hz;
    if (f_eff * render.t_row_s >= 1.0)
        throw UnresolvableStripeError("stripe period shorter than one sensor row");

    StripeFeatures f;
    f.roi_height_px = roi_height_px;
    f.row_time_s = render.t_row_s;
    if (profile.duty_cycle >= 1.0) {
        f.stripe_count = 1;
        f.bright_ratio = 1.0;
        f.phase_coefficient = 0.0;
    } else {
        f.stripe_count = static_cast<int>(std::floor(roi_height_px * f_eff * render.t_row_s));
        f.bright_ratio = profile.duty_cycle;
        // fewer than three bands cannot carry a measurable stripe offset
        f.phase_coefficient = f.stripe_count >= 3 ? profile.phase_coefficient : 0.0;
    }
    f.roi_area_px = f.bright_ratio * M_PI * 0.25 * roi_height_px * roi_height_px;
    return f;
}

Frame synthesize_stripes(const ModulationProfile& profile, const StripeRenderParams& render,
                         const DiskSpec& disk, double t0, int width, int height,
                         double row_time_jitter_s, std::uint64_t jitter_seed) {
    validate_profile(profile);
    if (render.t_exp_s <= 0 || render.t_row_s <= 0)
        throw DomainError("exposure and row time must be positive");
    Frame patch(width, height);
    if (disk.radius <= 0) return patch;

    Rng jitter_rng(jitter_seed);
    const double denom = render.t_exp_s;
    for (int r = 0; r < height; ++r) {
        double yc = r + 0.5;
        if (std::abs(yc - disk.cy) > disk.radius + 1.0) continue;
        double row_t = t0 + r * render.t_row_s;
        if (row_time_jitter_s > 0.0) row_t += jitter_rng.gaussian(0.0, row_time_jitter_s);
        double lo = std::max(row_t, 0.0);
        double brightness =
            (waveform_on_time(profile, lo + render.t_exp_s) - waveform_on_time(profile, lo)) / denom;
        if (brightness <= 0.0) continue;
        for (int c = 0; c < width; ++c) {
            double rho = std::hypot(c + 0.5 - disk.cx, yc - disk.cy);
            double coverage = std::clamp(disk.radius + 0.5 - rho, 0.0, 1.0);
            if (coverage <= 0.0) continue;
            double v = disk.peak * brightness * coverage;
            patch.at(c, r) = static_cast<std::uint8_t>(std::clamp(v + 0.5, 0.0, 255.0));
        }
    }
    return patch;
}

StripeFeatures extract_features(const Frame& frame, const SearchWindowRect& roi,
                                double row_time_s) {
    if (roi.x < 0 || roi.y < 0 || roi.w <= 0 || roi.h <= 0 || roi.x + roi.w > frame.width ||
        roi.y + roi.h > frame.height)
        throw DomainError("ROI outside frame");

    std::array<std::uint32_t, 256> hist{};
    std::uint8_t vmax = 0;
    double mean = 0.0;
    for (int y = roi.y; y < roi.y + roi.h; ++y) {
        for (int x = roi.x; x < roi.x + roi.w; ++x) {
            std::uint8_t v = frame.at(x, y);
            ++hist[v];
            vmax = std::max(vmax, v);
            mean += v;
        }
    }
    const double npx = static_cast<double>(roi.w) * roi.h;
    mean /= npx;
    if (vmax == 0) throw NoSignalError("ROI is fully dark");

    int thresh = otsu_threshold(hist, static_cast<std::uint64_t>(npx));
    if (thresh < 1) thresh = 1;

    StripeFeatures f;
    f.roi_height_px = roi.h;
    f.row_time_s = row_time_s;

    double area = 0.0;
    for (int v = thresh; v < 256; ++v) area += hist[v];
    f.roi_area_px = area;

    // column strip through the bright centroid
    double cx_acc = 0.0, w_acc = 0.0;
    for (int y = roi.y; y < roi.y + roi.h; ++y)
        for (int x = roi.x; x < roi.x + roi.w; ++x)
            if (frame.at(x, y) >= thresh) {
                cx_acc += x + 0.5;
                w_acc += 1.0;
            }
    int strip_c = static_cast<int>(w_acc > 0 ? cx_acc / w_acc : roi.x + roi.w / 2);
    strip_c = std::clamp(strip_c, roi.x + 1, roi.x + roi.w - 2);

    std::vector<bool> on(roi.h, false);
    for (int y = 0; y < roi.h; ++y) {
        std::uint8_t v = 0;
        for (int x = strip_c - 1; x <= strip_c + 1; ++x)
            v = std::max(v, frame.at(x, roi.y + y));
        on[y] = v >= thresh;
    }

    BandScan bands = scan_bands(on);

    // Interior starts only: a band starting at row 0 may be clipped by the
    // ROI edge and would corrupt the interval statistics.
    std::vector<int> interior;
    for (int s : bands.starts)
        if (s > 0) interior.push_back(s);

    // Resolvability gate: band intervals below ~3 rows (or no structure at
    // all) mean stripes are washed out or aliased; report a single uniform
    // band, as a compressed frame of a fast lamp really looks.
    bool uniform = bands.band_count <= 1;
    if (!uniform && interior.size() >= 2) {
        double mean_interval =
            static_cast<double>(interior.back() - interior.front()) / (interior.size() - 1);
        if (mean_interval < 3.0) uniform = true;
    }

    if (uniform) {
        f.stripe_count = 1;
        f.bright_ratio = vmax > 0 ? mean / vmax : 0.0;
        f.phase_coefficient = 0.0;
        return f;
    }

    f.stripe_count = bands.band_count;

    if (interior.size() >= 2) {
        // an even interval count spans whole pulse pairs, which makes the
        // ratio exact even for alternating stripe spacing
        std::size_t last = interior.size() - 1;
        if (last >= 3 && last % 2 == 1) --last;
        int span = interior[last] - interior.front();
        int bright_in_span = 0;
        for (int y = interior.front(); y < interior[last]; ++y)
            if (on[y]) ++bright_in_span;
        f.bright_ratio = span > 0 ? static_cast<double>(bright_in_span) / span : 0.0;
    } else {
        int bright_total = static_cast<int>(std::count(on.begin(), on.end(), true));
        f.bright_ratio = static_cast<double>(bright_total) / roi.h;
    }

    if (interior.size() >= 3) {
        double even_acc = 0.0, odd_acc = 0.0;
        int even_n = 0, odd_n = 0;
        for (std::size_t k = 0; k + 1 < interior.size(); ++k) {
            double iv = interior[k + 1] - interior[k];
            if (k % 2 == 0) {
                even_acc += iv;
                ++even_n;
            } else {
                odd_acc += iv;
                ++odd_n;
            }
        }
        if (even_n > 0 && odd_n > 0) {
            double ev = even_acc / even_n;
            double od = odd_acc / odd_n;
            f.phase_coefficient = std::abs(ev - od) / (ev + od);
        }
    }
    return f;
}

std::optional<std::string> match_id(const StripeFeatures& f, const LuminaireDatabase& db) {
    const auto& tol = db.tolerances();
    double row_time = f.row_time_s > 0 ? f.row_time_s : db.reference_row_time();
    StripeRenderParams render{row_time, 1.0};  // expectation does not depend on exposure

    std::vector<const LuminaireRecord*> hits;
    for (const auto& rec : db.records()) {
        StripeFeatures e;
        try {
            e = expected_features(rec.profile, render, f.roi_height_px);
        } catch (const UnresolvableStripeError&) {
            continue;  // this record cannot form stripes at this geometry
        }
        if (std::abs(e.stripe_count - f.stripe_count) > tol.stripe_count) continue;
        // with fewer than two expected bands there is no period to measure
        if (e.stripe_count >= 2 && std::abs(e.bright_ratio - f.bright_ratio) > tol.bright_ratio)
            continue;
        if (std::abs(e.phase_coefficient - f.phase_coefficient) > tol.phase) continue;
        if (e.roi_area_px > 0) {
            double ratio = f.roi_area_px / e.roi_area_px;
            if (ratio < 1.0 - tol.area_ratio || ratio > 1.0 + tol.area_ratio) continue;
        }
        hits.push_back(&rec);
    }
    if (hits.empty()) return std::nullopt;
    if (hits.size() > 1) {
        std::ostringstream os;
        os << "features match multiple records:";
        for (auto* r : hits) os << ' ' << r->id;
        throw AmbiguousIdError(os.str());
    }
    return hits.front()->id;
}

LuminaireDatabase::LuminaireDatabase(std::vector<LuminaireRecord> records, FeatureTolerances tol,
                                     double reference_row_time_s, int reference_roi_height_px)
    : records_(std::move(records)),
      tol_(tol),
      ref_row_time_(reference_row_time_s),
      ref_roi_height_(reference_roi_height_px) {
    for (std::size_t i = 0; i < records_.size(); ++i) {
        validate_profile(records_[i].profile);
        for (std::size_t j = i + 1; j < records_.size(); ++j)
            if (records_[i].id == records_[j].id)
                throw FormatError("duplicate luminaire id: " + records_[i].id);
    }
    check_collisions();
}

const LuminaireRecord* LuminaireDatabase::find(const std::string& id) const {
    for (const auto& r : records_)
        if (r.id == id) return &r;
    return nullptr;
}

void LuminaireDatabase::check_collisions() const {
    StripeRenderParams render{ref_row_time_, 1.0};
    std::vector<StripeFeatures> expected;
    expected.reserve(records_.size());
    for (const auto& r : records_) expected.push_back(expected_features(r.profile, render, ref_roi_height_));

    for (std::size_t i = 0; i < expected.size(); ++i) {
        for (std::size_t j = i + 1; j < expected.size(); ++j) {
            const auto& a = expected[i];
            const auto& b = expected[j];
            // two tolerance boxes overlap: a measurement could satisfy both
            bool count_overlap = std::abs(a.stripe_count - b.stripe_count) <= 2 * tol_.stripe_count;
            bool ratio_overlap = std::abs(a.bright_ratio - b.bright_ratio) <= 2.0 * tol_.bright_ratio;
            bool phase_overlap =
                std::abs(a.phase_coefficient - b.phase_coefficient) <= 2.0 * tol_.phase;
            if (count_overlap && ratio_overlap && phase_overlap)
                throw AmbiguousIdError("records " + records_[i].id + " and " + records_[j].id +
                                       " collide within matching tolerances");
        }
    }
}

LuminaireDatabase LuminaireDatabase::default_database() {
    // Table-height platform lamps; the published coordinates are an order of
    // magnitude off the 100x100 cm platform, so they are read as mm here.
    std::vector<LuminaireRecord> recs = {
        {"LED1", {-46.5, 49.5, 150.0}, {1000.0, 0.5, 0.0, false}, 60.0},
        {"LED2", {-46.0, -42.0, 150.0}, {2000.0, 0.33, 0.35, false}, 60.0},
        {"LED3", {46.0, 49.0, 150.0}, {4000.0, 0.5, 0.0, false}, 60.0},
        {"LED4", {48.0, -42.5, 150.0}, {8000.0, 0.33, 0.35, false}, 60.0},
    };
    return LuminaireDatabase(std::move(recs), FeatureTolerances{}, 25e-6, 84);
}

LuminaireDatabase LuminaireDatabase::from_json(const std::string& text) {
    json j = json::parse(text);
    if (!j.contains("version") || j["version"].get<int>() != 1)
        throw FormatError("luminaire database: unsupported schema version");
    std::vector<LuminaireRecord> recs;
    for (const auto& item : j.at("records")) {
        LuminaireRecord r;
        r.id = item.at("id").get<std::string>();
        r.position = {item.at("x_cm").get<double>(), item.at("y_cm").get<double>(),
                      item.at("z_cm").get<double>()};
        r.profile.frequency_hz = item.at("freq_hz").get<double>();
        r.profile.duty_cycle = item.at("duty").get<double>();
        r.profile.phase_coefficient = item.at("phase").get<double>();
        r.profile.manchester = item.value("manchester", false);
        r.half_power_deg = item.at("half_power_deg").get<double>();
        recs.push_back(std::move(r));
    }
    FeatureTolerances tol;
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        tol.stripe_count = t.value("stripe_count", tol.stripe_count);
        tol.bright_ratio = t.value("bright_ratio", tol.bright_ratio);
        tol.phase = t.value("phase", tol.phase);
        tol.area_ratio = t.value("area_ratio", tol.area_ratio);
    }
    double ref_row = j.value("reference_row_time_s", 25e-6);
    int ref_roi = j.value("reference_roi_height_px", 84);
    return LuminaireDatabase(std::move(recs), tol, ref_row, ref_roi);
}

std::string LuminaireDatabase::to_json() const {
    json recs = json::array();
    for (const auto& r : records_) {
        recs.push_back({{"id", r.id},
                        {"x_cm", r.position.x},
                        {"y_cm", r.position.y},
                        {"z_cm", r.position.z},
                        {"freq_hz", r.profile.frequency_hz},
                        {"duty", r.profile.duty_cycle},
                        {"phase", r.profile.phase_coefficient},
                        {"manchester", r.profile.manchester},
                        {"half_power_deg", r.half_power_deg}});
    }
    json j = {{"version", 1},
              {"records", recs},
              {"tolerances",
               {{"stripe_count", tol_.stripe_count},
                {"bright_ratio", tol_.bright_ratio},
                {"phase", tol_.phase},
                {"area_ratio", tol_.area_ratio}}},
              {"reference_row_time_s", ref_row_time_},
              {"reference_roi_height_px", ref_roi_height_}};
    return j.dump(2);
}

LuminaireDatabase LuminaireDatabase::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open luminaire database: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

} // namespace vlp
