#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vlp/error.hpp"
#include "vlp/frame.hpp"
#include "vlp/geometry.hpp"

namespace vlp {

// PWM-OOK stripe-code parameters of one lamp. The waveform repeats every two
// base periods: a pulse of width duty/frequency at the start of each period,
// with every second pulse delayed by phase_coefficient of a period. The
// delay gives alternating stripe spacing, which is what the phase feature
// measures; phase 0 is a plain square wave. The manchester flag doubles the
// transition density (halves the base period).
struct ModulationProfile {
    double frequency_hz = 1000.0;
    double duty_cycle = 0.5;         // (0, 1]
    double phase_coefficient = 0.0;  // [0, 1)
    bool manchester = false;
};

// Measured (or predicted) stripe-code signature of one ROI.
// roi_height_px and row_time_s are measurement context: stripe_count scales
// with both, so matching recomputes expectations for the geometry the
// features were taken under. extract_features fills roi_height_px; the
// caller provides row_time_s for the frame's resolution (native row time
// times the vertical compression factor for resized frames).
struct StripeFeatures {
    int stripe_count = 0;
    double roi_area_px = 0.0;        // bright pixels in the ROI
    double bright_ratio = 0.0;       // bright band width / full period width
    double phase_coefficient = 0.0;
    int roi_height_px = 0;
    double row_time_s = 0.0;
};

struct LuminaireRecord {
    std::string id;
    WorldPoint position;             // cm
    ModulationProfile profile;
    double half_power_deg = 60.0;
};

struct FeatureTolerances {
    int stripe_count = 1;
    double bright_ratio = 0.1;
    double phase = 0.15;
    double area_ratio = 0.3;         // relative
};

// Immutable after load; collision-checked against the reference render
// geometry (native row time, reference ROI height).
class LuminaireDatabase {
public:
    LuminaireDatabase() = default;
    LuminaireDatabase(std::vector<LuminaireRecord> records, FeatureTolerances tol,
                      double reference_row_time_s, int reference_roi_height_px);

    const std::vector<LuminaireRecord>& records() const { return records_; }
    const FeatureTolerances& tolerances() const { return tol_; }
    double reference_row_time() const { return ref_row_time_; }
    int reference_roi_height() const { return ref_roi_height_; }

    const LuminaireRecord* find(const std::string& id) const;

    // JSON schema (version 1):
    // { "version": 1, "records": [ {id, x_cm, y_cm, z_cm, freq_hz, duty,
    //   phase, half_power_deg, manchester?} ], "tolerances"?: {...} }
    static LuminaireDatabase from_json(const std::string& text);
    std::string to_json() const;
    static LuminaireDatabase load_file(const std::string& path);

    // Table-1 platform lamps (coordinates unit-corrected to the 100x100 cm
    // platform) with frequencies resolvable at the native row time.
    static LuminaireDatabase default_database();

private:
    void check_collisions() const;

    std::vector<LuminaireRecord> records_;
    FeatureTolerances tol_;
    double ref_row_time_ = 25e-6;
    int ref_roi_height_ = 84;
};

// Rolling-shutter timing needed by synthesis and expectation.
struct StripeRenderParams {
    double t_row_s = 25e-6;   // per native row
    double t_exp_s = 200e-6;
};

// Cumulative ON-time integral of the profile's waveform over [0, t).
// Exposed for tests; the implementation is closed-form piecewise linear.
double waveform_on_time(const ModulationProfile& p, double t);

// Analytic feature prediction for a lamp rendered into an ROI of the given
// height. Throws UnresolvableStripeError when a period is shorter than a row.
StripeFeatures expected_features(const ModulationProfile& profile,
                                 const StripeRenderParams& render, int roi_height_px);

// Rolling-shutter stripe patch: a disk of the given center/radius (patch
// coordinates, pixels) whose rows carry the exposure-integrated waveform.
// Row r integrates over [t0 + r*t_row, t0 + r*t_row + t_exp].
struct DiskSpec {
    double cx = 0.0;
    double cy = 0.0;
    double radius = 0.0;
    double peak = 255.0;     // brightness of a fully-on pixel
};
Frame synthesize_stripes(const ModulationProfile& profile, const StripeRenderParams& render,
                         const DiskSpec& disk, double t0, int width, int height,
                         double row_time_jitter_s = 0.0, std::uint64_t jitter_seed = 0);

struct SearchWindowRect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;
};

// Otsu-style per-ROI feature extraction. Throws NoSignalError for an all-dark
// ROI and DomainError when the ROI leaves the frame. Low-contrast bright ROIs
// (stripes washed out by exposure or resampling, or a constant-on lamp)
// collapse to a single uniform band, mirroring the resolution-loss behaviour
// of compressed frames.
StripeFeatures extract_features(const Frame& frame, const SearchWindowRect& roi,
                                double row_time_s);

// Unique record whose expected features sit within tolerance of f.
// nullopt: no candidate (caller keeps tracking and retries).
// Throws AmbiguousIdError when two records both qualify.
std::optional<std::string> match_id(const StripeFeatures& f, const LuminaireDatabase& db);

} // namespace vlp
