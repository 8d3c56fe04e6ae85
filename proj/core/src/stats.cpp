#include "vlp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vlp {

namespace {

using Pt = std::pair<double, double>;

double cross(const Pt& o, const Pt& a, const Pt& b) {
    return (a.first - o.first) * (b.second - o.second) -
           (a.second - o.second) * (b.first - o.first);
}

// Andrew monotone chain; returns hull in counter-clockwise order.
std::vector<Pt> convex_hull(std::vector<Pt> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const std::size_t n = pts.size();
    if (n < 3) return pts;
    std::vector<Pt> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

double sq_dist(const Pt& a, const Pt& b) {
    double dx = a.first - b.first;
    double dy = a.second - b.second;
    return dx * dx + dy * dy;
}

// rotating calipers diameter on the hull
double hull_diameter(const std::vector<Pt>& hull) {
    const std::size_t n = hull.size();
    if (n < 2) return 0.0;
    if (n == 2) return std::sqrt(sq_dist(hull[0], hull[1]));
    double best = 0.0;
    std::size_t j = 1;
    for (std::size_t i = 0; i < n; ++i) {
        const Pt& a = hull[i];
        const Pt& b = hull[(i + 1) % n];
        // advance the antipodal point while the supported area grows
        while (true) {
            std::size_t jn = (j + 1) % n;
            double area_j = std::abs(cross(a, b, hull[j]));
            double area_jn = std::abs(cross(a, b, hull[jn]));
            if (area_jn > area_j) {
                j = jn;
            } else {
                break;
            }
        }
        best = std::max({best, sq_dist(a, hull[j]), sq_dist(b, hull[j])});
    }
    return std::sqrt(best);
}

} // namespace

double dispersion_radius(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 2) throw DomainError("dispersion radius needs at least 2 points");
    return hull_diameter(convex_hull(points)) / 2.0;
}

double percentile_nearest_rank(std::vector<double> values, double p) {
    if (values.empty()) throw DomainError("percentile of empty sample");
    if (p <= 0.0 || p > 1.0) throw DomainError("percentile level must be in (0, 1]");
    std::size_t k = static_cast<std::size_t>(std::ceil(p * values.size()));
    if (k == 0) k = 1;
    std::nth_element(values.begin(), values.begin() + (k - 1), values.end());
    return values[k - 1];
}

LineFit fit_line(const std::vector<Sample2D>& samples, FitAxis dominant_axis) {
    if (samples.size() < 2) throw DomainError("line fit needs at least 2 samples");
    // centered two-pass OLS of the dependent coordinate on the dominant one
    double mu = 0.0, mv = 0.0;
    for (const auto& s : samples) {
        double u = dominant_axis == FitAxis::X ? s.est_x : s.est_y;
        double v = dominant_axis == FitAxis::X ? s.est_y : s.est_x;
        mu += u;
        mv += v;
    }
    mu /= samples.size();
    mv /= samples.size();
    double suu = 0.0, suv = 0.0;
    for (const auto& s : samples) {
        double u = (dominant_axis == FitAxis::X ? s.est_x : s.est_y) - mu;
        double v = (dominant_axis == FitAxis::X ? s.est_y : s.est_x) - mv;
        suu += u * u;
        suv += u * v;
    }
    if (suu < 1e-12) throw DegenerateGeometryError("zero variance on the dominant axis");
    LineFit fit;
    fit.axis = dominant_axis;
    fit.slope = suv / suu;
    fit.intercept = mv - fit.slope * mu;
    return fit;
}

ErrorStats error_distribution(std::vector<Sample2D> samples) {
    if (samples.empty()) throw DomainError("error distribution of empty sample");
    ErrorStats st;
    st.samples = std::move(samples);

    std::vector<double> errs;
    errs.reserve(st.samples.size());
    for (const auto& s : st.samples) errs.push_back(s.error_cm);

    st.mean = std::accumulate(errs.begin(), errs.end(), 0.0) / errs.size();
    st.max = *std::max_element(errs.begin(), errs.end());
    st.p90 = percentile_nearest_rank(errs, 0.90);
    st.p95 = percentile_nearest_rank(errs, 0.95);

    std::vector<std::pair<double, double>> pts;
    pts.reserve(st.samples.size());
    for (const auto& s : st.samples) pts.emplace_back(s.est_x, s.est_y);
    st.dispersion_radius_cm = pts.size() >= 2 ? dispersion_radius(pts) : 0.0;

    // PMF over fixed 0.1 cm bins
    constexpr double kBin = 0.1;
    int nbins = static_cast<int>(std::floor(st.max / kBin)) + 1;
    std::vector<double> pmf(nbins, 0.0);
    for (double e : errs) {
        int b = std::min(static_cast<int>(std::floor(e / kBin)), nbins - 1);
        pmf[b] += 1.0;
    }
    for (int b = 0; b < nbins; ++b)
        st.pmf.emplace_back((b + 0.5) * kBin, pmf[b] / errs.size());

    std::vector<double> sorted = errs;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i)
        st.cdf.emplace_back(sorted[i], static_cast<double>(i + 1) / sorted.size());
    return st;
}

double point_segment_distance(double px, double py, double x0, double y0, double x1, double y1) {
    double vx = x1 - x0;
    double vy = y1 - y0;
    double len2 = vx * vx + vy * vy;
    double t = len2 > 0 ? ((px - x0) * vx + (py - y0) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(px - (x0 + t * vx), py - (y0 + t * vy));
}

} // namespace vlp
