#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vlp/error.hpp"

namespace vlp {

struct Sample2D {
    double truth_x = 0.0;
    double truth_y = 0.0;
    double est_x = 0.0;
    double est_y = 0.0;
    double error_cm = 0.0;
    double t_solve_s = 0.0;
};

enum class FitAxis { X, Y };  // dominant (independent) coordinate of the motion

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    FitAxis axis = FitAxis::X;
};

struct ErrorStats {
    std::vector<Sample2D> samples;
    double mean = 0.0;
    double p90 = 0.0;
    double p95 = 0.0;
    double max = 0.0;
    double dispersion_radius_cm = 0.0;
    std::vector<std::pair<double, double>> pmf;  // (bin center cm, probability)
    std::vector<std::pair<double, double>> cdf;  // (error cm, cumulative fraction)
};

// Half the greatest pairwise distance among the points (the dispersion
// circle's diameter is the farthest pair). Convex hull + rotating calipers;
// the O(n^2) scan lives in the tests as the oracle.
double dispersion_radius(const std::vector<std::pair<double, double>>& points);

// Nearest-rank percentile: smallest value with at least p of the mass at or
// below it.
double percentile_nearest_rank(std::vector<double> values, double p);

// OLS of the dependent coordinate on the dominant one over estimated
// positions: axis X fits y = s*x + b, axis Y fits x = s*y + b.
LineFit fit_line(const std::vector<Sample2D>& samples, FitAxis dominant_axis);

// Aggregate error statistics; PMF over fixed 0.1 cm bins, CDF by sorted
// ranks. The per-sample error_cm values must already be filled.
ErrorStats error_distribution(std::vector<Sample2D> samples);

// Point-to-segment distance helper for the straight-line path metric.
double point_segment_distance(double px, double py, double x0, double y0, double x1, double y1);

} // namespace vlp
