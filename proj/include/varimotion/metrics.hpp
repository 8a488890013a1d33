#pragma once

#include "varimotion/varifold.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace varimotion {

/// Radius of a circle shrinking under curvature flow, sqrt(R0^2 - 2T).
/// Throws std::domain_error at or past the extinction time R0^2 / 2.
double shrinking_radius(double T, double R0);

/// Relative mean radial error (1/N) sum_i |R(T) - |x_i - c|| / R(T).
double circle_error(const Eigen::MatrixXd& positions, double T, double R0, const Point& center);

struct ConvergencePoint {
    double tau;
    double error;
};

/// Least-squares slope of log(error) against log(tau). Needs >= 3 points,
/// strictly decreasing tau and positive errors (std::invalid_argument otherwise).
double convergence_order(std::span<const ConvergencePoint> table);

/// Length (d = 1) or area (d = 2) of the cloud as its total estimated mass.
double polyline_length(const PointCloudVarifold& varifold);
double surface_area_proxy(const PointCloudVarifold& varifold);

struct MetricsRow {
    long step = 0;
    double t = 0.0;
    double radius = 0.0;                // enclosing radius about the reference center
    std::optional<double> circle_error; // only for circle runs before extinction
    double max_curvature = 0.0;
    double total_mass = 0.0;
    double min_pair_distance = 0.0;
    std::size_t components = 0;
    int solver_iterations = 0;
    double residual = 0.0;
};

/// Time series of one run, serialized as CSV with the fixed header
/// step,t,R,e,maxH,total_mass,min_pair_dist,components,solver_iters,residual.
struct RunMetrics {
    std::vector<MetricsRow> rows;

    void write_csv(std::ostream& out) const;
};

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

} // namespace varimotion
