#include "varimotion/metrics.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace varimotion {

double shrinking_radius(double T, double R0)
{
    const double r2 = R0 * R0 - 2.0 * T;
    if (!(r2 > 0.0))
        throw std::domain_error("reference radius undefined at or after extinction time R0^2/2");
    return std::sqrt(r2);
}

double circle_error(const Eigen::MatrixXd& positions, double T, double R0, const Point& center)
{
    const double reference = shrinking_radius(T, R0);
    if (positions.cols() == 0)
        return 0.0;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < positions.cols(); ++i)
        sum += std::abs(reference - (positions.col(i) - center).norm()) / reference;
    return sum / static_cast<double>(positions.cols());
}

double convergence_order(std::span<const ConvergencePoint> table)
{
    if (table.size() < 3)
        throw std::invalid_argument("convergence_order needs at least 3 (tau, error) pairs");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < table.size(); ++k) {
        if (!(table[k].error > 0.0))
            throw std::invalid_argument("convergence_order needs positive errors");
        if (!(table[k].tau > 0.0) || (k > 0 && !(table[k].tau < table[k - 1].tau)))
            throw std::invalid_argument("convergence_order needs strictly decreasing positive tau");
        const double x = std::log(table[k].tau);
        const double y = std::log(table[k].error);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double m = static_cast<double>(table.size());
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

double polyline_length(const PointCloudVarifold& varifold)
{
    return total_mass(varifold);
}

double surface_area_proxy(const PointCloudVarifold& varifold)
{
    return total_mass(varifold);
}

std::string format_double(double value)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

void RunMetrics::write_csv(std::ostream& out) const
{
    out << "step,t,R,e,maxH,total_mass,min_pair_dist,components,solver_iters,residual\n";
    for (const auto& r : rows) {
        out << r.step << ',' << format_double(r.t) << ',' << format_double(r.radius) << ','
            << (r.circle_error ? format_double(*r.circle_error) : std::string()) << ','
            << format_double(r.max_curvature) << ',' << format_double(r.total_mass) << ','
            << format_double(r.min_pair_distance) << ',' << r.components << ','
            << r.solver_iterations << ',' << format_double(r.residual) << '\n';
    }
}

} // namespace varimotion
