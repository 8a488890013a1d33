#include "varimotion/estimators.hpp"

#include "varimotion/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace varimotion {

namespace {

template <int N>
void top_eigenvectors(const SmallMatrix& cov, int d, Frame& frame, Point& spectrum)
{
    using Mat = Eigen::Matrix<double, N, N>;
    const Mat m = cov;
    Eigen::SelfAdjointEigenSolver<Mat> solver;
    if constexpr (N == 2)
        solver.computeDirect(m);
    else
        solver.compute(m);
    // Eigen returns ascending eigenvalues.
    spectrum.resize(N);
    for (int k = 0; k < N; ++k)
        spectrum[k] = solver.eigenvalues()[N - 1 - k];
    frame.resize(d, N);
    for (int r = 0; r < d; ++r)
        frame.row(r) = solver.eigenvectors().col(N - 1 - r).transpose();
}

void add_term(Point& numerator, double& denominator, const PointCloudVarifold& v,
              const KernelPair& kernels, ProjectorKind kind, std::size_t i, std::size_t j,
              double distance, double eps)
{
    const double s = distance / eps;
    denominator += v.masses[j] * kernels.xi(s);
    if (distance == 0.0)
        return; // rho'(0) = 0
    const double rp = kernels.rho_prime(s);
    if (rp == 0.0)
        return;
    const Point u = (v.point(j) - v.point(i)) / distance;
    numerator += v.masses[j] * rp * project(kind, v.tangents[i], v.tangents[j], u);
}

void finish_point(CurvatureField& field, const PointCloudVarifold& v, std::size_t i,
                  const Point& numerator, double denominator, double eps)
{
    const auto col = static_cast<Eigen::Index>(i);
    field.denominators[i] = denominator;
    if (denominator > 0.0) {
        const double scale = -static_cast<double>(v.intrinsic_dim) / v.ambient_dim / eps;
        field.vectors.col(col) = scale * numerator / denominator;
    } else {
        field.vectors.col(col).setZero();
        field.degenerate[i] = true;
        ++field.degenerate_count;
    }
}

CurvatureField empty_field(const PointCloudVarifold& v)
{
    CurvatureField field;
    field.vectors = Eigen::MatrixXd::Zero(v.ambient_dim, static_cast<Eigen::Index>(v.size()));
    field.denominators.assign(v.size(), 0.0);
    field.degenerate.assign(v.size(), false);
    return field;
}

} // namespace

std::vector<double> estimate_masses(const Eigen::MatrixXd& positions, const NeighborGraph& graph,
                                    const MassProfile& profile)
{
    (void)positions; // distances come from the (refreshed) graph
    const int d = profile.intrinsic_dim();
    std::vector<double> masses(graph.size());
    for (std::size_t i = 0; i < graph.size(); ++i) {
        const double delta = graph.delta[i];
        double weight = profile(0.0);
        for (const auto& nb : graph.adjacency[i]) {
            if (nb.distance >= delta)
                break;
            weight += profile(nb.distance / delta);
        }
        if (!(weight > 0.0)) {
            std::ostringstream msg;
            msg << "mass estimate at point " << i << " has zero kernel weight";
            throw StepFailure(msg.str());
        }
        masses[i] = profile.normalization() * std::pow(delta, d) / weight;
    }
    return masses;
}

TangentEstimate estimate_tangents(const Eigen::MatrixXd& positions, const NeighborGraph& graph,
                                  int intrinsic_dim, const std::function<double(double)>& zeta,
                                  const std::vector<Frame>* previous)
{
    const auto n = positions.rows();
    const std::size_t count = graph.size();
    TangentEstimate out;
    out.frames.resize(count);
    out.eigenvalues.resize(count);
    out.degenerate.assign(count, false);

    for (std::size_t i = 0; i < count; ++i) {
        const auto ci = static_cast<Eigen::Index>(i);
        const double sigma = graph.sigma[i];
        const auto& list = graph.adjacency[i];

        Point bary = positions.col(ci);
        std::size_t inside = 1;
        for (const auto& nb : list) {
            if (nb.distance >= sigma)
                break;
            bary += positions.col(static_cast<Eigen::Index>(nb.index));
            ++inside;
        }
        bary /= static_cast<double>(inside);

        SmallMatrix cov = SmallMatrix::Zero(n, n);
        const auto accumulate = [&](Eigen::Index j, double w) {
            if (w == 0.0)
                return;
            const Point c = positions.col(j) - bary;
            cov.noalias() += w * c * c.transpose();
        };
        accumulate(ci, zeta(0.0));
        for (const auto& nb : list) {
            if (nb.distance >= sigma)
                break;
            accumulate(static_cast<Eigen::Index>(nb.index), zeta(nb.distance / sigma));
        }

        Frame frame;
        Point spectrum;
        if (n == 2)
            top_eigenvectors<2>(cov, intrinsic_dim, frame, spectrum);
        else
            top_eigenvectors<3>(cov, intrinsic_dim, frame, spectrum);
        out.eigenvalues[i] = spectrum;

        const double largest = spectrum[0];
        const double dth = spectrum[intrinsic_dim - 1];
        const bool rank_deficient = !(largest > 0.0) || dth <= 1e-12 * largest;
        if (rank_deficient) {
            out.degenerate[i] = true;
            ++out.degenerate_count;
            if (previous == nullptr || previous->size() != count) {
                std::ostringstream msg;
                msg << "tangent regression at point " << i << " has rank < " << intrinsic_dim
                    << " and no previous tangent to fall back on";
                throw StepFailure(msg.str());
            }
            out.frames[i] = (*previous)[i];
        } else {
            out.frames[i] = frame;
        }
    }
    return out;
}

double CurvatureField::max_norm() const
{
    if (vectors.cols() == 0)
        return 0.0;
    return vectors.colwise().norm().maxCoeff();
}

CurvatureField approximate_curvature(const PointCloudVarifold& varifold, const NeighborGraph& graph,
                                     const KernelPair& kernels, ProjectorKind kind)
{
    CurvatureField field = empty_field(varifold);
    for (std::size_t i = 0; i < varifold.size(); ++i) {
        const double eps = graph.eps[i];
        Point numerator = Point::Zero(varifold.ambient_dim);
        double denominator = 0.0;
        add_term(numerator, denominator, varifold, kernels, kind, i, i, 0.0, eps);
        for (const auto& nb : graph.adjacency[i]) {
            if (nb.distance >= eps)
                break;
            add_term(numerator, denominator, varifold, kernels, kind, i, nb.index, nb.distance, eps);
        }
        finish_point(field, varifold, i, numerator, denominator, eps);
    }
    return field;
}

CurvatureField approximate_curvature_global(const PointCloudVarifold& varifold,
                                            const KernelPair& kernels, ProjectorKind kind, double eps)
{
    if (!(eps > 0.0))
        throw ConfigError("global eps must be positive");
    CurvatureField field = empty_field(varifold);
    for (std::size_t i = 0; i < varifold.size(); ++i) {
        Point numerator = Point::Zero(varifold.ambient_dim);
        double denominator = 0.0;
        for (std::size_t j = 0; j < varifold.size(); ++j) {
            const double r = (varifold.point(j) - varifold.point(i)).norm();
            if (r < eps)
                add_term(numerator, denominator, varifold, kernels, kind, i, j, r, eps);
        }
        finish_point(field, varifold, i, numerator, denominator, eps);
    }
    return field;
}

TangentEstimate estimate_geometry(PointCloudVarifold& varifold, const NeighborGraph& graph,
                                  const KernelPair& kernels, const MassProfile& mass_profile,
                                  bool tangents_known)
{
    varifold.masses = estimate_masses(varifold.positions, graph, mass_profile);
    auto zeta = [&kernels](double s) { return kernels.xi(s); };
    TangentEstimate tangents = estimate_tangents(varifold.positions, graph, varifold.intrinsic_dim,
                                                 zeta, tangents_known ? &varifold.tangents : nullptr);
    varifold.tangents = tangents.frames;
    return tangents;
}

} // namespace varimotion
