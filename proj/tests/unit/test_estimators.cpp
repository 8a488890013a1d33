#include "doctest.h"

#include "varimotion/errors.hpp"
#include "varimotion/estimators.hpp"
#include "varimotion/shapes.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

using namespace varimotion;

namespace {

constexpr double pi = std::numbers::pi;

Eigen::MatrixXd circle(int N, double R)
{
    Eigen::MatrixXd X(2, N);
    for (int i = 0; i < N; ++i) {
        const double t = 2.0 * pi * i / N;
        X(0, i) = R * std::cos(t);
        X(1, i) = R * std::sin(t);
    }
    return X;
}

// Ellipse sampled with an irregular parameter so no distance ties occur.
Eigen::MatrixXd ellipse(int N, double a, double b)
{
    Eigen::MatrixXd X(2, N);
    for (int i = 0; i < N; ++i) {
        const double s = 2.0 * pi * i / N;
        const double t = s + 0.05 * std::sin(s + 0.3) + 1e-3 * std::sin(7.0 * s + 1.1);
        X(0, i) = a * std::cos(t);
        X(1, i) = b * std::sin(t);
    }
    return X;
}

struct Estimated {
    PointCloudVarifold V;
    NeighborGraph graph;
    CurvatureField H;
};

Estimated estimate(const Eigen::MatrixXd& X, NeighborCounts counts, int d = 1,
                   ProjectorKind kind = ProjectorKind::NormalI)
{
    const int n = static_cast<int>(X.rows());
    Estimated e{make_varifold(d, X), build_graph(X, counts), {}};
    const auto kernels = make_default_kernels(n);
    estimate_geometry(e.V, e.graph, *kernels, MassProfile::indicator(d), false);
    e.H = approximate_curvature(e.V, e.graph, *kernels, kind);
    return e;
}

double frame_angle(const Frame& f, double tx, double ty)
{
    const double c = std::abs(f(0, 0) * tx + f(0, 1) * ty) / std::hypot(tx, ty);
    return std::acos(std::min(1.0, c));
}

} // namespace

TEST_CASE("masses on uniform line samples")
{
    const double h = 0.01;
    Eigen::MatrixXd X(2, 21);
    for (int i = 0; i < 21; ++i)
        X.col(i) << i * h, 0.0;
    // three points (x_i and its two neighbors) inside delta_i = 1.5 h
    const auto g = build_graph(X, NeighborCounts{2, 3, 3});
    const auto m = estimate_masses(X, g, MassProfile::indicator(1));
    for (int i = 2; i < 19; ++i) {
        CHECK(g.delta[static_cast<std::size_t>(i)] == doctest::Approx(1.5 * h).epsilon(1e-12));
        CHECK(m[static_cast<std::size_t>(i)] == doctest::Approx(h).epsilon(1e-12));
    }
}

TEST_CASE("masses of a coincident cluster")
{
    const int k_delta = 4;
    Eigen::MatrixXd X(2, 8);
    X.setZero();
    for (int i = k_delta; i < 8; ++i)
        X.col(i) << 10.0 + i, 0.0;
    const auto g = build_graph(X, NeighborCounts{1, 1, k_delta});
    const auto m = estimate_masses(X, g, MassProfile::indicator(1));
    for (int i = 0; i < k_delta; ++i) {
        const double delta = g.delta[static_cast<std::size_t>(i)];
        CHECK(delta == doctest::Approx(7.0));
        CHECK(m[static_cast<std::size_t>(i)] == doctest::Approx(2.0 * delta / k_delta).epsilon(1e-14));
    }
}

TEST_CASE("circle mass is close to the perimeter")
{
    const auto e = estimate(circle(400, 0.5), NeighborCounts{15, 17, 3});
    CHECK(total_mass(e.V) == doctest::Approx(pi).epsilon(0.10));
}

TEST_CASE("tangents of collinear points")
{
    Eigen::MatrixXd X(2, 5);
    for (int i = 0; i < 5; ++i)
        X.col(i) << 1.0 + 2.0 * i, -1.0 + 1.0 * i;
    const auto g = build_graph(X, NeighborCounts{3, 3, 1});
    BumpKernelPair k(2);
    const auto est = estimate_tangents(X, g, 1, [&](double s) { return k.xi(s); });
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(frame_angle(est.frames[i], 2.0, 1.0) <= 1e-7);
        CHECK(std::abs(est.eigenvalues[i](1)) <= 1e-12 * est.eigenvalues[i](0));
    }
}

TEST_CASE("symmetric triple gives the exact direction")
{
    const double h = 0.1;
    Eigen::MatrixXd X(2, 3);
    const double tx = 0.6, ty = 0.8;
    X.col(0) << 0.3, 0.2;
    X.col(1) << 0.3 + h * tx, 0.2 + h * ty;
    X.col(2) << 0.3 - h * tx, 0.2 - h * ty;
    NeighborGraph g = build_knn(X, 2);
    g.sigma.assign(3, 1.0);
    g.eps.assign(3, 1.0);
    g.delta.assign(3, 1.0);
    BumpKernelPair k(2);
    const auto est = estimate_tangents(X, g, 1, [&](double s) { return k.xi(s); });
    const SmallMatrix P = tangent_projector(est.frames[0]);
    Eigen::Matrix2d oracle;
    oracle << tx * tx, tx * ty, tx * ty, ty * ty;
    CHECK((P - oracle).norm() <= 1e-14);
}

TEST_CASE("circle tangents within the regression bound")
{
    const int N = 400;
    const auto e = estimate(circle(N, 0.5), NeighborCounts{15, 17, 3});
    double worst = 0.0;
    for (int i = 0; i < N; ++i) {
        const double t = 2.0 * pi * i / N;
        worst = std::max(worst, frame_angle(e.V.tangents[static_cast<std::size_t>(i)], -std::sin(t), std::cos(t)));
    }
    CHECK(worst < 2.0 * (2.0 * pi * 17 / N));
}

TEST_CASE("rank-deficient regression without a previous frame fails")
{
    Eigen::MatrixXd X(2, 4);
    X.setZero();
    NeighborGraph g = build_knn(X, 3);
    g.sigma.assign(4, 1.0);
    BumpKernelPair k(2);
    CHECK_THROWS_AS(estimate_tangents(X, g, 1, [&](double s) { return k.xi(s); }), StepFailure);

    std::vector<Frame> previous(4, Frame::Identity(1, 2));
    const auto est = estimate_tangents(X, g, 1, [&](double s) { return k.xi(s); }, &previous);
    CHECK(est.degenerate_count == 4);
    CHECK(est.frames[2] == previous[2]);
}

TEST_CASE("circle curvature points inward with magnitude 1/R")
{
    const auto e = estimate(circle(400, 0.5), NeighborCounts{15, 17, 3});
    for (std::size_t i = 0; i < e.V.size(); ++i) {
        CHECK(e.H.norm(i) >= 1.9);
        CHECK(e.H.norm(i) <= 2.1);
        CHECK(e.H.vectors.col(static_cast<Eigen::Index>(i)).dot(e.V.positions.col(static_cast<Eigen::Index>(i))) < 0.0);
    }
    CHECK(e.H.degenerate_count == 0);
}

TEST_CASE("triple junction curvature")
{
    const auto kernels = make_default_kernels(2);
    auto run = [&](std::vector<double> angles, ProjectorKind kind) {
        ShapeSpec spec;
        spec.kind = ShapeKind::Junction;
        spec.n = 300;
        spec.junction_angles_deg = std::move(angles);
        spec.junction_spacing = 0.01;
        auto V = generate(spec).varifold;
        const auto g = build_graph(V.positions, NeighborCounts{60, 17, 3});
        const auto H = approximate_curvature(V, g, *kernels, kind);
        double worst = 0.0;
        for (std::size_t i = 0; i < V.size(); ++i)
            if (V.positions.col(static_cast<Eigen::Index>(i)).norm() < 0.1)
                worst = std::max(worst, H.norm(i));
        return worst;
    };
    for (auto kind : {ProjectorKind::NormalI, ProjectorKind::NormalITangentJ}) {
        CHECK(run({0, 120, 240}, kind) <= 1e-9);
        CHECK(run({0, 90, 225}, kind) >= 1e-2);
    }
}

TEST_CASE("isolated points are degenerate")
{
    Eigen::MatrixXd X(2, 2);
    X << -0.5, 0.5, 0, 0;
    auto V = make_varifold(1, X);
    const auto kernels = make_default_kernels(2);
    const auto H = approximate_curvature_global(V, *kernels, ProjectorKind::TwoId, 0.5);
    CHECK(H.degenerate_count == 2);
    CHECK(H.vectors.isZero(0.0));
}

TEST_CASE("global and adaptive modes agree when radii coincide")
{
    const auto X = circle(100, 1.0);
    auto e = estimate(X, NeighborCounts{6, 8, 3});
    const double eps = e.graph.eps[0];
    for (auto& r : e.graph.eps)
        r = eps;
    const auto kernels = make_default_kernels(2);
    const auto local = approximate_curvature(e.V, e.graph, *kernels, ProjectorKind::TangentJ);
    const auto global = approximate_curvature_global(e.V, *kernels, ProjectorKind::TangentJ, eps);
    CHECK((local.vectors - global.vectors).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("rigid motion equivariance")
{
    const Eigen::MatrixXd X = ellipse(300, 0.6, 0.4);
    const double angle = 0.7;
    const Eigen::Matrix2d Rot = Eigen::Rotation2Dd(angle).toRotationMatrix();
    const Eigen::Vector2d shift(0.3, -1.2);
    Eigen::MatrixXd Y = Rot * X;
    Y.colwise() += shift;
    const NeighborCounts c{15, 17, 3};
    const auto a = estimate(X, c);
    const auto b = estimate(Y, c);
    CHECK((Rot * a.H.vectors - b.H.vectors).cwiseAbs().maxCoeff() <= 1e-10 * a.H.max_norm());
}

TEST_CASE("scaling")
{
    const Eigen::MatrixXd X = ellipse(300, 0.6, 0.4);
    const double s = 3.0;
    const NeighborCounts c{15, 17, 3};
    const auto a = estimate(X, c);
    const auto b = estimate(s * X, c);
    for (std::size_t i = 0; i < a.V.size(); ++i)
        CHECK(b.H.norm(i) == doctest::Approx(a.H.norm(i) / s).epsilon(1e-8));
}

TEST_CASE("convex curve curvature points inward")
{
    const auto e = estimate(ellipse(300, 0.6, 0.4), NeighborCounts{15, 17, 3});
    const Eigen::Vector2d centroid = e.V.positions.rowwise().mean();
    for (std::size_t i = 0; i < e.V.size(); ++i) {
        const auto col = static_cast<Eigen::Index>(i);
        CHECK(e.H.vectors.col(col).dot(e.V.positions.col(col) - centroid) < 0.0);
    }
}

TEST_CASE("ellipse curvature error shrinks with resolution")
{
    const double a = 0.6, b = 0.4;
    auto max_error = [&](int N) {
        const auto e = estimate(ellipse(N, a, b), NeighborCounts{15, 17, 3});
        double worst = 0.0;
        for (std::size_t i = 0; i < e.V.size(); ++i) {
            const auto col = static_cast<Eigen::Index>(i);
            const double x = e.V.positions(0, col), y = e.V.positions(1, col);
            // curvature vector of the ellipse at (x, y) = (a cos t, b sin t)
            const double c = x / a, s = y / b;
            const double speed2 = a * a * s * s + b * b * c * c;
            const double kappa = a * b / std::pow(speed2, 1.5);
            Eigen::Vector2d normal(-b * c, -a * s);
            normal.normalize();
            worst = std::max(worst, (e.H.vectors.col(col) - kappa * normal).norm());
        }
        return worst;
    };
    const double e1 = max_error(200), e2 = max_error(400), e3 = max_error(800);
    CHECK(e2 < e1);
    CHECK(e3 < e2);
}
