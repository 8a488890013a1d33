#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace varimotion {

constexpr int kMaxDim = 3;

/// A point or vector of R^n, n <= 3, stack allocated.
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
/// n x n matrix, n <= 3.
using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
/// d x n matrix whose rows are an orthonormal basis of a tangent d-plane.
using Frame = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// Atomic d-varifold sum_i m_i delta_(x_i, P_i) in R^n.
struct PointCloudVarifold {
    int intrinsic_dim = 1;
    int ambient_dim = 2;
    Eigen::MatrixXd positions; // ambient_dim x N, one column per point
    std::vector<double> masses;
    std::vector<Frame> tangents;
    std::vector<bool> pinned;

    std::size_t size() const { return static_cast<std::size_t>(positions.cols()); }
    Point point(std::size_t i) const { return positions.col(static_cast<Eigen::Index>(i)); }
};

/// Cloud with unit masses, axis-aligned frames and no pins.
PointCloudVarifold make_varifold(int intrinsic_dim, Eigen::MatrixXd positions);

/// The six operators Pi_ij that may replace Pi_{P_j} in the curvature formula.
enum class ProjectorKind {
    TangentJ,          // Pi_{P_j}
    NormalJNeg,        // -2 Pi_{P_j^perp}
    TwoId,             // 2 Id
    NormalITangentJ,   // Pi_{P_i^perp} o Pi_{P_j}
    NormalINormalJNeg, // -2 Pi_{P_i^perp} o Pi_{P_j^perp}
    NormalI,           // 2 Pi_{P_i^perp}
};

std::string_view to_string(ProjectorKind kind);
ProjectorKind parse_projector(std::string_view name);

/// Orthogonal projector frame^T frame onto the plane spanned by the rows.
SmallMatrix tangent_projector(const Frame& frame);
SmallMatrix normal_projector(const Frame& frame);

/// Matrix of Pi_ij for the given frames at i and j.
SmallMatrix projector_matrix(ProjectorKind kind, const Frame& frame_i, const Frame& frame_j);

/// Pi_ij v. Throws std::invalid_argument on dimension mismatch.
Point project(ProjectorKind kind, const Frame& frame_i, const Frame& frame_j, const Point& v);

struct Violation {
    std::size_t index;
    std::string rule;
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

ValidationReport validate(const PointCloudVarifold& varifold, double frame_tolerance = 1e-10);

double total_mass(const PointCloudVarifold& varifold);

} // namespace varimotion
