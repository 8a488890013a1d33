#pragma once

#include "varimotion/kernels.hpp"
#include "varimotion/neighbors.hpp"
#include "varimotion/varifold.hpp"

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace varimotion {

/// m_i = C_lambda delta_i^d / sum_j lambda(|x_j - x_i| / delta_i), self included.
std::vector<double> estimate_masses(const Eigen::MatrixXd& positions, const NeighborGraph& graph,
                                    const MassProfile& profile);

struct TangentEstimate {
    std::vector<Frame> frames;
    std::vector<Point> eigenvalues; // covariance spectrum, descending
    std::vector<bool> degenerate;   // rank < d; previous frame reused
    std::size_t degenerate_count = 0;
};

/// Weighted local regression. The barycenter is the plain mean of the points
/// strictly inside the sigma_i-ball (self included); the covariance uses
/// zeta(|x_j - x_i| / sigma_i) weights. The frame rows are the top-d
/// eigenvectors. Rank-deficient points reuse `previous[i]` when given and
/// throw StepFailure otherwise.
TangentEstimate estimate_tangents(const Eigen::MatrixXd& positions, const NeighborGraph& graph,
                                  int intrinsic_dim, const std::function<double(double)>& zeta,
                                  const std::vector<Frame>* previous = nullptr);

struct CurvatureField {
    Eigen::MatrixXd vectors;          // n x N
    std::vector<double> denominators; // sum_l m_l xi(|x_l - x_i| / eps_i)
    std::vector<bool> degenerate;     // zero denominator, H_i set to 0
    std::size_t degenerate_count = 0;

    double norm(std::size_t i) const { return vectors.col(static_cast<Eigen::Index>(i)).norm(); }
    double max_norm() const;
};

/// H_eps^Pi at every point using the per-point radii eps_i of `graph` and
/// only the cached neighbors strictly inside eps_i.
CurvatureField approximate_curvature(const PointCloudVarifold& varifold, const NeighborGraph& graph,
                                     const KernelPair& kernels, ProjectorKind kind);

/// Same formula with one global eps, summing over every point (O(N^2)).
CurvatureField approximate_curvature_global(const PointCloudVarifold& varifold,
                                            const KernelPair& kernels, ProjectorKind kind,
                                            double eps);

/// Refreshes masses (indicator or given profile) and tangents (zeta = xi)
/// of `varifold` from its positions. When `tangents_known` the current
/// frames serve as fallback for rank-deficient regressions. Returns the
/// tangent estimate for diagnostics.
TangentEstimate estimate_geometry(PointCloudVarifold& varifold, const NeighborGraph& graph,
                                  const KernelPair& kernels, const MassProfile& mass_profile,
                                  bool tangents_known);

} // namespace varimotion
