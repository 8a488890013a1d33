#pragma once

#include "varimotion/estimators.hpp"
#include "varimotion/kernels.hpp"
#include "varimotion/neighbors.hpp"
#include "varimotion/varifold.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace varimotion {

enum class Scheme { SemiImplicit, Implicit };

std::string_view to_string(Scheme scheme);
Scheme parse_scheme(std::string_view name);

struct FlowConfig {
    double tau = 0.0005;
    ProjectorKind projector = ProjectorKind::NormalI;
    NeighborCounts counts;
    int rebuild_every = 1;
    Scheme scheme = Scheme::SemiImplicit;
    double solver_tol = 1e-10;
    int solver_max_iter = 2000;
    double implicit_fp_tol = 1e-10;
    int implicit_fp_max_iter = 50;
    /// Center z of the enclosing-sphere diagnostic; empty means the origin.
    std::optional<Point> sphere_center;

    /// Throws ConfigError on tau <= 0, counts < 1 or nonpositive tolerances.
    void validate() const;
};

/// Linear system (M - diag(tau/eps_i) L) X = M X^k of one step, with
/// pinned rows replaced by identity rows.
struct StepSystem {
    std::vector<double> mu;                  // mass denominators
    std::vector<double> eps;                 // per-row radius
    Eigen::SparseMatrix<double> laplacian;   // L, nN x nN
    Eigen::SparseMatrix<double> matrix;      // A
    Eigen::VectorXd rhs;                     // M X^k (x^k on pinned rows)
    /// min over scalar rows r of |A_rr| - sum_{s != r} |A_rs|.
    double dominance_margin = 0.0;
    std::size_t dominance_row = 0;
};

/// Assembles the step system for `varifold` (positions X^k, masses,
/// tangents, pins). When `weight_positions` is given the weights omega and
/// mu are evaluated there (Picard iterate) while the right-hand side stays
/// M X^k. Throws StepFailure when mu_i = 0 at an unpinned point.
StepSystem assemble_system(const PointCloudVarifold& varifold, const NeighborGraph& graph,
                           const KernelPair& kernels, ProjectorKind kind, double tau,
                           const Eigen::MatrixXd* weight_positions = nullptr);

struct SolverOptions {
    double tolerance = 1e-10;
    int max_iterations = 2000;
};

struct SolveResult {
    Eigen::VectorXd x;
    int iterations = 0;
    double residual = 0.0; // ||Ax - b||_inf / ||b||_inf
};

/// BiCGSTAB with an incomplete LU preconditioner, followed by residual
/// refinement until the relative infinity-norm residual meets the tolerance.
/// Throws StepFailure if it does not.
SolveResult solve_system(const Eigen::SparseMatrix<double>& matrix, const Eigen::VectorXd& rhs,
                         const SolverOptions& options, const Eigen::VectorXd* guess = nullptr);

struct SphereDiagnostic {
    double constant = 0.0; // c^k; +inf when no admissible (i, j) pair
    double radius = 0.0;   // R^{k+1}
    bool empty = false;
};

/// R^{k+1} = max_i |x_i^{k+1} - z| and c^k over the farthest points i and
/// their cached neighbors j with 0 < |x_i^{k+1} - x_j^{k+1}| < eps_i, using
/// the step-k tangents of `varifold`.
SphereDiagnostic sphere_diagnostic(const PointCloudVarifold& varifold,
                                   const Eigen::MatrixXd& next_positions,
                                   const NeighborGraph& graph, ProjectorKind kind,
                                   const Point& center);

struct BarrierCheck {
    bool precondition_met = false;
    bool holds = false;
    long first_violation = -1; // index into history, -1 if none
};

/// True iff max_i x_i^k . nu <= mu + tol for every recorded step.
BarrierCheck planar_barrier_check(std::span<const Eigen::MatrixXd> history, const Point& nu,
                                  double mu, double tol = 1e-9);

struct StepDiagnostics {
    long step = 0;
    double time = 0.0;
    double enclosing_radius = 0.0;
    double sphere_constant = 0.0;
    bool sphere_constant_empty = false;
    double min_pair_distance = 0.0;
    double max_curvature = 0.0;
    std::size_t degenerate_count = 0; // zero-denominator curvature points
    std::size_t tangent_degenerate_count = 0;
    std::size_t components = 0;
    int solver_iterations = 0;
    double solver_residual = 0.0;
    double dominance_margin = 0.0;
    int picard_iterations = 0;
    std::vector<double> picard_trace; // max position change per iteration
};

struct StepResult {
    PointCloudVarifold next;
    StepDiagnostics diagnostics;
};

/// One step of the linearized scheme. `varifold` must carry masses and
/// tangents estimated at its positions with `graph`. Masses and tangents of
/// the result are re-estimated at the new positions along the cached edges.
StepResult step_semi_implicit(const PointCloudVarifold& varifold, const NeighborGraph& graph,
                              const KernelPair& kernels, const MassProfile& mass_profile,
                              const FlowConfig& config);

/// Implicit-in-positions step solved by Picard iteration on the weights;
/// tangents and masses stay frozen at step k inside the iteration.
StepResult step_implicit(const PointCloudVarifold& varifold, const NeighborGraph& graph,
                         const KernelPair& kernels, const MassProfile& mass_profile,
                         const FlowConfig& config);

/// Owns the evolving state and runs maybe_rebuild -> estimate -> step.
class Simulation {
public:
    /// Builds the neighbor graph and, if `estimate_initial`, masses and
    /// tangents of `initial`.
    Simulation(PointCloudVarifold initial, FlowConfig config,
               std::shared_ptr<const KernelPair> kernels, MassProfile mass_profile,
               bool estimate_initial = true);

    const StepDiagnostics& advance();

    const PointCloudVarifold& state() const { return state_; }
    const NeighborGraph& graph() const { return graph_; }
    const FlowConfig& config() const { return config_; }
    const KernelPair& kernels() const { return *kernels_; }
    long step() const { return step_; }
    double time() const { return static_cast<double>(step_) * config_.tau; }
    CurvatureField curvature() const;
    const StepDiagnostics& last_diagnostics() const { return last_; }

private:
    PointCloudVarifold state_;
    FlowConfig config_;
    std::shared_ptr<const KernelPair> kernels_;
    MassProfile mass_profile_;
    NeighborGraph graph_;
    long step_ = 0;
    StepDiagnostics last_;
};

} // namespace varimotion
