#include "varimotion/flow.hpp"

#include "varimotion/errors.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace varimotion {

namespace {

using Triplet = Eigen::Triplet<double>;

Eigen::Map<const Eigen::VectorXd> as_vector(const Eigen::MatrixXd& positions)
{
    return {positions.data(), positions.size()};
}

Eigen::MatrixXd as_positions(const Eigen::VectorXd& x, Eigen::Index n)
{
    return Eigen::Map<const Eigen::MatrixXd>(x.data(), n, x.size() / n);
}

void push_block(std::vector<Triplet>& out, Eigen::Index row, Eigen::Index col,
                const SmallMatrix& block)
{
    for (Eigen::Index a = 0; a < block.rows(); ++a)
        for (Eigen::Index b = 0; b < block.cols(); ++b)
            if (block(a, b) != 0.0)
                out.emplace_back(row + a, col + b, block(a, b));
}

struct LinearStep {
    Eigen::MatrixXd positions;
    int iterations = 0;
    double residual = 0.0;
    double margin = 0.0;
};

LinearStep linear_step(const PointCloudVarifold& varifold, const NeighborGraph& graph,
                       const KernelPair& kernels, const FlowConfig& config,
                       const Eigen::MatrixXd& weight_positions)
{
    const StepSystem sys = assemble_system(varifold, graph, kernels, config.projector, config.tau,
                                           &weight_positions);
    const Eigen::VectorXd guess = as_vector(weight_positions);
    SolveResult solved =
        solve_system(sys.matrix, sys.rhs, {config.solver_tol, config.solver_max_iter}, &guess);

    // Identity rows are solved exactly: pinned points keep their bits.
    const auto n = varifold.ambient_dim;
    for (std::size_t i = 0; i < varifold.size(); ++i)
        if (varifold.pinned[i])
            for (int a = 0; a < n; ++a) {
                const auto r = static_cast<Eigen::Index>(i) * n + a;
                solved.x[r] = sys.rhs[r];
            }
    if (!solved.x.allFinite())
        throw StepFailure("linear solve produced non-finite positions");

    LinearStep out;
    out.positions = as_positions(solved.x, n);
    out.iterations = solved.iterations;
    out.residual = solved.residual;
    out.margin = sys.dominance_margin;
    return out;
}

StepResult finish_step(const PointCloudVarifold& varifold, const NeighborGraph& graph,
                       const KernelPair& kernels, const MassProfile& mass_profile,
                       const FlowConfig& config, Eigen::MatrixXd next_positions,
                       StepDiagnostics diag)
{
    const Point center = config.sphere_center.value_or(Point::Zero(varifold.ambient_dim));
    const SphereDiagnostic sphere =
        sphere_diagnostic(varifold, next_positions, graph, config.projector, center);
    diag.enclosing_radius = sphere.radius;
    diag.sphere_constant = sphere.constant;
    diag.sphere_constant_empty = sphere.empty;

    StepResult result{varifold, diag};
    result.next.positions = std::move(next_positions);
    NeighborGraph refreshed = graph;
    refresh_distances(refreshed, result.next.positions);
    const TangentEstimate tangents =
        estimate_geometry(result.next, refreshed, kernels, mass_profile, true);
    result.diagnostics.tangent_degenerate_count = tangents.degenerate_count;
    result.diagnostics.min_pair_distance = min_pair_distance(refreshed);
    result.diagnostics.components = component_count(refreshed);
    return result;
}

} // namespace

std::string_view to_string(Scheme scheme)
{
    return scheme == Scheme::SemiImplicit ? "semi_implicit" : "implicit";
}

Scheme parse_scheme(std::string_view name)
{
    if (name == "semi_implicit")
        return Scheme::SemiImplicit;
    if (name == "implicit")
        return Scheme::Implicit;
    throw std::invalid_argument("unknown scheme '" + std::string(name) +
                                "' (expected semi_implicit or implicit)");
}

void FlowConfig::validate() const
{
    if (!(tau > 0.0))
        throw ConfigError("flow.tau must be > 0");
    if (counts.k_eps < 1 || counts.k_sigma < 1 || counts.k_delta < 1)
        throw ConfigError("flow.k_eps, flow.k_sigma and flow.k_delta must be >= 1");
    if (rebuild_every < 1)
        throw ConfigError("flow.rebuild_every must be >= 1");
    if (!(solver_tol > 0.0) || !(implicit_fp_tol > 0.0))
        throw ConfigError("solver tolerances must be > 0");
    if (solver_max_iter < 1 || implicit_fp_max_iter < 1)
        throw ConfigError("iteration limits must be >= 1");
}

StepSystem assemble_system(const PointCloudVarifold& varifold, const NeighborGraph& graph,
                           const KernelPair& kernels, ProjectorKind kind, double tau,
                           const Eigen::MatrixXd* weight_positions)
{
    const Eigen::MatrixXd& wpos = weight_positions ? *weight_positions : varifold.positions;
    const auto n = static_cast<Eigen::Index>(varifold.ambient_dim);
    const std::size_t count = varifold.size();
    const auto dim = n * static_cast<Eigen::Index>(count);
    const double ratio = static_cast<double>(varifold.intrinsic_dim) / varifold.ambient_dim;

    StepSystem sys;
    sys.mu.assign(count, 0.0);
    sys.eps = graph.eps;
    sys.rhs.resize(dim);

    std::vector<Triplet> l_entries;
    std::vector<Triplet> a_entries;
    const std::size_t stencil = count == 0 ? 0 : graph.adjacency.front().size() + 1;
    l_entries.reserve(count * stencil * static_cast<std::size_t>(n * n));
    a_entries.reserve(count * stencil * static_cast<std::size_t>(n * n));

    for (std::size_t i = 0; i < count; ++i) {
        const auto row = static_cast<Eigen::Index>(i) * n;
        const double eps = graph.eps[i];
        const auto xi = wpos.col(static_cast<Eigen::Index>(i));

        double mu = varifold.masses[i] * kernels.xi(0.0);
        SmallMatrix l_diag = SmallMatrix::Zero(n, n);
        for (const auto& nb : graph.adjacency[i]) {
            const auto j = static_cast<Eigen::Index>(nb.index);
            const double r = (wpos.col(j) - xi).norm();
            if (r >= eps)
                continue;
            const double s = r / eps;
            mu += varifold.masses[nb.index] * kernels.xi(s);
            if (r == 0.0)
                continue;
            const double w = -ratio * varifold.masses[nb.index] / r * kernels.rho_prime(s);
            if (w == 0.0)
                continue;
            const SmallMatrix block =
                w * projector_matrix(kind, varifold.tangents[i], varifold.tangents[nb.index]);
            l_diag -= block;
            push_block(l_entries, row, j * n, block);
            if (!varifold.pinned[i])
                push_block(a_entries, row, j * n, -(tau / eps) * block);
        }
        push_block(l_entries, row, row, l_diag);
        sys.mu[i] = mu;

        if (varifold.pinned[i]) {
            push_block(a_entries, row, row, SmallMatrix::Identity(n, n));
            sys.rhs.segment(row, n) = varifold.positions.col(static_cast<Eigen::Index>(i));
            continue;
        }
        if (!(mu > 0.0)) {
            std::ostringstream msg;
            msg << "degenerate stencil: mu_" << i << " = 0 (no neighbors inside eps_" << i << " = "
                << eps << ")";
            throw StepFailure(msg.str());
        }
        push_block(a_entries, row, row,
                   mu * SmallMatrix::Identity(n, n) - (tau / eps) * l_diag);
        sys.rhs.segment(row, n) = mu * varifold.positions.col(static_cast<Eigen::Index>(i));
    }

    sys.laplacian.resize(dim, dim);
    sys.laplacian.setFromTriplets(l_entries.begin(), l_entries.end());
    sys.matrix.resize(dim, dim);
    sys.matrix.setFromTriplets(a_entries.begin(), a_entries.end());

    Eigen::VectorXd diag = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd off = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index c = 0; c < sys.matrix.outerSize(); ++c)
        for (Eigen::SparseMatrix<double>::InnerIterator it(sys.matrix, c); it; ++it) {
            if (it.row() == it.col())
                diag[it.row()] = std::abs(it.value());
            else
                off[it.row()] += std::abs(it.value());
        }
    sys.dominance_margin = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < dim; ++r) {
        const double margin = diag[r] - off[r];
        if (margin < sys.dominance_margin) {
            sys.dominance_margin = margin;
            sys.dominance_row = static_cast<std::size_t>(r);
        }
    }
    return sys;
}

SolveResult solve_system(const Eigen::SparseMatrix<double>& matrix, const Eigen::VectorXd& rhs,
                         const SolverOptions& options, const Eigen::VectorXd* guess)
{
    SolveResult result;
    const double b_norm = rhs.lpNorm<Eigen::Infinity>();
    if (rhs.size() == 0 || b_norm == 0.0) {
        result.x = Eigen::VectorXd::Zero(rhs.size());
        return result;
    }

    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> solver;
    solver.setMaxIterations(options.max_iterations);
    // The Krylov stopping rule is a 2-norm ratio; sqrt(size) converts it to
    // a bound on the infinity-norm ratio.
    solver.setTolerance(std::max(options.tolerance / std::sqrt(static_cast<double>(rhs.size())),
                                 1e-15));
    solver.compute(matrix);
    if (solver.info() != Eigen::Success)
        throw StepFailure("preconditioner factorization failed");

    result.x = guess && guess->size() == rhs.size() ? solver.solveWithGuess(rhs, *guess)
                                                    : Eigen::VectorXd(solver.solve(rhs));
    result.iterations = static_cast<int>(solver.iterations());
    result.residual = (rhs - matrix * result.x).lpNorm<Eigen::Infinity>() / b_norm;

    for (int round = 0; round < 5 && !(result.residual <= options.tolerance); ++round) {
        const Eigen::VectorXd r = rhs - matrix * result.x;
        result.x += solver.solve(r);
        result.iterations += static_cast<int>(solver.iterations());
        result.residual = (rhs - matrix * result.x).lpNorm<Eigen::Infinity>() / b_norm;
    }
    if (!(result.residual <= options.tolerance)) {
        std::ostringstream msg;
        msg << "linear solver did not converge: residual " << result.residual << " after "
            << result.iterations << " iterations (tolerance " << options.tolerance << ")";
        throw StepFailure(msg.str());
    }
    return result;
}

SphereDiagnostic sphere_diagnostic(const PointCloudVarifold& varifold,
                                   const Eigen::MatrixXd& next_positions,
                                   const NeighborGraph& graph, ProjectorKind kind,
                                   const Point& center)
{
    SphereDiagnostic out;
    const auto count = next_positions.cols();
    if (count == 0) {
        out.empty = true;
        out.constant = std::numeric_limits<double>::infinity();
        return out;
    }
    Eigen::VectorXd radii(count);
    for (Eigen::Index i = 0; i < count; ++i)
        radii[i] = (next_positions.col(i) - center).norm();
    out.radius = radii.maxCoeff();

    const double cut = out.radius * (1.0 - 1e-12);
    out.constant = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < count; ++i) {
        if (radii[i] < cut)
            continue;
        const auto ii = static_cast<std::size_t>(i);
        const Point xi = next_positions.col(i);
        const Point outward = xi - center;
        for (const auto& nb : graph.adjacency[ii]) {
            const Point diff = xi - next_positions.col(static_cast<Eigen::Index>(nb.index));
            const double r2 = diff.squaredNorm();
            if (r2 == 0.0 || std::sqrt(r2) >= graph.eps[ii])
                continue;
            const Point proj =
                project(kind, varifold.tangents[ii], varifold.tangents[nb.index], diff);
            out.constant = std::min(out.constant, proj.dot(outward) / r2);
        }
    }
    out.empty = std::isinf(out.constant);
    return out;
}

BarrierCheck planar_barrier_check(std::span<const Eigen::MatrixXd> history, const Point& nu,
                                  double mu, double tol)
{
    BarrierCheck check;
    if (history.empty())
        return check;
    const auto max_height = [&](const Eigen::MatrixXd& x) {
        return x.cols() == 0 ? -std::numeric_limits<double>::infinity()
                             : (nu.transpose() * x).maxCoeff();
    };
    check.precondition_met = max_height(history.front()) <= mu;
    if (!check.precondition_met)
        return check;
    check.holds = true;
    for (std::size_t k = 0; k < history.size(); ++k) {
        if (max_height(history[k]) > mu + tol) {
            check.holds = false;
            check.first_violation = static_cast<long>(k);
            break;
        }
    }
    return check;
}

StepResult step_semi_implicit(const PointCloudVarifold& varifold, const NeighborGraph& graph,
                              const KernelPair& kernels, const MassProfile& mass_profile,
                              const FlowConfig& config)
{
    StepDiagnostics diag;
    const CurvatureField h = approximate_curvature(varifold, graph, kernels, config.projector);
    diag.max_curvature = h.max_norm();
    diag.degenerate_count = h.degenerate_count;

    LinearStep lin = linear_step(varifold, graph, kernels, config, varifold.positions);
    diag.solver_iterations = lin.iterations;
    diag.solver_residual = lin.residual;
    diag.dominance_margin = lin.margin;
    diag.picard_iterations = 1;
    return finish_step(varifold, graph, kernels, mass_profile, config, std::move(lin.positions),
                       std::move(diag));
}

StepResult step_implicit(const PointCloudVarifold& varifold, const NeighborGraph& graph,
                         const KernelPair& kernels, const MassProfile& mass_profile,
                         const FlowConfig& config)
{
    StepDiagnostics diag;
    const CurvatureField h = approximate_curvature(varifold, graph, kernels, config.projector);
    diag.max_curvature = h.max_norm();
    diag.degenerate_count = h.degenerate_count;
    diag.dominance_margin = std::numeric_limits<double>::infinity();

    Eigen::MatrixXd iterate = varifold.positions;
    bool converged = false;
    for (int q = 1; q <= config.implicit_fp_max_iter; ++q) {
        LinearStep lin = linear_step(varifold, graph, kernels, config, iterate);
        const double change = (lin.positions - iterate).cwiseAbs().maxCoeff();
        iterate = std::move(lin.positions);
        diag.solver_iterations += lin.iterations;
        diag.solver_residual = lin.residual;
        diag.dominance_margin = std::min(diag.dominance_margin, lin.margin);
        diag.picard_iterations = q;
        diag.picard_trace.push_back(change);
        if (change <= config.implicit_fp_tol) {
            converged = true;
            break;
        }
    }
    if (!converged && config.implicit_fp_max_iter > 1) {
        std::ostringstream msg;
        msg << "implicit fixed point did not converge in " << config.implicit_fp_max_iter
            << " iterations; max change per iteration:";
        for (double c : diag.picard_trace)
            msg << ' ' << c;
        throw StepFailure(msg.str());
    }
    return finish_step(varifold, graph, kernels, mass_profile, config, std::move(iterate),
                       std::move(diag));
}

Simulation::Simulation(PointCloudVarifold initial, FlowConfig config,
                       std::shared_ptr<const KernelPair> kernels, MassProfile mass_profile,
                       bool estimate_initial)
    : state_(std::move(initial)),
      config_(std::move(config)),
      kernels_(std::move(kernels)),
      mass_profile_(std::move(mass_profile))
{
    config_.validate();
    if (!kernels_)
        throw ConfigError("Simulation requires a kernel pair");
    if (kernels_->ambient_dim() != state_.ambient_dim)
        throw ConfigError("kernel ambient dimension does not match the cloud");
    graph_ = build_graph(state_.positions, config_.counts, 0);
    if (estimate_initial)
        estimate_geometry(state_, graph_, *kernels_, mass_profile_, false);
}

const StepDiagnostics& Simulation::advance()
{
    if (step_ > 0 && maybe_rebuild(graph_, state_.positions, step_, config_.rebuild_every))
        estimate_geometry(state_, graph_, *kernels_, mass_profile_, true);

    StepResult result = config_.scheme == Scheme::SemiImplicit
                            ? step_semi_implicit(state_, graph_, *kernels_, mass_profile_, config_)
                            : step_implicit(state_, graph_, *kernels_, mass_profile_, config_);
    state_ = std::move(result.next);
    refresh_distances(graph_, state_.positions);
    ++step_;
    last_ = std::move(result.diagnostics);
    last_.step = step_;
    last_.time = time();
    return last_;
}

CurvatureField Simulation::curvature() const
{
    return approximate_curvature(state_, graph_, *kernels_, config_.projector);
}

} // namespace varimotion
