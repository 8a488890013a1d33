#include "varimotion/run.hpp"

#include "varimotion/errors.hpp"
#include "varimotion/io.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

namespace varimotion {

namespace fs = std::filesystem;

namespace {

double enclosing_radius(const Eigen::MatrixXd& X)
{
    return X.cols() == 0 ? 0.0 : X.colwise().norm().maxCoeff();
}

MetricsRow make_row(const RunConfig& config, const Simulation& sim, const CurvatureField& H,
                    const StepDiagnostics* diag)
{
    const auto& V = sim.state();
    MetricsRow row;
    row.step = sim.step();
    row.t = sim.time();
    row.radius = enclosing_radius(V.positions);
    if (!config.input_file && config.shape.kind == ShapeKind::Circle &&
        row.t < 0.5 * config.shape.radius * config.shape.radius)
        row.circle_error =
            circle_error(V.positions, row.t, config.shape.radius, Point::Zero(V.ambient_dim));
    row.max_curvature = H.max_norm();
    row.total_mass = total_mass(V);
    if (diag) {
        row.min_pair_distance = diag->min_pair_distance;
        row.components = diag->components;
        row.solver_iterations = diag->solver_iterations;
        row.residual = diag->solver_residual;
    } else {
        row.min_pair_distance = min_pair_distance(sim.graph());
        row.components = component_count(sim.graph());
    }
    return row;
}

nlohmann::json row_json(const MetricsRow& r)
{
    nlohmann::json j{{"step", r.step},
                     {"t", r.t},
                     {"R", r.radius},
                     {"maxH", r.max_curvature},
                     {"total_mass", r.total_mass},
                     {"min_pair_dist", r.min_pair_distance},
                     {"components", r.components},
                     {"solver_iters", r.solver_iterations},
                     {"residual", r.residual}};
    j["e"] = r.circle_error ? nlohmann::json(*r.circle_error) : nlohmann::json(nullptr);
    return j;
}

Eigen::VectorXd norms(const CurvatureField& H)
{
    return H.vectors.colwise().norm().transpose();
}

} // namespace

InitialCloud prepare_initial_cloud(const RunConfig& config)
{
    InitialCloud out;
    if (config.input_file) {
        auto loaded = load_cloud(*config.input_file, config.ambient_dim, config.intrinsic_dim);
        out.varifold = std::move(loaded.varifold);
        out.note = "loaded " + std::to_string(out.varifold.size()) + " points from " +
                   *config.input_file;
    } else {
        auto shape = generate(config.shape);
        out.varifold = std::move(shape.varifold);
        out.note = shape.note;
    }
    if (config.noise.std_dev > 0.0)
        out.varifold = add_noise(out.varifold, config.noise.std_dev, config.noise.seed);
    return out;
}

RunOutcome run(const RunConfig& config, std::ostream* log)
{
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    const fs::path dir = config.output_dir;
    fs::create_directories(dir);

    RunOutcome outcome;
    outcome.min_dominance_margin = std::numeric_limits<double>::infinity();
    InitialCloud initial = prepare_initial_cloud(config);
    const int d = initial.varifold.intrinsic_dim;
    const int n = initial.varifold.ambient_dim;
    if (log && !initial.note.empty())
        *log << initial.note << '\n';

    const long total = config.total_steps();
    std::optional<Simulation> sim;
    try {
        sim.emplace(std::move(initial.varifold), config.flow,
                    std::shared_ptr<const KernelPair>(make_default_kernels(n)),
                    MassProfile::indicator(d));
        CurvatureField H = sim->curvature();
        outcome.metrics.rows.push_back(make_row(config, *sim, H, nullptr));
        const Eigen::VectorXd h0 = norms(H);
        write_snapshot(sim->state(), 0, 0.0, dir, &h0);

        for (long k = 1; k <= total; ++k) {
            const StepDiagnostics& diag = sim->advance();
            outcome.min_dominance_margin =
                std::min(outcome.min_dominance_margin, diag.dominance_margin);
            H = sim->curvature();
            const MetricsRow& row =
                outcome.metrics.rows.emplace_back(make_row(config, *sim, H, &diag));
            if (!std::isfinite(row.max_curvature) || !sim->state().positions.allFinite())
                throw StepFailure("non-finite state after step " + std::to_string(k));
            outcome.steps_completed = k;
            if (k % config.snapshot_every == 0 || k == total) {
                const Eigen::VectorXd h = norms(H);
                write_snapshot(sim->state(), k, sim->time(), dir, &h);
            }
            if (log && (k % 100 == 0 || k == total))
                *log << "step " << k << "/" << total << " t=" << format_double(row.t)
                     << " maxH=" << format_double(row.max_curvature) << '\n';
        }
    } catch (const StepFailure& e) {
        outcome.exit_code = 2;
        outcome.failed_step = outcome.steps_completed + 1;
        outcome.failure = e.what();
        if (log)
            *log << "step " << *outcome.failed_step << " failed: " << e.what() << '\n';
    }
    outcome.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    {
        std::ofstream csv(dir / "metrics.csv", std::ios::binary);
        outcome.metrics.write_csv(csv);
        if (!csv)
            throw std::runtime_error("cannot write " + (dir / "metrics.csv").string());
    }

    nlohmann::json summary{{"config", to_json(config)},
                           {"status", outcome.exit_code == 0 ? "completed" : "step_failure"},
                           {"steps_completed", outcome.steps_completed},
                           {"steps_requested", total},
                           {"wall_seconds", outcome.wall_seconds},
                           {"note", initial.note}};
    if (!config.preset.empty())
        summary["preset"] = config.preset;
    if (std::isfinite(outcome.min_dominance_margin))
        summary["min_dominance_margin"] = outcome.min_dominance_margin;
    if (!outcome.metrics.rows.empty())
        summary["final"] = row_json(outcome.metrics.rows.back());
    if (outcome.failed_step)
        summary["failure"] = {{"step", *outcome.failed_step}, {"message", outcome.failure}};
    std::ofstream js(dir / "summary.json", std::ios::binary);
    js << summary.dump(2) << '\n';
    return outcome;
}

} // namespace varimotion
