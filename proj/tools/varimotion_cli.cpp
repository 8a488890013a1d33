#include "varimotion/config.hpp"
#include "varimotion/errors.hpp"
#include "varimotion/run.hpp"

#include "CLI11.hpp"

#include <iostream>

using namespace varimotion;

int main(int argc, char** argv)
{
    CLI::App app{"Mean curvature flow of point cloud varifolds"};

    std::optional<std::string> config_path;
    ConfigOverrides o;
    bool list_presets = false;

    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--preset", o.preset, "named experiment preset");
    app.add_option("--shape", o.shape,
                   "circle | flower | double_circle | triple_circle | square_steiner | junction | "
                   "tetrahedron_faces | cube_faces");
    app.add_option("--n", o.n, "number of points");
    app.add_option("--k-eps", o.k_eps, "neighbors inside the curvature radius");
    app.add_option("--k-sigma", o.k_sigma, "neighbors inside the tangent regression radius");
    app.add_option("--k-delta", o.k_delta, "neighbors inside the mass radius");
    app.add_option("--tau", o.tau, "time step");
    auto* steps = app.add_option("--steps", o.steps, "number of steps");
    auto* time = app.add_option("--time", o.time, "final time");
    steps->excludes(time);
    app.add_option("--projector", o.projector,
                   "tangent_j | neg_normal_j | two_id | normal_i_tangent_j | "
                   "neg_normal_i_normal_j | normal_i");
    app.add_option("--scheme", o.scheme, "semi_implicit | implicit");
    app.add_option("--rebuild-every", o.rebuild_every, "neighbor search cadence in steps");
    app.add_option("--noise-std", o.noise_std, "standard deviation of initial Gaussian noise");
    app.add_option("--seed", o.seed, "noise seed");
    app.add_option("--out", o.out, "output directory");
    app.add_option("--snapshot-every", o.snapshot_every, "snapshot cadence in steps");
    app.add_option("--input", o.input, "point cloud file (snapshot or plain coordinates)");
    app.add_flag("--list-presets", list_presets, "print preset names and exit");

    CLI11_PARSE(app, argc, argv);

    if (list_presets) {
        for (const auto& name : preset_names())
            std::cout << name << '\n';
        return 0;
    }

    try {
        RunConfig config;
        if (config_path) {
            config = load_config_file(*config_path);
        } else if (!o.preset) {
            config = make_preset("circle400");
        }
        apply_overrides(config, o);
        const RunOutcome outcome = run(config, &std::cout);
        if (outcome.exit_code != 0)
            std::cerr << "run stopped at step " << *outcome.failed_step << ": " << outcome.failure
                      << '\n';
        return outcome.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
