#include "varimotion/config.hpp"

#include "varimotion/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace varimotion {

using nlohmann::json;

namespace {

RunConfig base_preset(ShapeKind kind, std::size_t n, NeighborCounts counts, double tau)
{
    RunConfig c;
    c.shape.kind = kind;
    c.shape.n = n;
    c.flow.counts = counts;
    c.flow.tau = tau;
    c.flow.projector = ProjectorKind::NormalI;
    return c;
}

// Walks one JSON object, remembering which keys were read so leftovers can
// be reported with their full path.
class ObjectReader {
public:
    ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path))
    {
        if (!obj_.is_object())
            throw ConfigError(where() + ": expected an object");
    }

    template <class T, class Apply>
    void read(const std::string& key, Apply&& apply)
    {
        seen_.insert(key);
        const auto it = obj_.find(key);
        if (it == obj_.end())
            return;
        T value;
        try {
            value = it->template get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(path_of(key) + ": " + e.what());
        }
        try {
            apply(value);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(path_of(key) + ": " + e.what());
        }
    }

    const json* child(const std::string& key)
    {
        seen_.insert(key);
        const auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    void finish() const
    {
        for (const auto& [key, value] : obj_.items())
            if (!seen_.count(key))
                throw ConfigError(path_of(key) + ": unknown key");
    }

    std::string path_of(const std::string& key) const
    {
        return path_.empty() ? key : path_ + "." + key;
    }

private:
    std::string where() const { return path_.empty() ? "<root>" : path_; }

    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

template <class T>
void require_positive(const std::string& path, T value)
{
    if (!(value > T{}))
        throw ConfigError(path + ": must be > 0");
}

} // namespace

void RunConfig::validate() const
{
    if (steps.has_value() == final_time.has_value())
        throw ConfigError("exactly one of 'steps' and 'time' must be given");
    if (steps && *steps < 0)
        throw ConfigError("steps: must be >= 0");
    if (final_time && !(*final_time >= 0.0))
        throw ConfigError("time: must be >= 0");
    if (snapshot_every < 1)
        throw ConfigError("snapshot_every: must be >= 1");
    if (ambient_dim < 2 || ambient_dim > 3 || intrinsic_dim < 1 || intrinsic_dim >= ambient_dim)
        throw ConfigError("dimensions must satisfy 1 <= intrinsic_dim < ambient_dim <= 3");
    if (!input_file)
        shape.validate();
    flow.validate();
}

long RunConfig::total_steps() const
{
    if (steps)
        return *steps;
    return static_cast<long>(std::llround(final_time.value_or(0.0) / flow.tau));
}

std::vector<std::string> preset_names()
{
    return {"circle400",      "flower400", "double-circle1000", "triple-circle1200",
            "steiner300",     "tetra6052", "cube18600"};
}

RunConfig make_preset(std::string_view name)
{
    RunConfig c;
    if (name == "circle400") {
        c = base_preset(ShapeKind::Circle, 400, {15, 17, 3}, 0.0005);
        c.shape.radius = 0.5;
        c.final_time = 0.1;
    } else if (name == "flower400") {
        c = base_preset(ShapeKind::Flower, 400, {25, 19, 7}, 0.0025);
        c.shape.flower_amplitude = 0.4;
        c.final_time = 0.1;
    } else if (name == "double-circle1000") {
        c = base_preset(ShapeKind::DoubleCircle, 1000, {31, 15, 7}, 2.5e-4);
        c.final_time = 0.2;
    } else if (name == "triple-circle1200") {
        c = base_preset(ShapeKind::TripleCircle, 1200, {31, 15, 7}, 1.0 / 2400.0);
        c.final_time = 0.3;
    } else if (name == "steiner300") {
        c = base_preset(ShapeKind::SquareSteiner, 300, {41, 11, 7}, 1.0 / 1200.0);
        c.shape.side = 1.0;
        c.shape.pin = PinRule::Corners;
        c.flow.rebuild_every = 25;
        c.final_time = 1.0;
    } else if (name == "tetra6052") {
        c = base_preset(ShapeKind::TetrahedronFaces, 6052, {26, 23, 17}, 0.005);
        c.shape.pin = PinRule::EdgesAndCorners;
        c.flow.rebuild_every = 2;
        c.steps = 97;
        c.snapshot_every = 12;
    } else if (name == "cube18600") {
        c = base_preset(ShapeKind::CubeFaces, 18600, {21, 23, 9}, 0.01);
        c.shape.pin = PinRule::EdgesAndCorners;
        c.flow.rebuild_every = 50;
        c.steps = 2400;
        c.snapshot_every = 400;
    } else {
        std::string known;
        for (const auto& p : preset_names())
            known += (known.empty() ? "" : ", ") + p;
        throw ConfigError("unknown preset '" + std::string(name) + "' (known: " + known + ")");
    }
    const bool solid =
        c.shape.kind == ShapeKind::TetrahedronFaces || c.shape.kind == ShapeKind::CubeFaces;
    c.ambient_dim = solid ? 3 : 2;
    c.intrinsic_dim = solid ? 2 : 1;
    c.preset = std::string(name);
    return c;
}

RunConfig parse_config(const json& doc, RunConfig base)
{
    RunConfig c = std::move(base);
    ObjectReader root(doc, "");

    root.read<std::string>("preset", [&](const std::string& p) { c = make_preset(p); });

    if (const json* shape = root.child("shape")) {
        ObjectReader r(*shape, "shape");
        r.read<std::string>("kind", [&](const std::string& v) {
            c.shape.kind = parse_shape(v);
            const bool solid = c.shape.kind == ShapeKind::TetrahedronFaces ||
                               c.shape.kind == ShapeKind::CubeFaces;
            c.ambient_dim = solid ? 3 : 2;
            c.intrinsic_dim = solid ? 2 : 1;
        });
        r.read<std::size_t>("n", [&](std::size_t v) { c.shape.n = v; });
        r.read<double>("radius", [&](double v) {
            require_positive("shape.radius", v);
            c.shape.radius = v;
        });
        r.read<double>("flower_amplitude", [&](double v) { c.shape.flower_amplitude = v; });
        r.read<double>("side", [&](double v) {
            require_positive("shape.side", v);
            c.shape.side = v;
        });
        r.read<std::vector<double>>("junction_angles",
                                    [&](const std::vector<double>& v) { c.shape.junction_angles_deg = v; });
        r.read<double>("junction_spacing", [&](double v) {
            require_positive("shape.junction_spacing", v);
            c.shape.junction_spacing = v;
        });
        r.read<std::string>("pin", [&](const std::string& v) { c.shape.pin = parse_pin_rule(v); });
        r.finish();
    }

    if (const json* flow = root.child("flow")) {
        ObjectReader r(*flow, "flow");
        r.read<double>("tau", [&](double v) {
            require_positive("flow.tau", v);
            c.flow.tau = v;
        });
        r.read<std::string>("projector",
                            [&](const std::string& v) { c.flow.projector = parse_projector(v); });
        r.read<std::string>("scheme", [&](const std::string& v) { c.flow.scheme = parse_scheme(v); });
        r.read<int>("k_eps", [&](int v) {
            require_positive("flow.k_eps", v);
            c.flow.counts.k_eps = v;
        });
        r.read<int>("k_sigma", [&](int v) {
            require_positive("flow.k_sigma", v);
            c.flow.counts.k_sigma = v;
        });
        r.read<int>("k_delta", [&](int v) {
            require_positive("flow.k_delta", v);
            c.flow.counts.k_delta = v;
        });
        r.read<int>("rebuild_every", [&](int v) {
            require_positive("flow.rebuild_every", v);
            c.flow.rebuild_every = v;
        });
        r.read<double>("solver_tol", [&](double v) {
            require_positive("flow.solver_tol", v);
            c.flow.solver_tol = v;
        });
        r.read<int>("solver_max_iter", [&](int v) {
            require_positive("flow.solver_max_iter", v);
            c.flow.solver_max_iter = v;
        });
        r.read<double>("implicit_fp_tol", [&](double v) {
            require_positive("flow.implicit_fp_tol", v);
            c.flow.implicit_fp_tol = v;
        });
        r.read<int>("implicit_fp_max_iter", [&](int v) {
            require_positive("flow.implicit_fp_max_iter", v);
            c.flow.implicit_fp_max_iter = v;
        });
        r.finish();
    }

    if (const json* noise = root.child("noise")) {
        ObjectReader r(*noise, "noise");
        r.read<double>("std", [&](double v) {
            if (!(v >= 0.0))
                throw ConfigError("noise.std: must be >= 0");
            c.noise.std_dev = v;
        });
        r.read<std::uint64_t>("seed", [&](std::uint64_t v) { c.noise.seed = v; });
        r.finish();
    }

    const bool has_steps = doc.contains("steps");
    const bool has_time = doc.contains("time");
    if (has_steps && has_time)
        throw ConfigError("steps/time: give exactly one of 'steps' and 'time'");
    root.read<long>("steps", [&](long v) {
        c.steps = v;
        c.final_time.reset();
    });
    root.read<double>("time", [&](double v) {
        c.final_time = v;
        c.steps.reset();
    });
    root.read<int>("snapshot_every", [&](int v) {
        require_positive("snapshot_every", v);
        c.snapshot_every = v;
    });
    root.read<std::string>("output_dir", [&](const std::string& v) { c.output_dir = v; });
    root.read<std::string>("input_file", [&](const std::string& v) { c.input_file = v; });
    root.read<int>("intrinsic_dim", [&](int v) { c.intrinsic_dim = v; });
    root.read<int>("ambient_dim", [&](int v) { c.ambient_dim = v; });
    root.finish();

    c.validate();
    return c;
}

RunConfig load_config_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

json to_json(const RunConfig& c)
{
    json shape{{"kind", to_string(c.shape.kind)},
               {"n", c.shape.n},
               {"radius", c.shape.radius},
               {"flower_amplitude", c.shape.flower_amplitude},
               {"side", c.shape.side},
               {"junction_angles", c.shape.junction_angles_deg},
               {"junction_spacing", c.shape.junction_spacing}};
    if (c.shape.pin)
        shape["pin"] = to_string(*c.shape.pin);
    json flow{{"tau", c.flow.tau},
              {"projector", to_string(c.flow.projector)},
              {"scheme", to_string(c.flow.scheme)},
              {"k_eps", c.flow.counts.k_eps},
              {"k_sigma", c.flow.counts.k_sigma},
              {"k_delta", c.flow.counts.k_delta},
              {"rebuild_every", c.flow.rebuild_every},
              {"solver_tol", c.flow.solver_tol},
              {"solver_max_iter", c.flow.solver_max_iter},
              {"implicit_fp_tol", c.flow.implicit_fp_tol},
              {"implicit_fp_max_iter", c.flow.implicit_fp_max_iter}};
    json doc{{"shape", shape},
             {"flow", flow},
             {"noise", {{"std", c.noise.std_dev}, {"seed", c.noise.seed}}},
             {"snapshot_every", c.snapshot_every},
             {"output_dir", c.output_dir},
             {"intrinsic_dim", c.intrinsic_dim},
             {"ambient_dim", c.ambient_dim}};
    if (c.steps)
        doc["steps"] = *c.steps;
    if (c.final_time)
        doc["time"] = *c.final_time;
    if (c.input_file)
        doc["input_file"] = *c.input_file;
    return doc;
}

void apply_overrides(RunConfig& c, const ConfigOverrides& o)
{
    if (o.steps && o.time)
        throw ConfigError("--steps and --time are mutually exclusive");
    if (o.preset)
        c = make_preset(*o.preset);
    if (o.shape) {
        c.shape.kind = parse_shape(*o.shape);
        const bool solid =
            c.shape.kind == ShapeKind::TetrahedronFaces || c.shape.kind == ShapeKind::CubeFaces;
        c.ambient_dim = solid ? 3 : 2;
        c.intrinsic_dim = solid ? 2 : 1;
    }
    if (o.n)
        c.shape.n = *o.n;
    if (o.k_eps)
        c.flow.counts.k_eps = *o.k_eps;
    if (o.k_sigma)
        c.flow.counts.k_sigma = *o.k_sigma;
    if (o.k_delta)
        c.flow.counts.k_delta = *o.k_delta;
    if (o.tau)
        c.flow.tau = *o.tau;
    if (o.steps) {
        c.steps = *o.steps;
        c.final_time.reset();
    }
    if (o.time) {
        c.final_time = *o.time;
        c.steps.reset();
    }
    try {
        if (o.projector)
            c.flow.projector = parse_projector(*o.projector);
        if (o.scheme)
            c.flow.scheme = parse_scheme(*o.scheme);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (o.rebuild_every)
        c.flow.rebuild_every = *o.rebuild_every;
    if (o.noise_std)
        c.noise.std_dev = *o.noise_std;
    if (o.seed)
        c.noise.seed = *o.seed;
    if (o.out)
        c.output_dir = *o.out;
    if (o.snapshot_every)
        c.snapshot_every = *o.snapshot_every;
    if (o.input)
        c.input_file = *o.input;
    c.validate();
}

} // namespace varimotion
