#include "doctest.h"

#include "varimotion/config.hpp"
#include "varimotion/errors.hpp"
#include "varimotion/io.hpp"
#include "varimotion/run.hpp"

#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

using namespace varimotion;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("varimotion_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_text(const fs::path& p, const std::string& text)
{
    std::ofstream(p, std::ios::binary) << text;
}

} // namespace

TEST_CASE("snapshot line format")
{
    auto V = make_varifold(1, Eigen::MatrixXd::Zero(2, 1));
    V.masses = {1.0};
    Frame f(1, 2);
    f << 1, 0;
    V.tangents = {f};
    CHECK(snapshot_line(V, 0) == "0 0 1 1 0 0");
    V.pinned[0] = true;
    CHECK(snapshot_line(V, 0) == "0 0 1 1 0 1");
}

TEST_CASE("snapshot round trip is bitwise")
{
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    Eigen::MatrixXd X(3, 40);
    for (Eigen::Index i = 0; i < X.size(); ++i)
        X(i) = g(rng) * 1e-3 + g(rng);
    auto V = make_varifold(2, X);
    for (std::size_t i = 0; i < V.size(); ++i) {
        V.masses[i] = std::abs(g(rng)) / 7.0;
        V.pinned[i] = i % 3 == 0;
    }
    const auto dir = scratch("roundtrip");
    const auto path = write_snapshot(V, 12, 0.06, dir);
    CHECK(path.filename() == "snapshot_000012.txt");
    CHECK(fs::exists(dir / "snapshot_000012.ply"));
    CHECK(slurp(path).rfind("# varimotion v1 dim=3 intrinsic=2 step=12 t=0.06\n", 0) == 0);

    const auto loaded = load_cloud(path, 2, 1); // header overrides the hints
    CHECK(loaded.from_snapshot);
    CHECK(loaded.varifold.ambient_dim == 3);
    CHECK(loaded.varifold.intrinsic_dim == 2);
    CHECK(loaded.varifold.positions == V.positions);
    CHECK(loaded.varifold.masses == V.masses);
    CHECK(loaded.varifold.pinned == V.pinned);
}

TEST_CASE("ply follows the ascii grammar")
{
    Eigen::MatrixXd X(3, 3);
    X << 0, 1, 0, 0, 0, 1, 0, 0, 0;
    auto V = make_varifold(2, X);
    Eigen::VectorXd curvature(3);
    curvature << 0.5, 1.5, 2.5;
    const auto dir = scratch("ply");
    write_ply(V, dir / "c.ply", &curvature);

    std::istringstream in(slurp(dir / "c.ply"));
    std::string line;
    std::getline(in, line);
    CHECK(line == "ply");
    std::getline(in, line);
    CHECK(line == "format ascii 1.0");
    std::size_t vertices = 0;
    std::vector<std::string> props;
    while (std::getline(in, line) && line != "end_header") {
        std::istringstream words(line);
        std::string kw;
        words >> kw;
        if (kw == "element") {
            std::string name;
            words >> name >> vertices;
            CHECK(name == "vertex");
        } else if (kw == "property") {
            std::string type, name;
            words >> type >> name;
            CHECK(type == "double");
            props.push_back(name);
        } else {
            CHECK(kw == "comment");
        }
    }
    CHECK(line == "end_header");
    CHECK(vertices == 3);
    CHECK(props == std::vector<std::string>{"x", "y", "z", "nx", "ny", "nz", "curvature"});
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        std::istringstream words(line);
        double v;
        std::size_t cols = 0;
        while (words >> v)
            ++cols;
        CHECK(cols == props.size());
        ++rows;
    }
    CHECK(rows == vertices);

    // make_varifold uses the (e1, e2) frame, whose normal is e3
    const Eigen::Vector3d n = surface_normal(V.tangents[0]);
    CHECK(std::abs(std::abs(n.z()) - 1.0) <= 1e-15);
}

TEST_CASE("plain coordinate files")
{
    const auto dir = scratch("xyz");
    write_text(dir / "a.xyz", "# comment\n0 0 0\n1 0 0\n\n0 1 0.5\n");
    const auto a = load_cloud(dir / "a.xyz", 3, 2);
    CHECK_FALSE(a.from_snapshot);
    CHECK(a.varifold.size() == 3);
    CHECK(a.varifold.positions(2, 2) == 0.5);

    write_text(dir / "b.xyz", "0 0 0\n1 0\n");
    try {
        load_cloud(dir / "b.xyz", 3, 2);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }

    write_text(dir / "c.xyz", "0 0 x\n");
    CHECK_THROWS_AS(load_cloud(dir / "c.xyz", 3, 2), ParseError);
    CHECK_THROWS_AS(load_cloud(dir / "missing.xyz", 3, 2), ParseError);
}

TEST_CASE("presets expand to the reference parameters")
{
    const auto c = make_preset("circle400");
    CHECK(c.shape.n == 400);
    CHECK(c.flow.counts.k_delta == 3);
    CHECK(c.flow.counts.k_sigma == 17);
    CHECK(c.flow.counts.k_eps == 15);
    CHECK(c.flow.tau == 0.0005);
    CHECK(c.flow.projector == ProjectorKind::NormalI);

    const auto s = make_preset("steiner300");
    CHECK(s.shape.n == 300);
    CHECK(s.flow.counts.k_eps == 41);
    CHECK(s.flow.counts.k_delta == 7);
    CHECK(s.flow.tau == doctest::Approx(1.0 / 1200.0).epsilon(1e-15));
    CHECK(s.flow.rebuild_every == 25);
    REQUIRE(s.shape.pin.has_value());
    CHECK(*s.shape.pin == PinRule::Corners);

    const auto t = make_preset("tetra6052");
    CHECK(t.flow.counts.k_eps == 26);
    CHECK(t.flow.rebuild_every == 2);
    CHECK(t.flow.tau == 0.005);
    CHECK(t.snapshot_every == 12);
    CHECK(t.ambient_dim == 3);

    for (const auto& name : preset_names())
        CHECK_NOTHROW(make_preset(name).validate());
    CHECK_THROWS_AS(make_preset("nope"), ConfigError);
}

TEST_CASE("config parsing")
{
    using nlohmann::json;
    const auto c = parse_config(json::parse(R"({"preset": "circle400", "flow": {"tau": 0.001}, "steps": 7})"));
    CHECK(c.flow.tau == 0.001);
    CHECK(c.total_steps() == 7);
    CHECK(c.flow.counts.k_eps == 15);

    CHECK_THROWS_AS(parse_config(json::parse(R"({"preset": "circle400", "steps": 3, "time": 0.1})")),
                    ConfigError);
    try {
        parse_config(json::parse(R"({"preset": "circle400", "flow": {"k_epss": 3}})"));
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("flow.k_epss") != std::string::npos);
    }
    try {
        parse_config(json::parse(R"({"preset": "circle400", "flow": {"tau": -1}})"));
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("flow.tau") != std::string::npos);
    }
    try {
        parse_config(json::parse(R"({"preset": "circle400", "flow": {"projector": "sideways"}})"));
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("flow.projector") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config(json::parse(R"({"shape": {"kind": "circle"}})")), ConfigError);

    const auto echoed = parse_config(to_json(make_preset("flower400")));
    CHECK(echoed.flow.counts.k_eps == 25);
    CHECK(echoed.shape.kind == ShapeKind::Flower);
    CHECK(*echoed.final_time == 0.1);
}

TEST_CASE("flag overrides")
{
    auto c = make_preset("circle400");
    ConfigOverrides o;
    o.steps = 12;
    o.k_eps = 9;
    o.projector = "two_id";
    apply_overrides(c, o);
    CHECK(c.total_steps() == 12);
    CHECK_FALSE(c.final_time.has_value());
    CHECK(c.flow.counts.k_eps == 9);
    CHECK(c.flow.projector == ProjectorKind::TwoId);

    ConfigOverrides both;
    both.steps = 1;
    both.time = 0.1;
    CHECK_THROWS_AS(apply_overrides(c, both), ConfigError);

    ConfigOverrides bad;
    bad.scheme = "explicit";
    CHECK_THROWS_AS(apply_overrides(c, bad), ConfigError);
}

TEST_CASE("zero steps emit only the initial snapshot")
{
    auto c = make_preset("circle400");
    c.steps = 0;
    c.final_time.reset();
    c.output_dir = scratch("zero").string();
    const auto out = run(c);
    CHECK(out.exit_code == 0);
    std::vector<std::string> snaps;
    for (const auto& e : fs::directory_iterator(c.output_dir))
        if (e.path().filename().string().rfind("snapshot_", 0) == 0)
            snaps.push_back(e.path().filename().string());
    CHECK(snaps == std::vector<std::string>{"snapshot_000000.txt"});
    CHECK(out.metrics.rows.size() == 1);
    CHECK(fs::exists(fs::path(c.output_dir) / "metrics.csv"));
    CHECK(fs::exists(fs::path(c.output_dir) / "summary.json"));
}

TEST_CASE("runs are reproducible and respect the snapshot cadence")
{
    auto c = make_preset("circle400");
    c.steps = 6;
    c.final_time.reset();
    c.snapshot_every = 4;
    c.noise.std_dev = 0.0125;
    c.noise.seed = 3;
    const auto dir_a = scratch("repro_a");
    c.output_dir = dir_a.string();
    const auto a = run(c);
    c.output_dir = scratch("repro_b").string();
    const auto b = run(c);
    CHECK(a.exit_code == 0);
    CHECK(a.metrics.rows.size() == 7);
    CHECK(slurp(fs::path(c.output_dir) / "metrics.csv") ==
          slurp(dir_a / "metrics.csv"));
    for (long k : {0L, 4L, 6L}) {
        char name[32];
        std::snprintf(name, sizeof name, "snapshot_%06ld.txt", k);
        CHECK(fs::exists(fs::path(c.output_dir) / name));
    }
    CHECK_FALSE(fs::exists(fs::path(c.output_dir) / "snapshot_000002.txt"));

    const auto summary = nlohmann::json::parse(slurp(fs::path(c.output_dir) / "summary.json"));
    CHECK(summary["status"] == "completed");
    CHECK(summary["steps_completed"] == 6);
    CHECK(summary.contains("wall_seconds"));
    CHECK(summary["config"]["flow"]["k_eps"] == 15);
}

TEST_CASE("3D runs write curvature into the point files")
{
    RunConfig c;
    c.shape.kind = ShapeKind::TetrahedronFaces;
    c.shape.n = 200;
    c.ambient_dim = 3;
    c.intrinsic_dim = 2;
    c.flow.counts = {12, 12, 6};
    c.flow.tau = 0.005;
    c.steps = 2;
    c.snapshot_every = 1;
    c.output_dir = scratch("tetra").string();
    const auto out = run(c);
    CHECK(out.exit_code == 0);
    for (const char* name : {"snapshot_000000.ply", "snapshot_000001.ply", "snapshot_000002.ply"}) {
        const auto text = slurp(fs::path(c.output_dir) / name);
        CHECK(text.find("property double curvature") != std::string::npos);
    }
}

TEST_CASE("step failures give a nonzero exit and record the step")
{
    RunConfig c = make_preset("circle400");
    c.flow.solver_max_iter = 1;
    c.flow.solver_tol = 1e-300;
    c.steps = 3;
    c.final_time.reset();
    c.output_dir = scratch("fail").string();
    const auto out = run(c);
    CHECK(out.exit_code != 0);
    REQUIRE(out.failed_step.has_value());
    CHECK(*out.failed_step == 1);
    const auto summary = nlohmann::json::parse(slurp(fs::path(c.output_dir) / "summary.json"));
    CHECK(summary["failure"]["step"] == 1);
}

TEST_CASE("runs from a loaded cloud")
{
    const auto dir = scratch("input");
    std::ostringstream xyz;
    for (int i = 0; i < 100; ++i) {
        const double t = 2.0 * std::numbers::pi * i / 100;
        xyz << 0.5 * std::cos(t) << ' ' << 0.5 * std::sin(t) << '\n';
    }
    write_text(dir / "ring.xyz", xyz.str());
    RunConfig c;
    c.input_file = (dir / "ring.xyz").string();
    c.flow.counts = {9, 9, 3};
    c.steps = 2;
    c.output_dir = (dir / "out").string();
    const auto out = run(c);
    CHECK(out.exit_code == 0);
    CHECK(out.metrics.rows.back().step == 2);
}
