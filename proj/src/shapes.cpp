#include "varimotion/shapes.hpp"

#include "varimotion/errors.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace varimotion {

namespace {

using std::numbers::pi;

constexpr std::array<std::pair<ShapeKind, std::string_view>, 8> kShapeNames{{
    {ShapeKind::Circle, "circle"},
    {ShapeKind::Flower, "flower"},
    {ShapeKind::DoubleCircle, "double_circle"},
    {ShapeKind::TripleCircle, "triple_circle"},
    {ShapeKind::SquareSteiner, "square_steiner"},
    {ShapeKind::Junction, "junction"},
    {ShapeKind::TetrahedronFaces, "tetrahedron_faces"},
    {ShapeKind::CubeFaces, "cube_faces"},
}};

struct CloudBuilder {
    std::vector<double> coords;
    std::vector<bool> pinned;
    int n;

    void add(std::initializer_list<double> p, bool pin)
    {
        coords.insert(coords.end(), p.begin(), p.end());
        pinned.push_back(pin);
    }

    PointCloudVarifold finish(int intrinsic_dim)
    {
        const auto count = static_cast<Eigen::Index>(pinned.size());
        Eigen::MatrixXd positions = Eigen::Map<Eigen::MatrixXd>(coords.data(), n, count);
        PointCloudVarifold v = make_varifold(intrinsic_dim, std::move(positions));
        v.pinned = pinned;
        return v;
    }
};

void add_circle(CloudBuilder& b, double cx, double cy, double radius, std::size_t count)
{
    for (std::size_t i = 0; i < count; ++i) {
        const double t = 2.0 * pi * static_cast<double>(i) / static_cast<double>(count);
        b.add({cx + radius * std::cos(t), cy + radius * std::sin(t)}, false);
    }
}

// Nearest m >= 2 whose layout size f(m) is closest to the request.
template <class F>
std::size_t nearest_grid(std::size_t requested, F layout_size)
{
    std::size_t best = 2;
    for (std::size_t m = 2; m < 100000; ++m) {
        const auto diff = [&](std::size_t k) {
            const auto s = layout_size(k);
            return s > requested ? s - requested : requested - s;
        };
        if (diff(m) < diff(best))
            best = m;
        if (layout_size(m) > requested)
            break;
    }
    return best;
}

GeneratedShape tetrahedron(const ShapeSpec& spec, PinRule pin)
{
    const auto layout = [](std::size_t m) { return 2 * m * m + 2; };
    const std::size_t m = nearest_grid(spec.n, layout);
    const double s = spec.side;
    const std::array<std::array<double, 3>, 4> v{{{0, 0, 0}, {s, 0, 0}, {0, s, 0}, {0, 0, s}}};
    const bool pin_edges = pin == PinRule::EdgesAndCorners;
    const bool pin_corners = pin != PinRule::None;

    CloudBuilder b{{}, {}, 3};
    const auto lerp3 = [&](const std::array<double, 3>& a, const std::array<double, 3>& c,
                           double t) {
        return std::array<double, 3>{a[0] + t * (c[0] - a[0]), a[1] + t * (c[1] - a[1]),
                                     a[2] + t * (c[2] - a[2])};
    };
    for (const auto& corner : v)
        b.add({corner[0], corner[1], corner[2]}, pin_corners);
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t c = a + 1; c < 4; ++c)
            for (std::size_t k = 1; k < m; ++k) {
                const auto p = lerp3(v[a], v[c], static_cast<double>(k) / static_cast<double>(m));
                b.add({p[0], p[1], p[2]}, pin_edges);
            }
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t c = a + 1; c < 4; ++c)
            for (std::size_t e = c + 1; e < 4; ++e)
                for (std::size_t i = 1; i < m; ++i)
                    for (std::size_t j = 1; i + j < m; ++j) {
                        const std::size_t k = m - i - j;
                        const double wi = static_cast<double>(i) / static_cast<double>(m);
                        const double wj = static_cast<double>(j) / static_cast<double>(m);
                        const double wk = static_cast<double>(k) / static_cast<double>(m);
                        b.add({wi * v[a][0] + wj * v[c][0] + wk * v[e][0],
                               wi * v[a][1] + wj * v[c][1] + wk * v[e][1],
                               wi * v[a][2] + wj * v[c][2] + wk * v[e][2]},
                              false);
                    }

    GeneratedShape out{b.finish(2), spec.n, false, {}};
    out.adjusted = out.varifold.size() != spec.n;
    std::ostringstream note;
    note << "tetrahedron faces on a " << m << "-subdivision triangular grid, N = "
         << out.varifold.size();
    out.note = note.str();
    return out;
}

GeneratedShape cube(const ShapeSpec& spec, PinRule pin)
{
    const auto layout = [](std::size_t m) { return 6 * m * m + 2; };
    const std::size_t m = nearest_grid(spec.n, layout);
    const double h = spec.side / static_cast<double>(m);
    const bool pin_edges = pin == PinRule::EdgesAndCorners;
    const bool pin_corners = pin != PinRule::None;

    // Every lattice point (i, j, k) in [0, m]^3 with at least one coordinate
    // on the boundary lies on a face; it is on an edge when two are, and a
    // corner when all three are.
    CloudBuilder b{{}, {}, 3};
    for (std::size_t i = 0; i <= m; ++i)
        for (std::size_t j = 0; j <= m; ++j)
            for (std::size_t k = 0; k <= m; ++k) {
                const int on = (i == 0 || i == m) + (j == 0 || j == m) + (k == 0 || k == m);
                if (on == 0)
                    continue;
                const bool pinned = (on == 3 && pin_corners) || (on == 2 && pin_edges);
                b.add({static_cast<double>(i) * h, static_cast<double>(j) * h,
                       static_cast<double>(k) * h},
                      pinned);
            }

    GeneratedShape out{b.finish(2), spec.n, false, {}};
    out.adjusted = out.varifold.size() != spec.n;
    std::ostringstream note;
    note << "cube faces on a " << m << "x" << m << " grid per face, N = " << out.varifold.size();
    out.note = note.str();
    return out;
}

} // namespace

std::string_view to_string(ShapeKind kind)
{
    for (const auto& [k, name] : kShapeNames)
        if (k == kind)
            return name;
    return "unknown";
}

ShapeKind parse_shape(std::string_view name)
{
    for (const auto& [k, n] : kShapeNames)
        if (n == name)
            return k;
    throw ConfigError("unknown shape '" + std::string(name) + "'");
}

std::string_view to_string(PinRule rule)
{
    switch (rule) {
    case PinRule::None:
        return "none";
    case PinRule::Corners:
        return "corners";
    case PinRule::EdgesAndCorners:
        return "edges";
    }
    return "unknown";
}

PinRule parse_pin_rule(std::string_view name)
{
    if (name == "none")
        return PinRule::None;
    if (name == "corners")
        return PinRule::Corners;
    if (name == "edges")
        return PinRule::EdgesAndCorners;
    throw ConfigError("unknown pin rule '" + std::string(name) + "' (expected none, corners, edges)");
}

void ShapeSpec::validate() const
{
    if (n < 4)
        throw ConfigError("shape.n must be >= 4");
    if (!(radius > 0.0) || !(side > 0.0) || !(junction_spacing > 0.0))
        throw ConfigError("shape geometry parameters must be positive");
    if (!(flower_amplitude >= 0.0) || flower_amplitude >= 1.0)
        throw ConfigError("shape.flower_amplitude must lie in [0, 1)");
    if (kind == ShapeKind::Junction && junction_angles_deg.size() < 2)
        throw ConfigError("shape.junction_angles needs at least two branches");
}

double flower_radius(double t, double amplitude)
{
    return 0.5 * (1.0 + amplitude * std::sin(6.0 * t + pi / 2.0));
}

GeneratedShape generate(const ShapeSpec& spec)
{
    spec.validate();
    const PinRule natural = spec.kind == ShapeKind::SquareSteiner ? PinRule::Corners
                            : (spec.kind == ShapeKind::TetrahedronFaces ||
                               spec.kind == ShapeKind::CubeFaces)
                                ? PinRule::EdgesAndCorners
                                : PinRule::None;
    const PinRule pin = spec.pin.value_or(natural);

    GeneratedShape out;
    out.requested_n = spec.n;
    CloudBuilder b{{}, {}, 2};
    switch (spec.kind) {
    case ShapeKind::Circle:
        add_circle(b, 0.0, 0.0, spec.radius, spec.n);
        out.varifold = b.finish(1);
        return out;
    case ShapeKind::Flower:
        for (std::size_t i = 0; i < spec.n; ++i) {
            const double t = 2.0 * pi * static_cast<double>(i) / static_cast<double>(spec.n);
            const double r = flower_radius(t, spec.flower_amplitude);
            b.add({r * std::cos(t), r * std::sin(t)}, false);
        }
        out.varifold = b.finish(1);
        return out;
    case ShapeKind::DoubleCircle: {
        const std::size_t first = (spec.n + 1) / 2;
        add_circle(b, -0.5 * spec.radius, 0.0, spec.radius, first);
        add_circle(b, 0.5 * spec.radius, 0.0, spec.radius, spec.n - first);
        out.varifold = b.finish(1);
        return out;
    }
    case ShapeKind::TripleCircle: {
        std::size_t used = 0;
        for (int c = 0; c < 3; ++c) {
            const std::size_t count = (spec.n - used) / static_cast<std::size_t>(3 - c);
            const double a = pi / 2.0 + 2.0 * pi * c / 3.0;
            add_circle(b, 0.5 * spec.radius * std::cos(a), 0.5 * spec.radius * std::sin(a),
                       spec.radius, count);
            used += count;
        }
        out.varifold = b.finish(1);
        return out;
    }
    case ShapeKind::SquareSteiner: {
        std::size_t count = ((spec.n + 2) / 4) * 4;
        out.adjusted = count != spec.n;
        const std::size_t per_side = count / 4;
        const double s = spec.side;
        const std::array<std::array<double, 2>, 4> corners{{{0, 0}, {s, 0}, {s, s}, {0, s}}};
        for (std::size_t c = 0; c < 4; ++c) {
            const auto& p = corners[c];
            const auto& q = corners[(c + 1) % 4];
            for (std::size_t k = 0; k < per_side; ++k) {
                const double t = static_cast<double>(k) / static_cast<double>(per_side);
                b.add({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])},
                      k == 0 && pin != PinRule::None);
            }
        }
        out.varifold = b.finish(1);
        if (out.adjusted)
            out.note = "square perimeter needs N divisible by 4; using N = " + std::to_string(count);
        return out;
    }
    case ShapeKind::Junction: {
        const std::size_t branches = spec.junction_angles_deg.size();
        const std::size_t per_branch = spec.n / branches;
        out.adjusted = per_branch * branches != spec.n;
        std::vector<Frame> frames;
        for (double deg : spec.junction_angles_deg) {
            const double a = deg * pi / 180.0;
            const double ux = std::cos(a);
            const double uy = std::sin(a);
            Frame f(1, 2);
            f << ux, uy;
            for (std::size_t k = 0; k < per_branch; ++k) {
                const double t = (static_cast<double>(k) + 0.5) * spec.junction_spacing;
                b.add({t * ux, t * uy}, false);
                frames.push_back(f);
            }
        }
        out.varifold = b.finish(1);
        out.varifold.tangents = std::move(frames);
        out.varifold.masses.assign(out.varifold.size(), spec.junction_spacing);
        if (out.adjusted)
            out.note = "junction uses " + std::to_string(per_branch) + " points per branch";
        return out;
    }
    case ShapeKind::TetrahedronFaces:
        return tetrahedron(spec, pin);
    case ShapeKind::CubeFaces:
        return cube(spec, pin);
    }
    throw ConfigError("generate: unhandled shape kind");
}

double GaussianSource::uniform()
{
    // (0, 1]: never zero so the logarithm below stays finite.
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double GaussianSource::next()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

PointCloudVarifold add_noise(const PointCloudVarifold& varifold, double std_dev,
                             std::uint64_t seed)
{
    if (!(std_dev >= 0.0))
        throw ConfigError("noise std must be >= 0");
    PointCloudVarifold out = varifold;
    if (std_dev == 0.0)
        return out;
    GaussianSource gauss(seed);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out.pinned[i])
            continue;
        for (Eigen::Index a = 0; a < out.positions.rows(); ++a)
            out.positions(a, static_cast<Eigen::Index>(i)) += std_dev * gauss.next();
    }
    return out;
}

} // namespace varimotion
