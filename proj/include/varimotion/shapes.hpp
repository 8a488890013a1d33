#pragma once

#include "varimotion/varifold.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace varimotion {

enum class ShapeKind {
    Circle,
    Flower,
    DoubleCircle,
    TripleCircle,
    SquareSteiner,
    Junction,
    TetrahedronFaces,
    CubeFaces,
};

enum class PinRule { None, Corners, EdgesAndCorners };

std::string_view to_string(ShapeKind kind);
ShapeKind parse_shape(std::string_view name);
std::string_view to_string(PinRule rule);
PinRule parse_pin_rule(std::string_view name);

struct ShapeSpec {
    ShapeKind kind = ShapeKind::Circle;
    std::size_t n = 400;
    double radius = 0.5;            // circles
    double flower_amplitude = 0.4;  // r(t) = 1/2 (1 + a sin(6t + pi/2))
    double side = 1.0;              // square, tetrahedron, cube
    std::vector<double> junction_angles_deg{0.0, 120.0, 240.0};
    double junction_spacing = 0.01;
    /// Unset means the shape's natural rule: corners for the square,
    /// edges and corners for the solids, none otherwise.
    std::optional<PinRule> pin;

    void validate() const;
};

struct GeneratedShape {
    PointCloudVarifold varifold; // positions and pins; junctions also carry exact tangents
    std::size_t requested_n = 0;
    bool adjusted = false; // N moved to the nearest feasible layout
    std::string note;
};

GeneratedShape generate(const ShapeSpec& spec);

/// Flower radius r(t) = 1/2 (1 + a sin(6t + pi/2)).
double flower_radius(double t, double amplitude);

/// Standard normal deviates from mt19937_64 via Box-Muller, with uniforms
/// built from the top 53 bits so the stream is identical on every platform.
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}
    double next();

private:
    double uniform();

    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Adds i.i.d. N(0, std^2) offsets to every coordinate of unpinned points.
PointCloudVarifold add_noise(const PointCloudVarifold& varifold, double std_dev,
                             std::uint64_t seed);

} // namespace varimotion
