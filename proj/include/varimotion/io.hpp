#pragma once

#include "varimotion/varifold.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <string>

namespace varimotion {

/// Writes `snapshot_<step>.txt` into `dir`, plus `snapshot_<step>.ply` when
/// the ambient dimension is 3. `curvature_norms` (one per point) adds a
/// `curvature` vertex property to the PLY. Returns the text file path.
std::filesystem::path write_snapshot(const PointCloudVarifold& varifold, long step, double t,
                                     const std::filesystem::path& dir,
                                     const Eigen::VectorXd* curvature_norms = nullptr);

/// One snapshot line: x_1 .. x_n m t_11 .. t_dn pin.
std::string snapshot_line(const PointCloudVarifold& varifold, std::size_t i);

/// ASCII PLY 1.0 with x y z nx ny nz (and optional curvature) per vertex.
void write_ply(const PointCloudVarifold& varifold, const std::filesystem::path& path,
               const Eigen::VectorXd* curvature_norms = nullptr);

/// Unit normal of a surface point in R^3 (cross product of the frame rows).
Eigen::Vector3d surface_normal(const Frame& frame);

struct LoadedCloud {
    PointCloudVarifold varifold;
    bool from_snapshot = false; // masses and tangents came from the file
};

/// Reads a snapshot written by write_snapshot or a plain coordinate file
/// (one point per line, '#' comments skipped). A snapshot header overrides
/// the dimensions passed in. Malformed lines raise ParseError with the line number.
LoadedCloud load_cloud(const std::filesystem::path& path, int ambient_dim, int intrinsic_dim);

} // namespace varimotion
