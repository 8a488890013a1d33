#include "varimotion/varifold.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace varimotion {

namespace {

constexpr std::array<std::pair<ProjectorKind, std::string_view>, 6> kProjectorNames{{
    {ProjectorKind::TangentJ, "tangent_j"},
    {ProjectorKind::NormalJNeg, "neg_normal_j"},
    {ProjectorKind::TwoId, "two_id"},
    {ProjectorKind::NormalITangentJ, "normal_i_tangent_j"},
    {ProjectorKind::NormalINormalJNeg, "neg_normal_i_normal_j"},
    {ProjectorKind::NormalI, "normal_i"},
}};

void check_frame(const Frame& frame, Eigen::Index n, const char* what)
{
    if (frame.cols() != n || frame.rows() < 1 || frame.rows() >= n) {
        std::ostringstream msg;
        msg << "project: " << what << " frame is " << frame.rows() << "x" << frame.cols()
            << ", expected d x " << n << " with 1 <= d < " << n;
        throw std::invalid_argument(msg.str());
    }
}

} // namespace

PointCloudVarifold make_varifold(int intrinsic_dim, Eigen::MatrixXd positions)
{
    const auto n = static_cast<int>(positions.rows());
    if (n < 2 || n > kMaxDim)
        throw std::invalid_argument("make_varifold: ambient dimension must be 2 or 3");
    if (intrinsic_dim < 1 || intrinsic_dim >= n)
        throw std::invalid_argument("make_varifold: intrinsic dimension must satisfy 1 <= d < n");

    PointCloudVarifold v;
    v.intrinsic_dim = intrinsic_dim;
    v.ambient_dim = n;
    v.positions = std::move(positions);
    const std::size_t count = v.size();
    v.masses.assign(count, 1.0);
    Frame axis = Frame::Identity(intrinsic_dim, n);
    v.tangents.assign(count, axis);
    v.pinned.assign(count, false);
    return v;
}

std::string_view to_string(ProjectorKind kind)
{
    for (const auto& [k, name] : kProjectorNames)
        if (k == kind)
            return name;
    return "unknown";
}

ProjectorKind parse_projector(std::string_view name)
{
    for (const auto& [k, n] : kProjectorNames)
        if (n == name)
            return k;
    throw std::invalid_argument("unknown projector '" + std::string(name) +
                                "' (expected tangent_j, neg_normal_j, two_id, normal_i_tangent_j, "
                                "neg_normal_i_normal_j or normal_i)");
}

SmallMatrix tangent_projector(const Frame& frame)
{
    return frame.transpose() * frame;
}

SmallMatrix normal_projector(const Frame& frame)
{
    const auto n = frame.cols();
    return SmallMatrix::Identity(n, n) - frame.transpose() * frame;
}

SmallMatrix projector_matrix(ProjectorKind kind, const Frame& frame_i, const Frame& frame_j)
{
    const auto n = frame_j.cols();
    check_frame(frame_i, n, "i");
    check_frame(frame_j, n, "j");
    switch (kind) {
    case ProjectorKind::TangentJ:
        return tangent_projector(frame_j);
    case ProjectorKind::NormalJNeg:
        return -2.0 * normal_projector(frame_j);
    case ProjectorKind::TwoId:
        return 2.0 * SmallMatrix::Identity(n, n);
    case ProjectorKind::NormalITangentJ:
        return normal_projector(frame_i) * tangent_projector(frame_j);
    case ProjectorKind::NormalINormalJNeg:
        return -2.0 * normal_projector(frame_i) * normal_projector(frame_j);
    case ProjectorKind::NormalI:
        return 2.0 * normal_projector(frame_i);
    }
    throw std::logic_error("projector_matrix: unhandled kind");
}

Point project(ProjectorKind kind, const Frame& frame_i, const Frame& frame_j, const Point& v)
{
    if (v.size() != frame_j.cols())
        throw std::invalid_argument("project: vector dimension does not match frames");
    return projector_matrix(kind, frame_i, frame_j) * v;
}

ValidationReport validate(const PointCloudVarifold& varifold, double frame_tolerance)
{
    ValidationReport report;
    const std::size_t count = varifold.size();
    const auto n = varifold.ambient_dim;
    const auto d = varifold.intrinsic_dim;

    if (varifold.positions.rows() != n)
        report.violations.push_back({0, "positions have ambient_dim rows", "row count mismatch"});
    if (varifold.masses.size() != count || varifold.tangents.size() != count ||
        varifold.pinned.size() != count) {
        report.violations.push_back({0, "per-point arrays have N entries", "size mismatch"});
        return report;
    }

    for (std::size_t i = 0; i < count; ++i) {
        if (!varifold.positions.col(static_cast<Eigen::Index>(i)).allFinite())
            report.violations.push_back({i, "positions finite", "NaN or Inf coordinate"});
        if (!(varifold.masses[i] > 0.0)) {
            std::ostringstream msg;
            msg << "m_" << i << " = " << varifold.masses[i];
            report.violations.push_back({i, "m_i > 0", msg.str()});
        }
        const Frame& f = varifold.tangents[i];
        if (f.rows() != d || f.cols() != n) {
            report.violations.push_back({i, "frame is d x n", "wrong frame shape"});
            continue;
        }
        const double err = (f * f.transpose() - SmallMatrix::Identity(d, d)).cwiseAbs().maxCoeff();
        if (!(err <= frame_tolerance)) {
            std::ostringstream msg;
            msg << "max |F F^T - I| = " << err;
            report.violations.push_back({i, "frame orthonormal", msg.str()});
        }
    }
    return report;
}

double total_mass(const PointCloudVarifold& varifold)
{
    return std::accumulate(varifold.masses.begin(), varifold.masses.end(), 0.0);
}

} // namespace varimotion
