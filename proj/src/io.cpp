#include "varimotion/io.hpp"

#include "varimotion/errors.hpp"
#include "varimotion/metrics.hpp"

#include <Eigen/Geometry>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace varimotion {

namespace fs = std::filesystem;

namespace {

std::ofstream open_for_write(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::string step_name(long step, const char* ext)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "snapshot_%06ld.%s", step, ext);
    return buf;
}

std::vector<std::string_view> split_ws(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
            ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r')
            ++i;
        if (i > start)
            out.push_back(line.substr(start, i - start));
    }
    return out;
}

bool parse_number(std::string_view token, double& value)
{
    const char* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, value);
    return ec == std::errc() && ptr == end;
}

// Reads `key=<int>` from the snapshot header; returns false if absent.
bool header_int(const std::vector<std::string_view>& tokens, std::string_view key, int& value)
{
    for (auto tok : tokens) {
        if (tok.size() > key.size() && tok.substr(0, key.size()) == key &&
            tok[key.size()] == '=') {
            const auto digits = tok.substr(key.size() + 1);
            auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
            return ec == std::errc() && ptr == digits.data() + digits.size();
        }
    }
    return false;
}

} // namespace

std::string snapshot_line(const PointCloudVarifold& V, std::size_t i)
{
    const auto col = static_cast<Eigen::Index>(i);
    std::string line;
    for (int a = 0; a < V.ambient_dim; ++a) {
        line += format_double(V.positions(a, col));
        line += ' ';
    }
    line += format_double(V.masses[i]);
    const Frame& F = V.tangents[i];
    for (int r = 0; r < V.intrinsic_dim; ++r)
        for (int c = 0; c < V.ambient_dim; ++c) {
            line += ' ';
            line += format_double(F(r, c));
        }
    line += V.pinned[i] ? " 1" : " 0";
    return line;
}

Eigen::Vector3d surface_normal(const Frame& frame)
{
    if (frame.rows() != 2 || frame.cols() != 3)
        return Eigen::Vector3d::Zero();
    const Eigen::Vector3d a = frame.row(0).transpose();
    const Eigen::Vector3d b = frame.row(1).transpose();
    Eigen::Vector3d n = a.cross(b);
    const double len = n.norm();
    return len > 0.0 ? Eigen::Vector3d(n / len) : Eigen::Vector3d::Zero();
}

void write_ply(const PointCloudVarifold& V, const fs::path& path, const Eigen::VectorXd* curvature)
{
    if (V.ambient_dim != 3)
        throw std::invalid_argument("PLY output needs ambient dimension 3");
    auto out = open_for_write(path);
    out << "ply\nformat ascii 1.0\ncomment varimotion point cloud\n";
    out << "element vertex " << V.size() << "\n";
    for (const char* p : {"x", "y", "z", "nx", "ny", "nz"})
        out << "property double " << p << "\n";
    if (curvature)
        out << "property double curvature\n";
    out << "end_header\n";
    for (std::size_t i = 0; i < V.size(); ++i) {
        const auto col = static_cast<Eigen::Index>(i);
        const Eigen::Vector3d n = surface_normal(V.tangents[i]);
        out << format_double(V.positions(0, col)) << ' ' << format_double(V.positions(1, col))
            << ' ' << format_double(V.positions(2, col)) << ' ' << format_double(n.x()) << ' '
            << format_double(n.y()) << ' ' << format_double(n.z());
        if (curvature)
            out << ' ' << format_double((*curvature)(col));
        out << '\n';
    }
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

fs::path write_snapshot(const PointCloudVarifold& V, long step, double t, const fs::path& dir,
                        const Eigen::VectorXd* curvature)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    const fs::path path = dir / step_name(step, "txt");
    {
        auto out = open_for_write(path);
        out << "# varimotion v1 dim=" << V.ambient_dim << " intrinsic=" << V.intrinsic_dim
            << " step=" << step << " t=" << format_double(t) << "\n";
        for (std::size_t i = 0; i < V.size(); ++i)
            out << snapshot_line(V, i) << '\n';
        if (!out)
            throw std::runtime_error("write failed: " + path.string());
    }
    if (V.ambient_dim == 3)
        write_ply(V, dir / step_name(step, "ply"), curvature);
    return path;
}

LoadedCloud load_cloud(const fs::path& path, int ambient_dim, int intrinsic_dim)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open " + path.string());

    bool snapshot = false;
    std::vector<std::vector<double>> rows;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto tokens = split_ws(line);
        if (tokens.empty())
            continue;
        if (tokens[0].front() == '#') {
            if (rows.empty() && tokens.size() >= 2 && tokens[1] == "varimotion") {
                snapshot = true;
                if (!header_int(tokens, "dim", ambient_dim) ||
                    !header_int(tokens, "intrinsic", intrinsic_dim))
                    throw ParseError(path.string() + ":" + std::to_string(line_no) +
                                     ": bad snapshot header");
            }
            continue;
        }
        if (ambient_dim < 2 || ambient_dim > 3 || intrinsic_dim < 1 || intrinsic_dim >= ambient_dim)
            throw ParseError(path.string() + ": unsupported dimensions");
        const std::size_t expected =
            snapshot ? static_cast<std::size_t>(ambient_dim + 1 + intrinsic_dim * ambient_dim + 1)
                     : static_cast<std::size_t>(ambient_dim);
        if (tokens.size() != expected)
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(expected) + " columns, found " +
                             std::to_string(tokens.size()));
        std::vector<double> row(tokens.size());
        for (std::size_t k = 0; k < tokens.size(); ++k)
            if (!parse_number(tokens[k], row[k]))
                throw ParseError(path.string() + ":" + std::to_string(line_no) +
                                 ": not a number: '" + std::string(tokens[k]) + "'");
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw ParseError(path.string() + ": no points");

    Eigen::MatrixXd X(ambient_dim, static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int a = 0; a < ambient_dim; ++a)
            X(a, static_cast<Eigen::Index>(i)) = rows[i][static_cast<std::size_t>(a)];
    LoadedCloud result{make_varifold(intrinsic_dim, std::move(X)), snapshot};
    if (snapshot) {
        auto& V = result.varifold;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            std::size_t k = static_cast<std::size_t>(ambient_dim);
            V.masses[i] = r[k++];
            Frame F(intrinsic_dim, ambient_dim);
            for (int a = 0; a < intrinsic_dim; ++a)
                for (int b = 0; b < ambient_dim; ++b)
                    F(a, b) = r[k++];
            V.tangents[i] = F;
            if (r[k] != 0.0 && r[k] != 1.0)
                throw ParseError(path.string() + ": pin flag must be 0 or 1 (point " +
                                 std::to_string(i) + ")");
            V.pinned[i] = r[k] == 1.0;
        }
    }
    return result;
}

} // namespace varimotion
