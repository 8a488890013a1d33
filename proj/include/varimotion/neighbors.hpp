#pragma once

#include "varimotion/varifold.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <vector>

namespace varimotion {

struct Neighbor {
    std::size_t index;
    double distance;
};

/// Ordering used everywhere for neighbor lists: distance, then index.
inline bool neighbor_less(const Neighbor& a, const Neighbor& b)
{
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
}

/// Static kd-tree over the columns of an n x N position matrix.
class KdTree {
public:
    explicit KdTree(const Eigen::MatrixXd& positions, std::size_t leaf_size = 8);

    /// Exact k nearest neighbors of `query`, sorted by (distance, index).
    /// `exclude` (if < N) is skipped, typically the query point itself.
    std::vector<Neighbor> knn(const Point& query, std::size_t k,
                              std::size_t exclude = static_cast<std::size_t>(-1)) const;

    std::size_t size() const { return static_cast<std::size_t>(points_.cols()); }

private:
    struct Node {
        std::size_t begin;
        std::size_t end;
        int axis = -1; // -1 for leaves
        double split = 0.0;
        std::size_t left = 0;
        std::size_t right = 0;
        Point lo;
        Point hi;
    };

    std::size_t build(std::size_t begin, std::size_t end);

    Eigen::MatrixXd points_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
    std::size_t leaf_size_;
};

/// Neighbor counts for the curvature, regression and mass radii. k_eps
/// counts the points other than x_i inside eps_i; k_sigma and k_delta count
/// all points inside sigma_i and delta_i, x_i included.
struct NeighborCounts {
    int k_eps = 15;
    int k_sigma = 17;
    int k_delta = 3;

    /// Cached list length: long enough for the midpoint radius rule to see
    /// the neighbor just outside every ball.
    int k_max() const;
};

/// Cached k-NN adjacency with per-point adaptive radii eps_i, sigma_i, delta_i.
struct NeighborGraph {
    std::vector<std::vector<Neighbor>> adjacency;
    std::vector<double> eps;
    std::vector<double> sigma;
    std::vector<double> delta;
    NeighborCounts counts;
    long built_at_step = 0;
    /// Points where some radius falls on a distance tie (fewer points strictly inside than asked).
    std::size_t tied_points = 0;

    std::size_t size() const { return adjacency.size(); }
};

/// Plain k-NN graph without radii (eps/sigma/delta left empty).
NeighborGraph build_knn(const Eigen::MatrixXd& positions, int k_max, long step = 0);

/// k-NN graph plus adaptive radii. Throws ConfigError when k_max >= N.
NeighborGraph build_graph(const Eigen::MatrixXd& positions, NeighborCounts counts, long step = 0);

/// (d_k + d_{k+1}) / 2 for a sorted list (d_0 = 0); throws ConfigError if
/// the list is shorter than k + 1.
double adaptive_radius(std::span<const Neighbor> sorted, int k);

/// Number of list entries with distance strictly below `radius`.
std::size_t count_inside(std::span<const Neighbor> sorted, double radius);

/// Recompute edge lengths from current positions along cached edges,
/// re-sort each list and recompute radii.
void refresh_distances(NeighborGraph& graph, const Eigen::MatrixXd& positions);

/// Rebuilds iff step - built_at_step >= rebuild_every, otherwise refreshes
/// distances along cached edges. Returns true on rebuild.
bool maybe_rebuild(NeighborGraph& graph, const Eigen::MatrixXd& positions, long step,
                   int rebuild_every);

/// Connected components of the symmetrized graph of edges with distance < eps_i.
std::size_t component_count(const NeighborGraph& graph);

/// Smallest cached edge length (infinity for an empty graph).
double min_pair_distance(const NeighborGraph& graph);

} // namespace varimotion
