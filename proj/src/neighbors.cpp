#include "varimotion/neighbors.hpp"

#include "varimotion/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

namespace varimotion {

namespace {

struct Candidate {
    double dist2;
    std::size_t index;
    bool operator<(const Candidate& o) const
    {
        return dist2 < o.dist2 || (dist2 == o.dist2 && index < o.index);
    }
};

double box_distance2(const Point& q, const Point& lo, const Point& hi)
{
    double d2 = 0.0;
    for (Eigen::Index a = 0; a < q.size(); ++a) {
        double gap = 0.0;
        if (q[a] < lo[a])
            gap = lo[a] - q[a];
        else if (q[a] > hi[a])
            gap = q[a] - hi[a];
        d2 += gap * gap;
    }
    return d2;
}

void compute_radii(NeighborGraph& graph)
{
    const std::size_t count = graph.size();
    graph.eps.resize(count);
    graph.sigma.resize(count);
    graph.delta.resize(count);
    graph.tied_points = 0;
    const auto& c = graph.counts;
    for (std::size_t i = 0; i < count; ++i) {
        const auto& list = graph.adjacency[i];
        // k_sigma and k_delta count x_i itself, k_eps only the other points.
        graph.eps[i] = adaptive_radius(list, c.k_eps);
        graph.sigma[i] = adaptive_radius(list, c.k_sigma - 1);
        graph.delta[i] = adaptive_radius(list, c.k_delta - 1);
        const auto inside = [&](double r, int k) {
            return count_inside(list, r) == static_cast<std::size_t>(k);
        };
        const bool tied = !inside(graph.eps[i], c.k_eps) || !inside(graph.sigma[i], c.k_sigma - 1) ||
                          !inside(graph.delta[i], c.k_delta - 1);
        if (tied)
            ++graph.tied_points;
    }
}

} // namespace

KdTree::KdTree(const Eigen::MatrixXd& positions, std::size_t leaf_size)
    : points_(positions), order_(static_cast<std::size_t>(positions.cols())),
      leaf_size_(std::max<std::size_t>(1, leaf_size))
{
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    if (!order_.empty()) {
        nodes_.reserve(2 * order_.size() / leaf_size_ + 2);
        build(0, order_.size());
    }
}

std::size_t KdTree::build(std::size_t begin, std::size_t end)
{
    const auto n = points_.rows();
    Node node;
    node.begin = begin;
    node.end = end;
    node.lo = Point::Constant(n, std::numeric_limits<double>::infinity());
    node.hi = Point::Constant(n, -std::numeric_limits<double>::infinity());
    for (std::size_t k = begin; k < end; ++k) {
        const auto col = points_.col(static_cast<Eigen::Index>(order_[k]));
        node.lo = node.lo.cwiseMin(col);
        node.hi = node.hi.cwiseMax(col);
    }

    const std::size_t id = nodes_.size();
    nodes_.push_back(node);
    if (end - begin <= leaf_size_)
        return id;

    Eigen::Index axis = 0;
    (node.hi - node.lo).maxCoeff(&axis);
    if (node.hi[axis] == node.lo[axis])
        return id; // all coincident

    const std::size_t mid = begin + (end - begin) / 2;
    const auto key_less = [&](std::size_t a, std::size_t b) {
        const double ca = points_(axis, static_cast<Eigen::Index>(a));
        const double cb = points_(axis, static_cast<Eigen::Index>(b));
        return ca < cb || (ca == cb && a < b);
    };
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end), key_less);

    const std::size_t left = build(begin, mid);
    const std::size_t right = build(mid, end);
    nodes_[id].axis = static_cast<int>(axis);
    nodes_[id].split = points_(axis, static_cast<Eigen::Index>(order_[mid]));
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

std::vector<Neighbor> KdTree::knn(const Point& query, std::size_t k, std::size_t exclude) const
{
    std::vector<Neighbor> result;
    if (k == 0 || nodes_.empty())
        return result;

    std::priority_queue<Candidate> best; // max-heap: worst candidate on top
    const auto consider = [&](std::size_t idx) {
        if (idx == exclude)
            return;
        const double d2 = (points_.col(static_cast<Eigen::Index>(idx)) - query).squaredNorm();
        const Candidate c{d2, idx};
        if (best.size() < k) {
            best.push(c);
        } else if (c < best.top()) {
            best.pop();
            best.push(c);
        }
    };

    // Depth-first, nearer child first. Boxes are pruned only when strictly
    // farther than the current worst so equal-distance ties resolve by index.
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
        const Node& node = nodes_[stack.back()];
        stack.pop_back();
        if (best.size() == k && box_distance2(query, node.lo, node.hi) > best.top().dist2)
            continue;
        if (node.axis < 0) {
            for (std::size_t p = node.begin; p < node.end; ++p)
                consider(order_[p]);
            continue;
        }
        const bool go_left_first = query[node.axis] < node.split;
        stack.push_back(go_left_first ? node.right : node.left);
        stack.push_back(go_left_first ? node.left : node.right);
    }

    result.reserve(best.size());
    while (!best.empty()) {
        result.push_back({best.top().index, std::sqrt(best.top().dist2)});
        best.pop();
    }
    std::reverse(result.begin(), result.end());
    return result;
}

int NeighborCounts::k_max() const
{
    return std::max({k_eps, k_sigma - 1, k_delta - 1, 1}) + 1;
}

NeighborGraph build_knn(const Eigen::MatrixXd& positions, int k_max, long step)
{
    const auto count = static_cast<std::size_t>(positions.cols());
    if (k_max < 1 || static_cast<std::size_t>(k_max) >= count) {
        std::ostringstream msg;
        msg << "neighbor graph needs 1 <= k_max < N, got k_max = " << k_max << " with N = " << count;
        throw ConfigError(msg.str());
    }
    NeighborGraph graph;
    graph.built_at_step = step;
    graph.adjacency.resize(count);
    const KdTree tree(positions);
    for (std::size_t i = 0; i < count; ++i)
        graph.adjacency[i] =
            tree.knn(positions.col(static_cast<Eigen::Index>(i)), static_cast<std::size_t>(k_max), i);
    return graph;
}

NeighborGraph build_graph(const Eigen::MatrixXd& positions, NeighborCounts counts, long step)
{
    if (counts.k_eps < 1 || counts.k_sigma < 1 || counts.k_delta < 1)
        throw ConfigError("neighbor counts k_eps, k_sigma, k_delta must be >= 1");
    NeighborGraph graph = build_knn(positions, counts.k_max(), step);
    graph.counts = counts;
    compute_radii(graph);
    return graph;
}

double adaptive_radius(std::span<const Neighbor> sorted, int k)
{
    if (k < 0 || sorted.size() < static_cast<std::size_t>(k) + 1) {
        std::ostringstream msg;
        msg << "adaptive radius for k = " << k << " needs " << k + 1 << " neighbors but only "
            << sorted.size() << " are cached; increase k_max";
        throw ConfigError(msg.str());
    }
    const auto kk = static_cast<std::size_t>(k);
    const double below = kk == 0 ? 0.0 : sorted[kk - 1].distance;
    return 0.5 * (below + sorted[kk].distance);
}

std::size_t count_inside(std::span<const Neighbor> sorted, double radius)
{
    return static_cast<std::size_t>(std::count_if(
        sorted.begin(), sorted.end(), [radius](const Neighbor& nb) { return nb.distance < radius; }));
}

void refresh_distances(NeighborGraph& graph, const Eigen::MatrixXd& positions)
{
    for (std::size_t i = 0; i < graph.size(); ++i) {
        const auto xi = positions.col(static_cast<Eigen::Index>(i));
        for (auto& nb : graph.adjacency[i])
            nb.distance = (positions.col(static_cast<Eigen::Index>(nb.index)) - xi).norm();
        std::sort(graph.adjacency[i].begin(), graph.adjacency[i].end(), neighbor_less);
    }
    if (!graph.eps.empty())
        compute_radii(graph);
}

bool maybe_rebuild(NeighborGraph& graph, const Eigen::MatrixXd& positions, long step,
                   int rebuild_every)
{
    if (rebuild_every < 1)
        throw ConfigError("rebuild_every must be >= 1");
    if (step - graph.built_at_step >= rebuild_every) {
        graph = build_graph(positions, graph.counts, step);
        return true;
    }
    refresh_distances(graph, positions);
    return false;
}

std::size_t component_count(const NeighborGraph& graph)
{
    const std::size_t count = graph.size();
    std::vector<std::size_t> parent(count);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    const auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    std::size_t components = count;
    for (std::size_t i = 0; i < count; ++i) {
        for (const auto& nb : graph.adjacency[i]) {
            if (nb.distance >= graph.eps[i])
                break;
            const auto a = find(i);
            const auto b = find(nb.index);
            if (a != b) {
                parent[std::max(a, b)] = std::min(a, b);
                --components;
            }
        }
    }
    return components;
}

double min_pair_distance(const NeighborGraph& graph)
{
    double best = std::numeric_limits<double>::infinity();
    for (const auto& list : graph.adjacency)
        if (!list.empty())
            best = std::min(best, list.front().distance);
    return best;
}

} // namespace varimotion
