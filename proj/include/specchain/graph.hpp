#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "specchain/errors.hpp"

namespace specchain {

struct Vertex {
    std::string id;
    double weight = 1.0;
};

/// Undirected edge, stored with u < v.
struct Edge {
    std::size_t u = 0;
    std::size_t v = 0;
    double weight = 1.0;
};

struct Neighbor {
    std::size_t vertex;
    std::size_t edge;
};

/// Simple undirected graph with vertex and edge weights. Vertices are
/// addressed by dense index; the external string id is kept for I/O.
class Graph {
public:
    Graph() = default;

    Graph(std::vector<Vertex> vertices, std::vector<Edge> edges)
        : vertices_(std::move(vertices)), edges_(std::move(edges)) {
        const std::size_t n = vertices_.size();
        for (const auto& vx : vertices_) {
            if (!(vx.weight >= 0.0))
                throw InvalidArgument("vertex '" + vx.id + "' has negative weight");
        }
        std::unordered_set<std::size_t> seen;
        seen.reserve(edges_.size() * 2);
        adjacency_.assign(n, {});
        for (std::size_t e = 0; e < edges_.size(); ++e) {
            auto& ed = edges_[e];
            if (ed.u >= n || ed.v >= n)
                throw InvalidArgument("edge " + std::to_string(e) + " has an out-of-range endpoint");
            if (ed.u == ed.v)
                throw InvalidArgument("edge " + std::to_string(e) + " is a self-loop");
            if (!(ed.weight > 0.0))
                throw InvalidArgument("edge " + std::to_string(e) + " has non-positive weight");
            if (ed.u > ed.v) std::swap(ed.u, ed.v);
            if (!seen.insert(ed.u * n + ed.v).second)
                throw InvalidArgument("edge " + std::to_string(e) + " duplicates an earlier edge");
            adjacency_[ed.u].push_back({ed.v, e});
            adjacency_[ed.v].push_back({ed.u, e});
        }
    }

    std::size_t vertex_count() const noexcept { return vertices_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    bool empty() const noexcept { return vertices_.empty(); }

    const Vertex& vertex(std::size_t v) const { return vertices_.at(v); }
    const Edge& edge(std::size_t e) const { return edges_.at(e); }
    const std::vector<Vertex>& vertices() const noexcept { return vertices_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    std::span<const Neighbor> neighbors(std::size_t v) const { return adjacency_.at(v); }
    std::size_t degree(std::size_t v) const { return adjacency_.at(v).size(); }

    double vertex_weight(std::size_t v) const { return vertices_[v].weight; }

    double total_weight() const noexcept {
        double s = 0.0;
        for (const auto& vx : vertices_) s += vx.weight;
        return s;
    }

    /// Copy of this graph with every edge weight replaced.
    Graph with_edge_weights(std::span<const double> weights) const {
        if (weights.size() != edges_.size())
            throw InvalidArgument("edge weight count does not match edge count");
        Graph out = *this;
        for (std::size_t e = 0; e < edges_.size(); ++e) {
            if (!(weights[e] > 0.0)) throw InvalidArgument("edge weights must be positive");
            out.edges_[e].weight = weights[e];
        }
        return out;
    }

    std::optional<std::size_t> index_of(const std::string& id) const {
        for (std::size_t v = 0; v < vertices_.size(); ++v)
            if (vertices_[v].id == id) return v;
        return std::nullopt;
    }

    bool operator==(const Graph& other) const {
        if (vertices_.size() != other.vertices_.size() || edges_.size() != other.edges_.size())
            return false;
        for (std::size_t v = 0; v < vertices_.size(); ++v)
            if (vertices_[v].id != other.vertices_[v].id ||
                vertices_[v].weight != other.vertices_[v].weight)
                return false;
        for (std::size_t e = 0; e < edges_.size(); ++e)
            if (edges_[e].u != other.edges_[e].u || edges_[e].v != other.edges_[e].v ||
                edges_[e].weight != other.edges_[e].weight)
                return false;
        return true;
    }

private:
    std::vector<Vertex> vertices_;
    std::vector<Edge> edges_;
    std::vector<std::vector<Neighbor>> adjacency_;
};

/// Assignment of every vertex to one of k nonempty parts, with cached part
/// weights and the sorted list of cut edges.
class Partition {
public:
    Partition() = default;

    Partition(const Graph& g, std::vector<std::size_t> assignment, std::size_t k)
        : assignment_(std::move(assignment)), k_(k) {
        if (assignment_.size() != g.vertex_count())
            throw InvalidArgument("assignment size " + std::to_string(assignment_.size()) +
                                  " does not match vertex count " +
                                  std::to_string(g.vertex_count()));
        if (k_ == 0) throw InvalidArgument("partition needs at least one part");
        std::vector<std::size_t> sizes(k_, 0);
        for (std::size_t part : assignment_) {
            if (part >= k_) throw InvalidArgument("part index out of range");
            ++sizes[part];
        }
        for (std::size_t i = 0; i < k_; ++i)
            if (sizes[i] == 0) throw InvalidArgument("part " + std::to_string(i) + " is empty");
        recompute(g);
    }

    std::size_t k() const noexcept { return k_; }
    std::size_t vertex_count() const noexcept { return assignment_.size(); }
    std::size_t part_of(std::size_t v) const { return assignment_.at(v); }
    const std::vector<std::size_t>& assignment() const noexcept { return assignment_; }
    const std::vector<double>& part_weights() const noexcept { return part_weights_; }
    double part_weight(std::size_t i) const { return part_weights_.at(i); }
    /// Sorted edge indices whose endpoints lie in different parts.
    const std::vector<std::size_t>& cut_edges() const noexcept { return cut_edges_; }

    std::vector<std::size_t> members(std::size_t part) const {
        std::vector<std::size_t> out;
        for (std::size_t v = 0; v < assignment_.size(); ++v)
            if (assignment_[v] == part) out.push_back(v);
        return out;
    }

    std::vector<std::size_t> part_sizes() const {
        std::vector<std::size_t> sizes(k_, 0);
        for (std::size_t part : assignment_) ++sizes[part];
        return sizes;
    }

    /// Returns a copy where parts `a` and `b` are replaced by the vertex sets
    /// `first` and `second`. The sets must cover exactly the old members of
    /// a and b; other parts keep their indices.
    Partition with_replaced_parts(const Graph& g, std::size_t a, std::size_t b,
                                  std::span<const std::size_t> first,
                                  std::span<const std::size_t> second) const {
        if (a == b || a >= k_ || b >= k_) throw InvalidArgument("invalid part pair");
        if (first.empty() || second.empty()) throw InvalidArgument("replacement part is empty");
        Partition out = *this;
        std::size_t covered = 0;
        for (std::size_t v = 0; v < assignment_.size(); ++v)
            if (assignment_[v] == a || assignment_[v] == b) ++covered;
        if (covered != first.size() + second.size())
            throw InvalidArgument("replacement parts do not cover the merged parts");
        std::vector<char> touched(assignment_.size(), 0);
        auto place = [&](std::span<const std::size_t> set, std::size_t label) {
            double w = 0.0;
            for (std::size_t v : set) {
                if (v >= assignment_.size() || touched[v] ||
                    (assignment_[v] != a && assignment_[v] != b))
                    throw InvalidArgument("replacement vertex outside the merged parts");
                touched[v] = 1;
                out.assignment_[v] = label;
                w += g.vertex_weight(v);
            }
            out.part_weights_[label] = w;
        };
        place(first, a);
        place(second, b);
        out.recompute_cut_edges(g);
        return out;
    }

    bool operator==(const Partition& other) const {
        return k_ == other.k_ && assignment_ == other.assignment_ &&
               part_weights_ == other.part_weights_ && cut_edges_ == other.cut_edges_;
    }

private:
    void recompute(const Graph& g) {
        part_weights_.assign(k_, 0.0);
        for (std::size_t v = 0; v < assignment_.size(); ++v)
            part_weights_[assignment_[v]] += g.vertex_weight(v);
        recompute_cut_edges(g);
    }

    void recompute_cut_edges(const Graph& g) {
        cut_edges_.clear();
        for (std::size_t e = 0; e < g.edge_count(); ++e) {
            const auto& ed = g.edge(e);
            if (assignment_[ed.u] != assignment_[ed.v]) cut_edges_.push_back(e);
        }
    }

    std::vector<std::size_t> assignment_;
    std::size_t k_ = 0;
    std::vector<double> part_weights_;
    std::vector<std::size_t> cut_edges_;
};

/// Recomputes every cache of `p` from scratch. Returns a description of the
/// first inconsistency, or nullopt when the partition is sound.
inline std::optional<std::string> verify_partition(const Graph& g, const Partition& p) {
    if (p.vertex_count() != g.vertex_count()) return "vertex count mismatch";
    std::vector<double> weights(p.k(), 0.0);
    std::vector<std::size_t> sizes(p.k(), 0);
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        if (p.part_of(v) >= p.k()) return "part index out of range at vertex " + std::to_string(v);
        weights[p.part_of(v)] += g.vertex_weight(v);
        ++sizes[p.part_of(v)];
    }
    for (std::size_t i = 0; i < p.k(); ++i) {
        if (sizes[i] == 0) return "part " + std::to_string(i) + " is empty";
        const double tol = 1e-9 * std::max(1.0, weights[i]);
        if (std::abs(weights[i] - p.part_weight(i)) > tol)
            return "cached weight of part " + std::to_string(i) + " is stale";
    }
    std::vector<std::size_t> cut;
    for (std::size_t e = 0; e < g.edge_count(); ++e)
        if (p.part_of(g.edge(e).u) != p.part_of(g.edge(e).v)) cut.push_back(e);
    if (cut != p.cut_edges()) return "cached cut edges are stale";
    return std::nullopt;
}

/// Induced subgraph together with the map from its vertex indices back to
/// the parent graph.
struct Subgraph {
    Graph graph;
    std::vector<std::size_t> to_parent;
    std::vector<std::size_t> edge_to_parent;
};

/// Subgraph induced by `vertices`. Vertices keep ascending parent order.
inline Subgraph induced_subgraph(const Graph& g, std::span<const std::size_t> vertices) {
    if (vertices.empty()) throw InvalidArgument("induced_subgraph: empty vertex set");
    Subgraph out;
    out.to_parent.assign(vertices.begin(), vertices.end());
    std::sort(out.to_parent.begin(), out.to_parent.end());
    if (out.to_parent.back() >= g.vertex_count())
        throw InvalidArgument("induced_subgraph: vertex index out of range");
    if (std::adjacent_find(out.to_parent.begin(), out.to_parent.end()) != out.to_parent.end())
        throw InvalidArgument("induced_subgraph: duplicate vertex index");

    constexpr std::size_t absent = static_cast<std::size_t>(-1);
    std::vector<std::size_t> local(g.vertex_count(), absent);
    std::vector<Vertex> vs;
    vs.reserve(out.to_parent.size());
    for (std::size_t i = 0; i < out.to_parent.size(); ++i) {
        local[out.to_parent[i]] = i;
        vs.push_back(g.vertex(out.to_parent[i]));
    }
    std::vector<Edge> es;
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        const auto& ed = g.edge(e);
        if (local[ed.u] != absent && local[ed.v] != absent) {
            es.push_back({local[ed.u], local[ed.v], ed.weight});
            out.edge_to_parent.push_back(e);
        }
    }
    out.graph = Graph(std::move(vs), std::move(es));
    return out;
}

/// True when the vertices flagged in `member` induce a connected subgraph.
/// An empty selection is reported as disconnected.
inline bool is_connected_subset(const Graph& g, const std::vector<char>& member) {
    std::size_t start = g.vertex_count(), total = 0;
    for (std::size_t v = 0; v < member.size(); ++v) {
        if (member[v]) {
            if (start == g.vertex_count()) start = v;
            ++total;
        }
    }
    if (total == 0) return false;
    std::vector<char> seen(g.vertex_count(), 0);
    std::vector<std::size_t> stack{start};
    seen[start] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
        const std::size_t v = stack.back();
        stack.pop_back();
        for (const auto& nb : g.neighbors(v)) {
            if (member[nb.vertex] && !seen[nb.vertex]) {
                seen[nb.vertex] = 1;
                ++reached;
                stack.push_back(nb.vertex);
            }
        }
    }
    return reached == total;
}

inline bool is_connected(const Graph& g) {
    if (g.empty()) throw InvalidArgument("is_connected: empty graph");
    return is_connected_subset(g, std::vector<char>(g.vertex_count(), 1));
}

/// True iff every part of `p` induces a connected subgraph of `g`.
inline bool is_connected_partition(const Graph& g, const Partition& p) {
    if (p.vertex_count() != g.vertex_count())
        throw InvalidArgument("is_connected_partition: partition size does not match graph");
    const std::size_t n = g.vertex_count();
    std::vector<char> seen(n, 0);
    std::vector<char> part_started(p.k(), 0);
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < n; ++s) {
        if (seen[s]) continue;
        const std::size_t part = p.part_of(s);
        // A second traversal root inside the same part means it is split.
        if (part_started[part]) return false;
        part_started[part] = 1;
        seen[s] = 1;
        stack.push_back(s);
        while (!stack.empty()) {
            const std::size_t v = stack.back();
            stack.pop_back();
            for (const auto& nb : g.neighbors(v)) {
                if (!seen[nb.vertex] && p.part_of(nb.vertex) == part) {
                    seen[nb.vertex] = 1;
                    stack.push_back(nb.vertex);
                }
            }
        }
    }
    return true;
}

/// side x side 4-neighbour grid with unit weights, partitioned into k
/// horizontal bands: row r belongs to part floor(r * k / side).
inline std::pair<Graph, Partition> make_grid(std::size_t side, std::size_t k) {
    if (side == 0) throw InvalidArgument("make_grid: side must be positive");
    if (k == 0 || k > side) throw InvalidArgument("make_grid: need 1 <= k <= side");
    std::vector<Vertex> vs;
    vs.reserve(side * side);
    for (std::size_t r = 0; r < side; ++r)
        for (std::size_t c = 0; c < side; ++c)
            vs.push_back({std::to_string(r) + "_" + std::to_string(c), 1.0});
    std::vector<Edge> es;
    es.reserve(2 * side * (side - 1));
    for (std::size_t r = 0; r < side; ++r) {
        for (std::size_t c = 0; c < side; ++c) {
            const std::size_t v = r * side + c;
            if (c + 1 < side) es.push_back({v, v + 1, 1.0});
            if (r + 1 < side) es.push_back({v, v + side, 1.0});
        }
    }
    Graph g(std::move(vs), std::move(es));
    std::vector<std::size_t> assignment(side * side);
    for (std::size_t r = 0; r < side; ++r)
        for (std::size_t c = 0; c < side; ++c) assignment[r * side + c] = r * k / side;
    Partition p(g, std::move(assignment), k);
    return {std::move(g), std::move(p)};
}

}  // namespace specchain
