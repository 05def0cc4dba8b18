#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "specchain/errors.hpp"
#include "specchain/graph.hpp"
#include "specchain/rng.hpp"
#include "specchain/spectral.hpp"

namespace specchain {

enum class ProposalStatus { candidate, degenerate };

struct ProposalDiagnostics {
    std::size_t super_part_size = 0;
    /// Threshold of the chosen split (spectral kernels only).
    std::optional<double> threshold;
    /// Number of thresholds whose split had two connected sides.
    std::size_t connected_thresholds = 0;
    /// BalSpecReCom found no connected threshold and returned the old pair.
    bool self_loop = false;
    std::string reason;
};

/// Candidate replacement of two parts by two new vertex sets, or a
/// degenerate rejection.
struct Proposal {
    ProposalStatus status = ProposalStatus::degenerate;
    std::pair<std::size_t, std::size_t> replaced_parts{0, 0};
    std::pair<std::vector<std::size_t>, std::vector<std::size_t>> new_parts;
    ProposalDiagnostics diagnostics;

    bool is_candidate() const noexcept { return status == ProposalStatus::candidate; }
};

/// A cut edge and the part pair it joins, with part_a < part_b.
struct MergeChoice {
    std::size_t edge = 0;
    std::size_t part_a = 0;
    std::size_t part_b = 0;
};

/// Uniform cut edge. Part pairs are therefore chosen with probability
/// proportional to the number of cut edges between them.
inline MergeChoice select_merge(const Graph& g, const Partition& p, Rng& rng) {
    const auto& cut = p.cut_edges();
    if (p.k() < 2 || cut.empty())
        throw InvalidState("select_merge: partition has no cut edges");
    const std::size_t e = cut[uniform_index(rng, cut.size())];
    const std::size_t a = p.part_of(g.edge(e).u), b = p.part_of(g.edge(e).v);
    return {e, std::min(a, b), std::max(a, b)};
}

/// Replacement weights for the edges of a merged super-part.
struct EdgeWeightOverlay {
    std::vector<double> weights;

    /// Independent draws from the continuous uniform distribution on [1, 2].
    static EdgeWeightOverlay draw(std::size_t edge_count, Rng& rng) {
        std::uniform_real_distribution<double> dist(1.0, 2.0);
        EdgeWeightOverlay out;
        out.weights.resize(edge_count);
        for (auto& w : out.weights) w = dist(rng);
        return out;
    }

    static EdgeWeightOverlay constant(std::size_t edge_count, double value) {
        return {std::vector<double>(edge_count, value)};
    }

    Graph apply(const Graph& h) const { return h.with_edge_weights(weights); }
};

struct KernelOptions {
    SolverOptions solver;
    /// Test hook: when set, every overlay weight takes this value instead of
    /// a random draw.
    std::optional<double> constant_overlay;
};

/// Outcome of the threshold sweep over a super-part's Fiedler entries.
struct ThresholdChoice {
    bool found = false;
    double threshold = 0.0;
    Bipartition split;  // first: entries >= threshold
    double weight_difference = 0.0;
    std::size_t cut_edges = 0;
    std::size_t connected_candidates = 0;
};

namespace detail {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
        return true;
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<unsigned char> rank_;
};

/// Component counts of the induced subgraphs on every prefix of `order`.
inline std::vector<std::size_t> prefix_components(const Graph& h, const std::vector<std::size_t>& order) {
    const std::size_t n = order.size();
    DisjointSets sets(h.vertex_count());
    std::vector<char> inside(h.vertex_count(), 0);
    std::vector<std::size_t> comps(n + 1, 0);
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t v = order[i];
        inside[v] = 1;
        ++count;
        for (const auto& nb : h.neighbors(v))
            if (inside[nb.vertex] && sets.unite(v, nb.vertex)) --count;
        comps[i + 1] = count;
    }
    return comps;
}

}  // namespace detail

/// Sweeps every distinct Fiedler entry t as a threshold and keeps the split
/// ({f >= t}, {f < t}) whose sides are both nonempty and connected in `h`,
/// minimizing (|w(first) - w(second)|, unweighted cut edges, t)
/// lexicographically. Vertex weights come from `h`.
inline ThresholdChoice best_threshold_split(const Graph& h, const FiedlerResult& f) {
    const std::size_t n = h.vertex_count();
    if (f.vector.size() != n) throw InvalidArgument("best_threshold_split: size mismatch");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return f.vector[a] > f.vector[b]; });

    // Prefix i of `order` is the >= side of the threshold f[order[i-1]]
    // whenever order[i-1] closes a group of equal entries.
    const auto upper = detail::prefix_components(h, order);
    std::vector<std::size_t> reversed(order.rbegin(), order.rend());
    const auto lower = detail::prefix_components(h, reversed);

    std::vector<double> prefix_weight(n + 1, 0.0), suffix_weight(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix_weight[i + 1] = prefix_weight[i] + h.vertex_weight(order[i]);
    for (std::size_t i = 0; i < n; ++i)
        suffix_weight[i + 1] = suffix_weight[i] + h.vertex_weight(reversed[i]);

    std::vector<char> inside(n, 0);
    std::size_t cut = 0;
    ThresholdChoice best;
    std::size_t best_prefix = 0;
    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t v = order[i - 1];
        for (const auto& nb : h.neighbors(v)) cut = inside[nb.vertex] ? cut - 1 : cut + 1;
        inside[v] = 1;
        if (f.vector[order[i]] == f.vector[v]) continue;  // not a group boundary
        if (upper[i] != 1 || lower[n - i] != 1) continue;
        ++best.connected_candidates;
        const double t = f.vector[v];
        const double diff = std::abs(prefix_weight[i] - suffix_weight[n - i]);
        const bool better = !best.found || diff < best.weight_difference ||
                            (diff == best.weight_difference &&
                             (cut < best.cut_edges || (cut == best.cut_edges && t < best.threshold)));
        if (better) {
            best.found = true;
            best.threshold = t;
            best.weight_difference = diff;
            best.cut_edges = cut;
            best_prefix = i;
        }
    }
    if (best.found) {
        best.split.first.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(best_prefix));
        best.split.second.assign(order.begin() + static_cast<std::ptrdiff_t>(best_prefix), order.end());
        std::sort(best.split.first.begin(), best.split.first.end());
        std::sort(best.split.second.begin(), best.split.second.end());
    }
    return best;
}

/// Uniform spanning tree of a connected graph by Wilson's loop-erased random
/// walk. Returns sorted edge indices.
inline std::vector<std::size_t> sample_spanning_tree(const Graph& g, Rng& rng) {
    const std::size_t n = g.vertex_count();
    if (n == 0) throw InvalidArgument("sample_spanning_tree: empty graph");
    constexpr std::size_t none = static_cast<std::size_t>(-1);
    std::vector<char> in_tree(n, 0);
    std::vector<std::size_t> next_vertex(n, none), next_edge(n, none);
    in_tree[uniform_index(rng, n)] = 1;
    std::vector<std::size_t> tree;
    tree.reserve(n - 1);
    for (std::size_t start = 0; start < n; ++start) {
        std::size_t u = start;
        while (!in_tree[u]) {
            const auto nbs = g.neighbors(u);
            if (nbs.empty()) throw PreconditionError("sample_spanning_tree: graph is disconnected");
            const auto& nb = nbs[uniform_index(rng, nbs.size())];
            next_vertex[u] = nb.vertex;
            next_edge[u] = nb.edge;
            u = nb.vertex;
        }
        for (u = start; !in_tree[u]; u = next_vertex[u]) {
            in_tree[u] = 1;
            tree.push_back(next_edge[u]);
        }
    }
    std::sort(tree.begin(), tree.end());
    return tree;
}

/// Tree edges of `h` whose removal leaves components h1, h2 with
/// max_i |k * w(h_i) / total_weight - 1| <= eps.
inline std::vector<std::size_t> epsilon_balance_edges(const Graph& h, const std::vector<std::size_t>& tree,
                                                      double total_weight, std::size_t k, double eps) {
    const std::size_t n = h.vertex_count();
    std::vector<std::vector<Neighbor>> adj(n);
    for (std::size_t e : tree) {
        adj[h.edge(e).u].push_back({h.edge(e).v, e});
        adj[h.edge(e).v].push_back({h.edge(e).u, e});
    }
    constexpr std::size_t none = static_cast<std::size_t>(-1);
    std::vector<std::size_t> parent_edge(n, none), order;
    std::vector<char> seen(n, 0);
    order.reserve(n);
    order.push_back(0);
    seen[0] = 1;
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (const auto& nb : adj[order[i]]) {
            if (!seen[nb.vertex]) {
                seen[nb.vertex] = 1;
                parent_edge[nb.vertex] = nb.edge;
                order.push_back(nb.vertex);
            }
        }
    }
    if (order.size() != n) throw InvalidArgument("epsilon_balance_edges: edges do not span the graph");

    std::vector<double> subtree(n);
    double whole = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
        subtree[v] = h.vertex_weight(v);
        whole += subtree[v];
    }
    for (std::size_t i = n; i-- > 1;) {
        const std::size_t v = order[i];
        const auto& e = h.edge(parent_edge[v]);
        subtree[e.u == v ? e.v : e.u] += subtree[v];
    }
    const auto kk = static_cast<double>(k);
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t v = order[i];
        const double dev = std::max(std::abs(kk * subtree[v] / total_weight - 1.0),
                                    std::abs(kk * (whole - subtree[v]) / total_weight - 1.0));
        if (dev <= eps) out.push_back(parent_edge[v]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace detail {

struct SuperPart {
    MergeChoice merge;
    Subgraph sub;
};

inline SuperPart merge_selected(const Graph& g, const Partition& p, Rng& rng) {
    const MergeChoice choice = select_merge(g, p, rng);
    std::vector<std::size_t> members;
    for (std::size_t v = 0; v < g.vertex_count(); ++v)
        if (p.part_of(v) == choice.part_a || p.part_of(v) == choice.part_b) members.push_back(v);
    return {choice, induced_subgraph(g, members)};
}

inline std::vector<std::size_t> to_parent(const Subgraph& sub, const std::vector<std::size_t>& local) {
    std::vector<std::size_t> out;
    out.reserve(local.size());
    for (std::size_t v : local) out.push_back(sub.to_parent[v]);
    return out;
}

inline Proposal start_proposal(const SuperPart& sp) {
    Proposal out;
    out.replaced_parts = {sp.merge.part_a, sp.merge.part_b};
    out.diagnostics.super_part_size = sp.sub.graph.vertex_count();
    return out;
}

inline Graph overlaid(const Graph& h, Rng& rng, const KernelOptions& opts) {
    const auto overlay = opts.constant_overlay
                             ? EdgeWeightOverlay::constant(h.edge_count(), *opts.constant_overlay)
                             : EdgeWeightOverlay::draw(h.edge_count(), rng);
    return overlay.apply(h);
}

inline std::vector<char> membership(std::size_t n, const std::vector<std::size_t>& set) {
    std::vector<char> flags(n, 0);
    for (std::size_t v : set) flags[v] = 1;
    return flags;
}

}  // namespace detail

/// Spectral recombination: merge a random adjacent pair, randomize the
/// super-part's edge weights, and split by the sign of its Fiedler vector.
/// A split with an empty or disconnected side is returned as degenerate.
inline Proposal specrecom_step(const Graph& g, const Partition& p, Rng& rng,
                               const KernelOptions& opts = {}) {
    auto sp = detail::merge_selected(g, p, rng);
    Proposal out = detail::start_proposal(sp);
    const Graph h = detail::overlaid(sp.sub.graph, rng, opts);
    const FiedlerResult f = fiedler(h, opts.solver);
    Bipartition split = sign_split(h, f);
    out.diagnostics.threshold = 0.0;
    if (split.first.empty() || split.second.empty()) {
        out.diagnostics.reason = "sign split has an empty side";
        return out;
    }
    if (!is_connected_subset(h, detail::membership(h.vertex_count(), split.first)) ||
        !is_connected_subset(h, detail::membership(h.vertex_count(), split.second))) {
        out.diagnostics.reason = "sign split is disconnected";
        return out;
    }
    out.diagnostics.connected_thresholds = 1;
    out.status = ProposalStatus::candidate;
    out.new_parts = {detail::to_parent(sp.sub, split.first), detail::to_parent(sp.sub, split.second)};
    return out;
}

/// Balanced spectral recombination: like specrecom_step, but sweeps all
/// Fiedler-entry thresholds for the most weight-balanced connected split.
/// With no connected threshold the original pair is returned unchanged.
inline Proposal balspecrecom_step(const Graph& g, const Partition& p, Rng& rng,
                                  const KernelOptions& opts = {}) {
    auto sp = detail::merge_selected(g, p, rng);
    Proposal out = detail::start_proposal(sp);
    const Graph h = detail::overlaid(sp.sub.graph, rng, opts);
    const FiedlerResult f = fiedler(h, opts.solver);
    ThresholdChoice choice = best_threshold_split(h, f);
    out.status = ProposalStatus::candidate;
    out.diagnostics.connected_thresholds = choice.connected_candidates;
    if (!choice.found) {
        out.diagnostics.self_loop = true;
        out.diagnostics.reason = "no connected threshold split";
        out.new_parts = {p.members(sp.merge.part_a), p.members(sp.merge.part_b)};
        return out;
    }
    out.diagnostics.threshold = choice.threshold;
    out.new_parts = {detail::to_parent(sp.sub, choice.split.first),
                     detail::to_parent(sp.sub, choice.split.second)};
    return out;
}

/// Spanning-tree recombination: merge a random adjacent pair, draw a uniform
/// spanning tree of it, and cut a uniformly chosen eps-balance edge. Trees
/// without one yield a degenerate proposal.
inline Proposal treerecom_step(const Graph& g, const Partition& p, double eps, Rng& rng) {
    if (!(eps >= 0.0)) throw InvalidArgument("treerecom_step: eps must be nonnegative");
    auto sp = detail::merge_selected(g, p, rng);
    Proposal out = detail::start_proposal(sp);
    const Graph& h = sp.sub.graph;
    const auto tree = sample_spanning_tree(h, rng);
    const auto balanced = epsilon_balance_edges(h, tree, g.total_weight(), p.k(), eps);
    out.diagnostics.connected_thresholds = balanced.size();
    if (balanced.empty()) {
        out.diagnostics.reason = "spanning tree has no eps-balance edge";
        return out;
    }
    const std::size_t cut = balanced[uniform_index(rng, balanced.size())];

    // Component of the tree minus `cut` containing the cut edge's u end.
    std::vector<std::vector<std::size_t>> adj(h.vertex_count());
    for (std::size_t e : tree) {
        if (e == cut) continue;
        adj[h.edge(e).u].push_back(h.edge(e).v);
        adj[h.edge(e).v].push_back(h.edge(e).u);
    }
    std::vector<char> side(h.vertex_count(), 0);
    std::vector<std::size_t> stack{h.edge(cut).u};
    side[h.edge(cut).u] = 1;
    while (!stack.empty()) {
        const std::size_t v = stack.back();
        stack.pop_back();
        for (std::size_t w : adj[v])
            if (!side[w]) {
                side[w] = 1;
                stack.push_back(w);
            }
    }
    std::vector<std::size_t> first, second;
    for (std::size_t v = 0; v < h.vertex_count(); ++v) (side[v] ? first : second).push_back(v);
    out.status = ProposalStatus::candidate;
    out.new_parts = {detail::to_parent(sp.sub, first), detail::to_parent(sp.sub, second)};
    return out;
}

/// New partition with the proposal's two parts substituted.
inline Partition apply_proposal(const Graph& g, const Partition& p, const Proposal& proposal) {
    if (!proposal.is_candidate()) throw InvalidState("apply_proposal: proposal is degenerate");
    return p.with_replaced_parts(g, proposal.replaced_parts.first, proposal.replaced_parts.second,
                                 proposal.new_parts.first, proposal.new_parts.second);
}

}  // namespace specchain
