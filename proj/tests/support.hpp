#pragma once

// Test-only helpers: small graph builders, random connected graphs, and
// brute-force oracles that share no code with the library's solvers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "specchain/specchain.hpp"

namespace specchain::test {

inline Graph build(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                   const std::vector<double>& edge_weights = {}, const std::vector<double>& vertex_weights = {}) {
    std::vector<Vertex> vs;
    for (std::size_t i = 0; i < n; ++i)
        vs.push_back({"v" + std::to_string(i), vertex_weights.empty() ? 1.0 : vertex_weights[i]});
    std::vector<Edge> es;
    for (std::size_t e = 0; e < edges.size(); ++e)
        es.push_back({edges[e].first, edges[e].second, edge_weights.empty() ? 1.0 : edge_weights[e]});
    return Graph(std::move(vs), std::move(es));
}

inline Graph path(std::size_t n) {
    std::vector<std::pair<std::size_t, std::size_t>> es;
    for (std::size_t i = 0; i + 1 < n; ++i) es.emplace_back(i, i + 1);
    return build(n, es);
}

inline Graph cycle(std::size_t n) {
    std::vector<std::pair<std::size_t, std::size_t>> es;
    for (std::size_t i = 0; i < n; ++i) es.emplace_back(i, (i + 1) % n);
    return build(n, es);
}

inline Graph complete(std::size_t n) {
    std::vector<std::pair<std::size_t, std::size_t>> es;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) es.emplace_back(i, j);
    return build(n, es);
}

/// Star with center 0 and `leaves` leaves.
inline Graph star(std::size_t leaves) {
    std::vector<std::pair<std::size_t, std::size_t>> es;
    for (std::size_t i = 1; i <= leaves; ++i) es.emplace_back(0, i);
    return build(leaves + 1, es);
}

struct RandomGraphSpec {
    std::size_t min_n = 2;
    std::size_t max_n = 8;
    double extra_edge_probability = 0.3;
    double min_weight = 1.0;
    double max_weight = 1.0;
    bool integer_vertex_weights = false;
};

/// Random connected graph: a random tree plus independent extra edges.
inline Graph random_connected(std::mt19937_64& rng, const RandomGraphSpec& spec) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(spec.min_n, spec.max_n)(rng);
    std::set<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t v = 1; v < n; ++v) {
        const std::size_t u = std::uniform_int_distribution<std::size_t>(0, v - 1)(rng);
        edges.emplace(u, v);
    }
    std::bernoulli_distribution extra(spec.extra_edge_probability);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v)
            if (!edges.count({u, v}) && extra(rng)) edges.emplace(u, v);
    std::uniform_real_distribution<double> ew(spec.min_weight, spec.max_weight);
    std::uniform_int_distribution<int> vw(1, 9);
    std::vector<std::pair<std::size_t, std::size_t>> list(edges.begin(), edges.end());
    std::vector<double> weights, vweights;
    for (std::size_t i = 0; i < list.size(); ++i)
        weights.push_back(spec.min_weight == spec.max_weight ? spec.min_weight : ew(rng));
    for (std::size_t i = 0; i < n; ++i) vweights.push_back(spec.integer_vertex_weights ? vw(rng) : 1.0);
    // Shuffle vertex labels so structure is not tied to index order.
    std::vector<std::size_t> relabel(n);
    std::iota(relabel.begin(), relabel.end(), std::size_t{0});
    std::shuffle(relabel.begin(), relabel.end(), rng);
    for (auto& [u, v] : list) {
        u = relabel[u];
        v = relabel[v];
    }
    return build(n, list, weights, vweights);
}

/// Dense Laplacian built directly from the edge list.
inline std::vector<std::vector<double>> dense_laplacian(const Graph& g) {
    const std::size_t n = g.vertex_count();
    std::vector<std::vector<double>> L(n, std::vector<double>(n, 0.0));
    for (const auto& e : g.edges()) {
        L[e.u][e.v] -= e.weight;
        L[e.v][e.u] -= e.weight;
        L[e.u][e.u] += e.weight;
        L[e.v][e.v] += e.weight;
    }
    return L;
}

struct JacobiResult {
    std::vector<double> values;                // ascending
    std::vector<std::vector<double>> vectors;  // vectors[i] pairs with values[i]
};

/// Cyclic Jacobi eigendecomposition of a small symmetric matrix.
inline JacobiResult jacobi_eigen(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return a[i][i] < a[j][j]; });
    JacobiResult out;
    for (std::size_t i : idx) {
        out.values.push_back(a[i][i]);
        std::vector<double> col(n);
        for (std::size_t k = 0; k < n; ++k) col[k] = v[k][i];
        out.vectors.push_back(col);
    }
    return out;
}

/// Connectivity of a vertex subset via union-find over the edge list.
inline bool subset_connected_uf(const Graph& g, const std::vector<char>& member) {
    std::vector<std::size_t> parent(g.vertex_count());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& e : g.edges())
        if (member[e.u] && member[e.v]) parent[find(e.u)] = find(e.v);
    std::set<std::size_t> roots;
    for (std::size_t v = 0; v < g.vertex_count(); ++v)
        if (member[v]) roots.insert(find(v));
    return roots.size() == 1;
}

/// Upper-tail p-value of Pearson's statistic for equal expected counts.
inline double chi_squared_uniform_p(const std::vector<std::size_t>& counts) {
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    const double expected = total / static_cast<double>(counts.size());
    double stat = 0.0;
    for (std::size_t c : counts) stat += (c - expected) * (c - expected) / expected;
    boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

/// Brute-force threshold oracle: every vertex's entry as threshold, sets by
/// direct comparison, connectivity by union-find, exact lexicographic rule.
struct OracleChoice {
    bool found = false;
    double threshold = 0.0;
    std::set<std::size_t> upper;
    double diff = 0.0;
    std::size_t cut = 0;
};

inline OracleChoice threshold_oracle(const Graph& h, const std::vector<double>& f) {
    OracleChoice best;
    for (double t : f) {
        std::vector<char> up(h.vertex_count(), 0), down(h.vertex_count(), 0);
        double wu = 0.0, wd = 0.0;
        for (std::size_t v = 0; v < h.vertex_count(); ++v) {
            if (f[v] >= t) {
                up[v] = 1;
                wu += h.vertex_weight(v);
            } else {
                down[v] = 1;
                wd += h.vertex_weight(v);
            }
        }
        if (!subset_connected_uf(h, up) || !subset_connected_uf(h, down)) continue;
        std::size_t cut = 0;
        for (const auto& e : h.edges()) cut += up[e.u] != up[e.v];
        const double diff = std::abs(wu - wd);
        if (!best.found || std::tie(diff, cut, t) < std::tie(best.diff, best.cut, best.threshold)) {
            best.found = true;
            best.threshold = t;
            best.diff = diff;
            best.cut = cut;
            best.upper.clear();
            for (std::size_t v = 0; v < h.vertex_count(); ++v)
                if (up[v]) best.upper.insert(v);
        }
    }
    return best;
}

inline std::set<std::size_t> as_set(const std::vector<std::size_t>& v) { return {v.begin(), v.end()}; }

}  // namespace specchain::test
