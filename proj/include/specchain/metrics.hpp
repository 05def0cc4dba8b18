#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "specchain/errors.hpp"
#include "specchain/graph.hpp"
#include "specchain/rng.hpp"
#include "specchain/spectral.hpp"

namespace specchain {

struct PlanMetrics {
    std::size_t cut_edge_count = 0;
    double pop_dev = 0.0;
    bool parts_connected = false;
    std::vector<std::size_t> part_sizes;
    std::vector<double> part_weights;
};

/// Number of edges whose endpoints lie in different parts.
inline std::size_t cut_edges(const Graph& g, const Partition& p) {
    if (p.vertex_count() != g.vertex_count()) throw InvalidArgument("cut_edges: size mismatch");
    std::size_t count = 0;
    for (const auto& e : g.edges())
        if (p.part_of(e.u) != p.part_of(e.v)) ++count;
    return count;
}

/// max_i |k * w(D_i) / w(V) - 1|
inline double pop_dev(const Graph& g, const Partition& p) {
    const double total = g.total_weight();
    if (!(total > 0.0)) throw InvalidArgument("pop_dev: total vertex weight is zero");
    const auto k = static_cast<double>(p.k());
    double worst = 0.0;
    for (double w : p.part_weights()) worst = std::max(worst, std::abs(k * w / total - 1.0));
    return worst;
}

inline PlanMetrics plan_metrics(const Graph& g, const Partition& p) {
    return {cut_edges(g, p), pop_dev(g, p), is_connected_partition(g, p), p.part_sizes(),
            p.part_weights()};
}

struct KMeansOptions {
    std::size_t max_iterations = 500;
};

namespace detail {

inline double squared_distance(const Eigen::MatrixXd& points, Eigen::Index row,
                               const Eigen::MatrixXd& centers, Eigen::Index c) {
    return (points.row(row) - centers.row(c)).squaredNorm();
}

/// Lloyd's algorithm with farthest-first initialization. The first center is
/// the point picked by `rng`; each later one is the point farthest from its
/// nearest chosen center (lowest index on ties).
inline std::vector<std::size_t> lloyd_kmeans(const Eigen::MatrixXd& points, std::size_t k, Rng& rng,
                                             const KMeansOptions& opts) {
    const Eigen::Index n = points.rows();
    const auto kk = static_cast<Eigen::Index>(k);
    Eigen::MatrixXd centers(kk, points.cols());
    centers.row(0) = points.row(static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(n))));
    Eigen::VectorXd nearest = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
    for (Eigen::Index c = 1; c < kk; ++c) {
        Eigen::Index far = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            nearest[i] = std::min(nearest[i], squared_distance(points, i, centers, c - 1));
            if (nearest[i] > nearest[far]) far = i;
        }
        centers.row(c) = points.row(far);
    }

    std::vector<std::size_t> label(static_cast<std::size_t>(n), k);
    for (std::size_t it = 0; it < opts.max_iterations; ++it) {
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::Index best = 0;
            double best_d = squared_distance(points, i, centers, 0);
            for (Eigen::Index c = 1; c < kk; ++c) {
                const double d = squared_distance(points, i, centers, c);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (label[static_cast<std::size_t>(i)] != static_cast<std::size_t>(best)) {
                label[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
                changed = true;
            }
        }

        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(kk, points.cols());
        std::vector<std::size_t> counts(k, 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(static_cast<Eigen::Index>(label[static_cast<std::size_t>(i)])) += points.row(i);
            ++counts[label[static_cast<std::size_t>(i)]];
        }
        bool reseeded = false;
        for (Eigen::Index c = 0; c < kk; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
                continue;
            }
            // Empty cluster: move it onto the point farthest from its own center.
            Eigen::Index far = 0;
            double far_d = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto own = static_cast<Eigen::Index>(label[static_cast<std::size_t>(i)]);
                if (counts[static_cast<std::size_t>(own)] < 2) continue;
                const double d = squared_distance(points, i, centers, own);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            --counts[label[static_cast<std::size_t>(far)]];
            label[static_cast<std::size_t>(far)] = static_cast<std::size_t>(c);
            counts[static_cast<std::size_t>(c)] = 1;
            centers.row(c) = points.row(far);
            reseeded = true;
        }
        if (!changed && !reseeded) break;
    }
    return label;
}

}  // namespace detail

/// Spectral k-means baseline: Lloyd clustering of the rows of u2..uk.
/// Parts are not guaranteed to be connected.
inline Partition speckmeans(const Graph& g, std::size_t k, std::uint64_t seed,
                            const SolverOptions& solver = {}, const KMeansOptions& opts = {}) {
    const auto embedding = spectral_embedding(g, k, solver);
    Rng rng = make_rng(seed);
    auto label = detail::lloyd_kmeans(embedding.coordinates, k, rng, opts);

    // Compact labels in vertex order so part 0 holds vertex 0.
    std::vector<std::size_t> remap(k, k);
    std::size_t next = 0;
    for (auto& l : label) {
        if (remap[l] == k) remap[l] = next++;
        l = remap[l];
    }
    if (next != k) throw SolverError("speckmeans: fewer than k nonempty clusters", 0.0);
    return Partition(g, std::move(label), k);
}

}  // namespace specchain
