#include <gtest/gtest.h>

#include "support.hpp"

using namespace specchain;
using specchain::test::as_set;
using specchain::test::threshold_oracle;

namespace {

std::vector<std::size_t> sizes_of(const Proposal& p) {
    std::vector<std::size_t> s{p.new_parts.first.size(), p.new_parts.second.size()};
    std::sort(s.begin(), s.end());
    return s;
}

}  // namespace

TEST(SelectMerge, SingleCutEdge) {
    Graph g = test::path(3);
    Partition p(g, {0, 0, 1}, 2);
    Rng rng = make_rng(1);
    for (int i = 0; i < 100; ++i) {
        auto m = select_merge(g, p, rng);
        EXPECT_EQ(m.edge, 1u);
        EXPECT_EQ(m.part_a, 0u);
        EXPECT_EQ(m.part_b, 1u);
    }
    Partition whole(g, {0, 0, 0}, 1);
    EXPECT_THROW(select_merge(g, whole, rng), InvalidState);
}

TEST(SelectMerge, GridBandPairsAreUniform) {
    auto [g, p] = make_grid(56, 7);
    Rng rng = make_rng(77);
    std::vector<std::size_t> counts(6, 0);
    for (int i = 0; i < 100000; ++i) {
        auto m = select_merge(g, p, rng);
        ASSERT_EQ(m.part_b, m.part_a + 1) << "non-adjacent bands selected";
        ++counts[m.part_a];
    }
    EXPECT_GT(test::chi_squared_uniform_p(counts), 0.001);
}

TEST(Overlay, WeightsStayInUnitInterval) {
    Rng rng = make_rng(3);
    auto o = EdgeWeightOverlay::draw(10000, rng);
    double lo = 3.0, hi = 0.0, sum = 0.0;
    for (double w : o.weights) {
        lo = std::min(lo, w);
        hi = std::max(hi, w);
        sum += w;
    }
    EXPECT_GE(lo, 1.0);
    EXPECT_LE(hi, 2.0);
    EXPECT_NEAR(sum / 10000.0, 1.5, 0.02);
}

TEST(SpecReCom, FourCycleSplitsAreConnectedArcs) {
    auto [g, p] = make_grid(2, 2);
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        Rng rng = make_rng(seed);
        Proposal prop = specrecom_step(g, p, rng);
        ASSERT_TRUE(prop.is_candidate()) << prop.diagnostics.reason;
        auto s = sizes_of(prop);
        EXPECT_TRUE(s == (std::vector<std::size_t>{2, 2}) || s == (std::vector<std::size_t>{1, 3}));
        Partition next = apply_proposal(g, p, prop);
        EXPECT_TRUE(is_connected_partition(g, next));
        EXPECT_FALSE(verify_partition(g, next).has_value());
    }
}

TEST(SpecReCom, SingleEdgeReturnsTheSingletons) {
    Graph g = test::build(2, {{0, 1}});
    Partition p(g, {0, 1}, 2);
    Rng rng = make_rng(5);
    Proposal prop = specrecom_step(g, p, rng);
    ASSERT_TRUE(prop.is_candidate());
    EXPECT_EQ(apply_proposal(g, p, prop).part_sizes(), (std::vector<std::size_t>{1, 1}));
}

TEST(SpecReCom, SameSeedSameProposal) {
    auto [g, p] = make_grid(12, 4);
    Rng a = make_rng(42), b = make_rng(42);
    Proposal pa = specrecom_step(g, p, a), pb = specrecom_step(g, p, b);
    EXPECT_EQ(pa.status, pb.status);
    EXPECT_EQ(pa.replaced_parts, pb.replaced_parts);
    EXPECT_EQ(pa.new_parts, pb.new_parts);
}

TEST(SpecReCom, ConstantOverlayIsSeedIndependent) {
    std::mt19937_64 gen(31);
    KernelOptions opts;
    opts.constant_overlay = 1.0;
    int checked = 0;
    while (checked < 20) {
        Graph g = test::random_connected(gen, {6, 20, 0.2});
        auto oracle = test::jacobi_eigen(test::dense_laplacian(g));
        if (oracle.values[2] - oracle.values[1] < 1e-3) continue;  // need a simple lambda2
        std::vector<std::size_t> assign(g.vertex_count(), 0);
        assign.back() = 1;
        Partition p(g, assign, 2);
        if (!is_connected_partition(g, p)) continue;
        std::optional<Proposal> first;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            Rng rng = make_rng(seed);
            Proposal prop = specrecom_step(g, p, rng, opts);
            if (!first) {
                first = prop;
                continue;
            }
            EXPECT_EQ(prop.status, first->status);
            EXPECT_EQ(prop.new_parts, first->new_parts);
        }
        ++checked;
    }
}

TEST(BalSpecReCom, PathOfFourSplitsInTheMiddle) {
    Graph g = test::path(4);
    Partition p(g, {0, 1, 1, 1}, 2);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng = make_rng(seed);
        Proposal prop = balspecrecom_step(g, p, rng);
        ASSERT_TRUE(prop.is_candidate());
        EXPECT_FALSE(prop.diagnostics.self_loop);
        Partition next = apply_proposal(g, p, prop);
        EXPECT_EQ(next.part_sizes(), (std::vector<std::size_t>{2, 2}));
        EXPECT_EQ(next.cut_edges(), (std::vector<std::size_t>{1}));
    }
}

TEST(BalSpecReCom, StarBestSplitIsOneAgainstThree) {
    Graph g = test::star(3);
    auto choice = best_threshold_split(g, fiedler(g));
    ASSERT_TRUE(choice.found);
    EXPECT_EQ(choice.weight_difference, 2.0);
    std::vector<std::size_t> s{choice.split.first.size(), choice.split.second.size()};
    std::sort(s.begin(), s.end());
    EXPECT_EQ(s, (std::vector<std::size_t>{1, 3}));

    Partition p(g, {0, 0, 0, 1}, 2);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng = make_rng(seed);
        Proposal prop = balspecrecom_step(g, p, rng);
        EXPECT_EQ(sizes_of(prop), (std::vector<std::size_t>{1, 3}));
    }
}

TEST(BalSpecReCom, NoConnectedThresholdMeansNoChoice) {
    // Path 0-1-2-3-4 with the largest entry in the middle: every prefix of
    // the descending order is disconnected or leaves a disconnected rest.
    Graph g = test::path(5);
    FiedlerResult f{0.0, {0.5, -0.5, 1.0, -1.0, 0.0}, 0.0};
    auto choice = best_threshold_split(g, f);
    EXPECT_FALSE(choice.found);
    EXPECT_EQ(choice.connected_candidates, 0u);
    EXPECT_FALSE(threshold_oracle(g, f.vector).found);
}

TEST(BalSpecReCom, SweepMatchesBruteForceOracle) {
    std::mt19937_64 gen(2024);
    for (int trial = 0; trial < 300; ++trial) {
        Graph h = test::random_connected(gen, {2, 12, 0.3, 1.0, 2.0, true});
        auto f = fiedler(h);
        auto choice = best_threshold_split(h, f);
        auto oracle = threshold_oracle(h, f.vector);
        ASSERT_EQ(choice.found, oracle.found);
        if (!oracle.found) continue;
        EXPECT_EQ(choice.threshold, oracle.threshold);
        EXPECT_EQ(choice.weight_difference, oracle.diff);
        EXPECT_EQ(choice.cut_edges, oracle.cut);
        EXPECT_EQ(as_set(choice.split.first), oracle.upper);
    }
}

TEST(BalSpecReCom, NeverLessBalancedThanConnectedSignSplit) {
    std::mt19937_64 gen(606);
    int compared = 0;
    for (int trial = 0; trial < 400; ++trial) {
        Graph h = test::random_connected(gen, {3, 30, 0.15, 1.0, 2.0, true});
        auto f = fiedler(h);
        auto sign = sign_split(h, f);
        if (sign.second.empty()) continue;
        std::vector<char> a(h.vertex_count(), 0), b(h.vertex_count(), 0);
        double wa = 0.0, wb = 0.0;
        for (std::size_t v : sign.first) a[v] = 1, wa += h.vertex_weight(v);
        for (std::size_t v : sign.second) b[v] = 1, wb += h.vertex_weight(v);
        if (!test::subset_connected_uf(h, a) || !test::subset_connected_uf(h, b)) continue;
        auto choice = best_threshold_split(h, f);
        ASSERT_TRUE(choice.found);
        EXPECT_LE(choice.weight_difference, std::abs(wa - wb));
        ++compared;
    }
    EXPECT_GT(compared, 100);
}

TEST(SpanningTree, IsASpanningTree) {
    std::mt19937_64 gen(9);
    Rng rng = make_rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        Graph g = test::random_connected(gen, {1, 40, 0.2});
        auto tree = sample_spanning_tree(g, rng);
        ASSERT_EQ(tree.size(), g.vertex_count() - 1);
        std::vector<Edge> es;
        for (std::size_t e : tree) es.push_back(g.edge(e));
        EXPECT_TRUE(is_connected(Graph(g.vertices(), es)));
    }
}

TEST(SpanningTree, UniformOnCycleAndK4) {
    for (const Graph& g : {test::cycle(4), test::complete(4)}) {
        Rng rng = make_rng(2718);
        std::map<std::vector<std::size_t>, std::size_t> freq;
        for (int i = 0; i < 100000; ++i) ++freq[sample_spanning_tree(g, rng)];
        const std::size_t expected_trees = g.edge_count() == 4 ? 4 : 16;
        ASSERT_EQ(freq.size(), expected_trees);
        std::vector<std::size_t> counts;
        for (const auto& [tree, c] : freq) counts.push_back(c);
        EXPECT_GT(test::chi_squared_uniform_p(counts), 0.001);
    }
}

TEST(TreeReCom, StarHasNoBalanceEdges) {
    Graph g = test::star(18);
    Partition p(g, std::vector<std::size_t>{0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1}, 2);
    Rng rng = make_rng(1);
    for (int i = 0; i < 100; ++i) {
        Proposal prop = treerecom_step(g, p, 0.5, rng);
        EXPECT_FALSE(prop.is_candidate());
        EXPECT_EQ(prop.diagnostics.connected_thresholds, 0u);
    }
    // Every tree edge gives (1, 18): deviation 17/19.
    auto tree = sample_spanning_tree(g, rng);
    EXPECT_TRUE(epsilon_balance_edges(g, tree, g.total_weight(), 2, 17.0 / 19.0 - 1e-12).empty());
    EXPECT_EQ(epsilon_balance_edges(g, tree, g.total_weight(), 2, 17.0 / 19.0 + 1e-12).size(), 18u);
}

TEST(TreeReCom, PathOfFourCutsTheMiddleAtZeroTolerance) {
    Graph g = test::path(4);
    Partition p(g, {0, 0, 0, 1}, 2);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng = make_rng(seed);
        Proposal prop = treerecom_step(g, p, 0.0, rng);
        ASSERT_TRUE(prop.is_candidate());
        Partition next = apply_proposal(g, p, prop);
        EXPECT_EQ(next.cut_edges(), (std::vector<std::size_t>{1}));
    }
}

TEST(TreeReCom, LooseToleranceAcceptsEveryTreeEdge) {
    std::mt19937_64 gen(12);
    Rng rng = make_rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        Graph g = test::random_connected(gen, {2, 30, 0.2, 1.0, 1.0, true});
        auto tree = sample_spanning_tree(g, rng);
        EXPECT_EQ(epsilon_balance_edges(g, tree, g.total_weight(), 2, 1.0).size(), g.vertex_count() - 1);
    }
}

TEST(Kernels, AcceptedCandidatesKeepValidConnectedPartitions) {
    std::mt19937_64 gen(555);
    Rng rng = make_rng(555);
    std::size_t candidates[3] = {0, 0, 0};
    for (int step = 0; step < 10000; ++step) {
        Graph g = test::random_connected(gen, {3, 40, 0.1, 1.0, 1.0, true});
        const std::size_t k = std::uniform_int_distribution<std::size_t>(2, std::min<std::size_t>(6, g.vertex_count()))(gen);
        // Seed a connected k-partition by splitting a spanning tree.
        Partition p = [&] {
            {
                auto tree = sample_spanning_tree(g, rng);
                std::shuffle(tree.begin(), tree.end(), gen);
                tree.resize(g.vertex_count() - k);
                std::vector<Edge> es;
                for (std::size_t e : tree) es.push_back(g.edge(e));
                Graph forest(g.vertices(), es);
                std::vector<std::size_t> label(g.vertex_count(), k);
                std::size_t next = 0;
                for (std::size_t s = 0; s < g.vertex_count(); ++s) {
                    if (label[s] != k) continue;
                    std::vector<std::size_t> stack{s};
                    label[s] = next;
                    while (!stack.empty()) {
                        auto v = stack.back();
                        stack.pop_back();
                        for (const auto& nb : forest.neighbors(v))
                            if (label[nb.vertex] == k) label[nb.vertex] = next, stack.push_back(nb.vertex);
                    }
                    ++next;
                }
                return Partition(g, label, k);
            }
        }();
        ASSERT_TRUE(is_connected_partition(g, p));
        const int which = step % 3;
        Proposal prop = which == 0   ? specrecom_step(g, p, rng)
                        : which == 1 ? balspecrecom_step(g, p, rng)
                                     : treerecom_step(g, p, 10.0, rng);
        if (!prop.is_candidate()) continue;
        ++candidates[which];
        Partition next = apply_proposal(g, p, prop);
        ASSERT_FALSE(verify_partition(g, next).has_value());
        ASSERT_TRUE(is_connected_partition(g, next));
        ASSERT_EQ(next.k(), k);
        for (std::size_t v = 0; v < g.vertex_count(); ++v) {
            const std::size_t old = p.part_of(v);
            if (old != prop.replaced_parts.first && old != prop.replaced_parts.second)
                ASSERT_EQ(next.part_of(v), old);
        }
    }
    for (std::size_t c : candidates) EXPECT_GT(c, 2500u);
}
