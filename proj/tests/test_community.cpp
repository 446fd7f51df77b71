#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "anticent/community.hpp"
#include "anticent/graph.hpp"
#include "oracles.hpp"

using namespace anticent;

namespace {

// Two directed near-cliques joined by a single bridge edge.
TxGraph two_cliques(int size_a = 6, int size_b = 6) {
    std::vector<TransactionEdge> es;
    auto add = [&](int u, int v) {
        TransactionEdge e;
        e.source = 1000 + u;
        e.target = 1000 + v;
        e.tx_count = 1;
        e.total_amount = 1.0;
        e.start_year = 2020;
        e.end_year = 2020;
        es.push_back(e);
    };
    for (int u = 0; u < size_a; ++u)
        for (int v = 0; v < size_a; ++v)
            if (u != v) add(u, v);
    for (int u = 0; u < size_b; ++u)
        for (int v = 0; v < size_b; ++v)
            if (u != v) add(size_a + u, size_a + v);
    add(0, size_a); // bridge
    return TxGraph::from_edges(es);
}

void check_partition_invariants(const TxGraph& g,
                                const CommunityPartition& part) {
    std::size_t covered = 0;
    NodeId prev_smallest = 0;
    for (std::uint32_t c = 0; c < part.community_count(); ++c) {
        const auto& members = part.communities[c];
        REQUIRE_FALSE(members.empty());
        REQUIRE(std::is_sorted(members.begin(), members.end()));
        if (c > 0) REQUIRE(members.front() > prev_smallest);
        prev_smallest = members.front();
        for (const NodeId v : members) {
            REQUIRE(v < g.node_count());
            REQUIRE(part.community_of(v) == c);
        }
        covered += members.size();
    }
    REQUIRE(covered == g.node_count());
}

} // namespace

TEST_CASE("two cliques with a bridge split into two communities",
          "[community]") {
    const auto g = two_cliques();
    const auto part = detect_communities(g, 1.0, 42);
    check_partition_invariants(g, part);
    REQUIRE(part.community_count() == 2);
    // each clique lands in one community
    for (NodeId v = 1; v < 6; ++v)
        CHECK(part.community_of(v) == part.community_of(0));
    for (NodeId v = 7; v < 12; ++v)
        CHECK(part.community_of(v) == part.community_of(6));
    CHECK(part.community_of(0) != part.community_of(6));
}

TEST_CASE("detected partition beats trivial partitions on modularity",
          "[community]") {
    std::mt19937 gen(23);
    for (int trial = 0; trial < 10; ++trial) {
        const auto dense = oracle::random_graph(gen, 8, 0.3);
        std::size_t edge_total = 0;
        for (int u = 0; u < dense.n; ++u)
            for (int v = 0; v < dense.n; ++v)
                if (dense.has(u, v)) ++edge_total;
        if (edge_total == 0) continue;
        const auto g = oracle::to_tx(dense);
        const auto part = detect_communities(g, 1.0, trial);
        check_partition_invariants(g, part);

        const double detected = modularity(g, part.assignment, 1.0);
        const std::vector<std::uint32_t> all_one(g.node_count(), 0);
        std::vector<std::uint32_t> singletons(g.node_count());
        for (std::uint32_t i = 0; i < singletons.size(); ++i)
            singletons[i] = i;
        CHECK(detected >= modularity(g, all_one, 1.0) - 1e-12);
        CHECK(detected >= modularity(g, singletons, 1.0) - 1e-12);
    }
}

TEST_CASE("community detection is reproducible per seed", "[community]") {
    const auto g = two_cliques(8, 5);
    const auto a = detect_communities(g, 1.0, 123);
    const auto b = detect_communities(g, 1.0, 123);
    REQUIRE(a.assignment == b.assignment);
}

TEST_CASE("asymmetric edge weights are merged for the projection",
          "[community]") {
    // weight mass, not edge direction, should drive the split
    std::vector<TransactionEdge> es;
    auto add = [&](Token u, Token v, double w) {
        TransactionEdge e;
        e.source = u;
        e.target = v;
        e.tx_count = 1;
        e.total_amount = w;
        e.start_year = 2020;
        e.end_year = 2020;
        es.push_back(e);
    };
    // triangle A heavy both ways, triangle B heavy one way, light bridge
    add(0, 1, 10.0); add(1, 0, 10.0);
    add(1, 2, 10.0); add(2, 1, 10.0);
    add(2, 0, 10.0); add(0, 2, 10.0);
    add(3, 4, 20.0); add(4, 5, 20.0); add(5, 3, 20.0);
    add(2, 3, 0.1);
    const auto g = TxGraph::from_edges(es);
    const auto part = detect_communities(g, 1.0, 1);
    check_partition_invariants(g, part);
    REQUIRE(part.community_count() == 2);
    CHECK(part.community_of(0) == part.community_of(1));
    CHECK(part.community_of(0) == part.community_of(2));
    CHECK(part.community_of(3) == part.community_of(4));
    CHECK(part.community_of(3) == part.community_of(5));
}

TEST_CASE("degenerate community inputs", "[community]") {
    CHECK_THROWS_AS(detect_communities(TxGraph{}, 0.0, 1), UsageError);
    CHECK_THROWS_AS(detect_communities(TxGraph{}, -1.0, 1), UsageError);
    const auto empty = detect_communities(TxGraph{}, 1.0, 1);
    CHECK(empty.community_count() == 0);
}

TEST_CASE("from_assignment renumbers by smallest member", "[community]") {
    const auto part =
        CommunityPartition::from_assignment({7, 7, 3, 3, 7});
    REQUIRE(part.community_count() == 2);
    CHECK(part.assignment == std::vector<std::uint32_t>{0, 0, 1, 1, 0});
    CHECK(part.communities[0] == std::vector<NodeId>{0, 1, 4});
    CHECK(part.communities[1] == std::vector<NodeId>{2, 3});
}

TEST_CASE("higher resolution yields finer or equal partitions",
          "[community]") {
    const auto g = two_cliques(6, 6);
    const auto coarse = detect_communities(g, 0.2, 5);
    const auto fine = detect_communities(g, 3.0, 5);
    CHECK(fine.community_count() >= coarse.community_count());
}
