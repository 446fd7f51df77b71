#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "anticent/cycles.hpp"
#include "anticent/community.hpp"
#include "anticent/graph.hpp"
#include "oracles.hpp"

using namespace anticent;

namespace {

CommunityPartition one_community(const TxGraph& g) {
    return CommunityPartition::from_assignment(
        std::vector<std::uint32_t>(g.node_count(), 0));
}

// library cycles -> oracle representation (dense indices via tokens)
std::set<std::vector<int>> as_oracle_set(const TxGraph& g,
                                         const std::vector<Cycle>& cycles) {
    std::set<std::vector<int>> out;
    for (const auto& c : cycles) {
        std::vector<int> seq;
        for (const NodeId v : c.nodes)
            seq.push_back(static_cast<int>((g.token_of(v) - 100) / 7));
        out.insert(seq);
    }
    return out;
}

} // namespace

TEST_CASE("cycle enumeration equals the permutation-scan oracle", "[cycles]") {
    std::mt19937 gen(31);
    for (int trial = 0; trial < 30; ++trial) {
        const auto dense = oracle::random_graph(gen, 8, 0.3);
        std::size_t edges = 0;
        for (int u = 0; u < dense.n; ++u)
            for (int v = 0; v < dense.n; ++v)
                if (dense.has(u, v)) ++edges;
        if (edges == 0) continue;
        const auto g = oracle::to_tx(dense);
        const auto found = detect_cycles(g, one_community(g), 3, 6);
        const auto expect = oracle::all_cycles(dense, 3, 6);
        // tokens in the tx graph may exclude isolated dense nodes, but
        // cycles never touch isolated nodes, so the sets must agree
        REQUIRE(as_oracle_set(g, found) == expect);
        for (const auto& c : found)
            CHECK(validate_cycle(g, one_community(g), c));
    }
}

TEST_CASE("cycles are canonicalized to start at the smallest node",
          "[cycles]") {
    std::vector<TransactionEdge> es;
    auto add = [&](Token u, Token v) {
        TransactionEdge e;
        e.source = u;
        e.target = v;
        e.tx_count = 1;
        e.total_amount = 1.0;
        e.start_year = 2020;
        e.end_year = 2020;
        es.push_back(e);
    };
    add(30, 10);
    add(10, 20);
    add(20, 30);
    const auto g = TxGraph::from_edges(es);
    const auto found = detect_cycles(g, one_community(g), 3, 6);
    REQUIRE(found.size() == 1);
    CHECK(found[0].nodes == std::vector<NodeId>{0, 1, 2});
    CHECK(found[0].length() == 3);
}

TEST_CASE("cycles spanning communities are not reported", "[cycles]") {
    std::vector<TransactionEdge> es;
    auto add = [&](Token u, Token v) {
        TransactionEdge e;
        e.source = u;
        e.target = v;
        e.tx_count = 1;
        e.total_amount = 1.0;
        e.start_year = 2020;
        e.end_year = 2020;
        es.push_back(e);
    };
    add(0, 1); add(1, 2); add(2, 0); // triangle
    const auto g = TxGraph::from_edges(es);

    const auto whole = detect_cycles(g, one_community(g), 3, 6);
    REQUIRE(whole.size() == 1);
    CHECK(whole[0].community == 0);

    const auto split = CommunityPartition::from_assignment({0, 0, 1});
    CHECK(detect_cycles(g, split, 3, 6).empty());
}

TEST_CASE("length bounds are honored", "[cycles]") {
    // one 3-cycle and one 4-cycle sharing node 0
    std::vector<TransactionEdge> es;
    auto add = [&](Token u, Token v) {
        TransactionEdge e;
        e.source = u;
        e.target = v;
        e.tx_count = 1;
        e.total_amount = 1.0;
        e.start_year = 2020;
        e.end_year = 2020;
        es.push_back(e);
    };
    add(0, 1); add(1, 2); add(2, 0);
    add(0, 3); add(3, 4); add(4, 5); add(5, 0);
    const auto g = TxGraph::from_edges(es);
    const auto part = one_community(g);
    CHECK(detect_cycles(g, part, 3, 6).size() == 2);
    CHECK(detect_cycles(g, part, 3, 3).size() == 1);
    CHECK(detect_cycles(g, part, 4, 4).size() == 1);
    CHECK(detect_cycles(g, part, 5, 6).empty());
    CHECK_THROWS_AS(detect_cycles(g, part, 1, 6), UsageError);
    CHECK_THROWS_AS(detect_cycles(g, part, 4, 3), UsageError);
}

TEST_CASE("multithreaded enumeration matches single-threaded", "[cycles]") {
    std::mt19937 gen(37);
    const auto dense = oracle::random_graph(gen, 8, 0.4);
    const auto g = oracle::to_tx(dense);
    // split into two communities by parity of dense index
    std::vector<std::uint32_t> assign(g.node_count());
    for (NodeId v = 0; v < g.node_count(); ++v)
        assign[v] = static_cast<std::uint32_t>((g.token_of(v) - 100) / 7) % 2;
    const auto part = CommunityPartition::from_assignment(assign);
    const auto serial = detect_cycles(g, part, 3, 6, 1);
    const auto parallel = detect_cycles(g, part, 3, 6, 4);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i)
        CHECK(serial[i] == parallel[i]);
}

TEST_CASE("path enumeration counts nodes and cycle overlap", "[paths]") {
    // community 0: a 3-cycle with a tail long enough for 4-edge paths;
    // community 1: cycle-free, so its paths are not counted
    std::vector<TransactionEdge> es;
    auto add = [&](Token u, Token v) {
        TransactionEdge e;
        e.source = u;
        e.target = v;
        e.tx_count = 1;
        e.total_amount = 1.0;
        e.start_year = 2020;
        e.end_year = 2020;
        es.push_back(e);
    };
    add(0, 1); add(1, 2); add(2, 0);          // cycle
    add(2, 3); add(3, 4); add(4, 5);          // tail
    add(10, 11); add(11, 12); add(12, 13); add(13, 14); // separate chain
    const auto g = TxGraph::from_edges(es);
    std::vector<std::uint32_t> assign(g.node_count(), 0);
    for (NodeId v = 0; v < g.node_count(); ++v)
        if (g.token_of(v) >= 10) assign[v] = 1;
    const auto part = CommunityPartition::from_assignment(assign);
    const auto cycles = detect_cycles(g, part, 3, 6);
    REQUIRE(cycles.size() == 1);

    const auto res = detect_paths(g, part, cycles, 4, 7);
    // 4-edge simple paths in community 0: e.g. 0→1→2→3→4, 1→2→0..? requires
    // revisiting 0; enumerate by hand: paths are walks without repeats
    // 0 1 2 3 4 / 1 2 3 4 5 (4 edges), 0 1 2 3 4 5 (5 edges), 2 0 1? dead end
    // 1 2 0 ... 0 has out {1} used. so: three paths total
    CHECK(res.path_count == 3);
    CHECK(res.paths.size() == 3);
    CHECK_FALSE(res.truncated);
    CHECK(res.path_nodes == std::vector<NodeId>{0, 1, 2, 3, 4, 5});
    CHECK(res.overlap_nodes == std::vector<NodeId>{0, 1, 2});
    for (const auto& p : res.paths)
        CHECK(p.community == 0);

    const auto capped = detect_paths(g, part, cycles, 4, 7, 2);
    CHECK(capped.truncated);
    CHECK(capped.path_count == 2);
}
