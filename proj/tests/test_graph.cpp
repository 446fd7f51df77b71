#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "anticent/edge_io.hpp"
#include "anticent/graph.hpp"
#include "oracles.hpp"

using namespace anticent;

namespace {

std::vector<TransactionEdge> tiny_edges() {
    // 30 -> 10 -> 20 -> 30, plus 10 -> 30
    std::vector<TransactionEdge> es;
    auto add = [&](Token s, Token t, double amount) {
        TransactionEdge e;
        e.source = s;
        e.target = t;
        e.tx_count = 2;
        e.total_amount = amount;
        e.start_year = 2019;
        e.end_year = 2019;
        es.push_back(e);
    };
    add(30, 10, 5.0);
    add(10, 20, 7.0);
    add(20, 30, 1.5);
    add(10, 30, 2.0);
    return es;
}

} // namespace

TEST_CASE("graph builds a sorted dense index over tokens", "[graph]") {
    const auto g = TxGraph::from_edges(tiny_edges());
    REQUIRE(g.node_count() == 3);
    REQUIRE(g.edge_count() == 4);
    CHECK(g.token_of(0) == 10);
    CHECK(g.token_of(1) == 20);
    CHECK(g.token_of(2) == 30);
    CHECK(g.index_of(20).value() == 1);
    CHECK_FALSE(g.index_of(99).has_value());

    CHECK(g.out_degree(0) == 2); // 10 -> {20, 30}
    CHECK(g.in_degree(2) == 2);  // 30 <- {20, 10}
    CHECK(g.has_edge(0, 1));
    CHECK_FALSE(g.has_edge(1, 0));
    CHECK(g.edge_weight(0, 1) == 7.0);
}

TEST_CASE("graph layout is invariant under input row order", "[graph]") {
    auto edges = tiny_edges();
    const auto g1 = TxGraph::from_edges(edges);
    std::mt19937 gen(7);
    for (int trial = 0; trial < 10; ++trial) {
        std::shuffle(edges.begin(), edges.end(), gen);
        const auto g2 = TxGraph::from_edges(edges);
        REQUIRE(g2.node_count() == g1.node_count());
        for (NodeId u = 0; u < g1.node_count(); ++u) {
            REQUIRE(g2.token_of(u) == g1.token_of(u));
            const auto n1 = g1.out_neighbors(u);
            const auto n2 = g2.out_neighbors(u);
            REQUIRE(std::vector<NodeId>(n1.begin(), n1.end()) ==
                    std::vector<NodeId>(n2.begin(), n2.end()));
            const auto w1 = g1.out_weights(u);
            const auto w2 = g2.out_weights(u);
            REQUIRE(std::vector<double>(w1.begin(), w1.end()) ==
                    std::vector<double>(w2.begin(), w2.end()));
        }
    }
}

TEST_CASE("graph rejects self-loops and duplicate ordered pairs", "[graph]") {
    auto edges = tiny_edges();
    SECTION("self-loop") {
        auto bad = edges;
        bad.push_back(bad.front());
        bad.back().target = bad.back().source;
        CHECK_THROWS_AS(TxGraph::from_edges(bad), DataError);
    }
    SECTION("duplicate pair") {
        auto bad = edges;
        bad.push_back(bad.front());
        bad.back().total_amount = 42.0;
        CHECK_THROWS_AS(TxGraph::from_edges(bad), DataError);
    }
    SECTION("reverse direction is not a duplicate") {
        auto ok = edges;
        ok.push_back(ok[1]); // 10 -> 20; the graph has no 20 -> 10
        std::swap(ok.back().source, ok.back().target);
        CHECK_NOTHROW(TxGraph::from_edges(ok));
    }
}

TEST_CASE("graph structure matches the dense oracle", "[graph]") {
    std::mt19937 gen(11);
    for (int trial = 0; trial < 25; ++trial) {
        const auto dense = oracle::random_graph(gen, 8, 0.35);
        const auto g = oracle::to_tx(dense);
        std::size_t edges = 0;
        for (int u = 0; u < dense.n; ++u)
            for (int v = 0; v < dense.n; ++v)
                if (dense.has(u, v)) ++edges;
        if (edges == 0) continue; // empty graphs have no token table
        for (int u = 0; u < dense.n; ++u) {
            const auto iu = g.index_of(100 + 7 * u);
            if (!iu) continue; // isolated in the dense graph
            for (int v = 0; v < dense.n; ++v) {
                const auto iv = g.index_of(100 + 7 * v);
                if (!iv) continue;
                REQUIRE(g.has_edge(*iu, *iv) == dense.has(u, v));
                if (dense.has(u, v))
                    REQUIRE(g.edge_weight(*iu, *iv) == dense.w[u][v]);
            }
        }
    }
}

TEST_CASE("induced subgraph keeps weights and maps back to parents",
          "[graph]") {
    std::mt19937 gen(13);
    const auto dense = oracle::random_graph(gen, 8, 0.5);
    const auto g = oracle::to_tx(dense);
    std::vector<NodeId> pick{0, 2, 3, 5};
    pick.erase(std::remove_if(pick.begin(), pick.end(),
                              [&](NodeId v) { return v >= g.node_count(); }),
               pick.end());
    const auto sub = induce_subgraph_indexed(g, pick);
    REQUIRE(sub.parent.size() == pick.size());
    for (std::size_t a = 0; a < sub.parent.size(); ++a) {
        REQUIRE(sub.graph.token_of(static_cast<NodeId>(a)) ==
                g.token_of(sub.parent[a]));
        for (std::size_t b = 0; b < sub.parent.size(); ++b) {
            const bool expect = g.has_edge(sub.parent[a], sub.parent[b]);
            REQUIRE(sub.graph.has_edge(static_cast<NodeId>(a),
                                       static_cast<NodeId>(b)) == expect);
        }
    }
    CHECK_THROWS_AS(
        induce_subgraph_indexed(g, std::vector<NodeId>{9999}), DataError);
}

TEST_CASE("edge list round-trips through the writer and parser", "[edge_io]") {
    std::mt19937 gen(17);
    const auto dense = oracle::random_graph(gen, 7, 0.4);
    const auto g = oracle::to_tx(dense);
    const auto edges = graph_to_edges(g);

    std::ostringstream out;
    write_edge_list(out, edges, ',', {"round trip fixture"});
    std::istringstream in(out.str());
    const auto parsed = parse_edge_list(in);
    REQUIRE(parsed.edges.size() == edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        CHECK(parsed.edges[i].source == edges[i].source);
        CHECK(parsed.edges[i].target == edges[i].target);
        CHECK(parsed.edges[i].tx_count == edges[i].tx_count);
        CHECK(parsed.edges[i].total_amount == edges[i].total_amount);
    }
}

TEST_CASE("parser accepts any column order and reports missing columns",
          "[edge_io]") {
    std::istringstream in("target,source,total_amount,tx_count,start_year,"
                          "end_year\n20,10,99.5,3,2019,2020\n");
    const auto parsed = parse_edge_list(in);
    REQUIRE(parsed.edges.size() == 1);
    CHECK(parsed.edges[0].source == 10);
    CHECK(parsed.edges[0].target == 20);
    CHECK(parsed.edges[0].tx_count == 3);

    std::istringstream missing("source,target,tx_count\n1,2,3\n");
    CHECK_THROWS_AS(parse_edge_list(missing), ParseError);
}

TEST_CASE("strict parsing collects every malformed row", "[edge_io]") {
    const std::string text =
        "source,target,tx_count,total_amount,start_year,end_year\n"
        "10,20,1,5.0,2019,2019\n"
        "11,21,x,5.0,2019,2019\n"   // bad tx_count
        "12,22,1,5.0,2020,2019\n"   // years reversed
        "13,23,1,5.0,2019,2019\n";
    std::istringstream in(text);
    try {
        parse_edge_list(in);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        REQUIRE(e.issues.size() == 2);
        CHECK(e.issues[0].line == 3);
        CHECK(e.issues[1].line == 4);
    }

    std::istringstream lax(text);
    ParseOptions opts;
    opts.strict = false;
    const auto parsed = parse_edge_list(lax, opts);
    CHECK(parsed.edges.size() == 2);
    CHECK(parsed.issues.size() == 2);
}

TEST_CASE("parser counts and drops self-loops", "[edge_io]") {
    std::istringstream in(
        "source,target,tx_count,total_amount,start_year,end_year\n"
        "10,10,1,5.0,2019,2019\n"
        "10,20,1,5.0,2019,2019\n");
    const auto parsed = parse_edge_list(in);
    CHECK(parsed.edges.size() == 1);
    CHECK(parsed.self_loops_rejected == 1);
}

TEST_CASE("comments and blank lines are skipped", "[edge_io]") {
    std::istringstream in(
        "# provenance note\n\n"
        "source,target,tx_count,total_amount,start_year,end_year\n"
        "# mid-file comment\n"
        "10,20,1,5.0,2019,2019\n");
    CHECK(parse_edge_list(in).edges.size() == 1);
}

TEST_CASE("cleaning keeps sub-threshold same-year edges only", "[edge_io]") {
    std::vector<TransactionEdge> es;
    auto add = [&](double total, std::int64_t n, int y0, int y1) {
        TransactionEdge e;
        e.source = 1;
        e.target = 2 + static_cast<Token>(es.size());
        e.tx_count = n;
        e.total_amount = total;
        e.start_year = y0;
        e.end_year = y1;
        es.push_back(e);
    };
    add(9999.99, 1, 2019, 2019);   // keep: avg under the bound
    add(10000.0, 1, 2019, 2019);   // drop: avg exactly at the bound
    add(20000.0, 3, 2019, 2019);   // keep: avg 6666.67
    add(5000.0, 1, 2019, 2020);    // drop: spans years
    add(30000.0, 2, 2020, 2020);   // drop: avg 15000

    const auto kept = clean_filter(es, {});
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].total_amount == 9999.99);
    CHECK(kept[1].total_amount == 20000.0);

    CleanRules any_year;
    any_year.require_same_year = false;
    CHECK(clean_filter(es, any_year).size() == 3);
}

TEST_CASE("average amount is total over transaction count", "[edge_io]") {
    TransactionEdge e;
    e.tx_count = 4;
    e.total_amount = 10.0;
    CHECK(e.average_amount() == 2.5);
}
