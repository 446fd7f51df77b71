#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <optional>
#include <random>

#include "anticent/graph.hpp"
#include "anticent/rng.hpp"
#include "anticent/walks.hpp"
#include "oracles.hpp"

using namespace anticent;

namespace {

TxGraph line_graph(std::vector<std::tuple<Token, Token, double>> rows) {
    std::vector<TransactionEdge> es;
    for (const auto& [u, v, w] : rows) {
        TransactionEdge e;
        e.source = u;
        e.target = v;
        e.tx_count = 1;
        e.total_amount = w;
        e.start_year = 2020;
        e.end_year = 2020;
        es.push_back(e);
    }
    return TxGraph::from_edges(es);
}

int dense_of(const TxGraph& g, NodeId v) {
    return static_cast<int>((g.token_of(v) - 100) / 7);
}

} // namespace

TEST_CASE("transition probabilities match the dense kernel", "[walks]") {
    std::mt19937 gen(41);
    WalkParams wp;
    for (int trial = 0; trial < 30; ++trial) {
        const auto dense = oracle::random_graph(gen, 8, 0.35);
        const auto g = oracle::to_tx(dense);
        if (g.node_count() == 0) continue;
        wp.p = 0.25 + 0.25 * (trial % 8);
        wp.q = 4.0 / (1 + trial % 5);

        for (NodeId cur = 0; cur < g.node_count(); ++cur) {
            // first step: no previous node
            const auto first = transition_probs(g, std::nullopt, cur, wp);
            const auto oracle_first = oracle::kernel_probs(
                dense, std::nullopt, dense_of(g, cur), wp.p, wp.q);
            for (const auto& [x, pr] : first)
                CHECK_THAT(pr, Catch::Matchers::WithinAbs(
                                   oracle_first[dense_of(g, x)], 1e-12));

            // second-order steps from every in-neighbor
            for (const NodeId prev : g.in_neighbors(cur)) {
                const auto probs = transition_probs(g, prev, cur, wp);
                const auto expect = oracle::kernel_probs(
                    dense, dense_of(g, prev), dense_of(g, cur), wp.p, wp.q);
                double total = 0.0;
                for (const auto& [x, pr] : probs) {
                    CHECK_THAT(pr, Catch::Matchers::WithinAbs(
                                       expect[dense_of(g, x)], 1e-12));
                    total += pr;
                }
                if (!probs.empty())
                    CHECK_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-12));
            }
        }
    }
}

TEST_CASE("first step is weight-proportional", "[walks]") {
    const auto g = line_graph({{0, 1, 1.0}, {0, 2, 3.0}});
    WalkParams wp;
    wp.p = 9.0; // must not matter on the first step
    wp.q = 0.1;
    const auto probs = transition_probs(g, std::nullopt, 0, wp);
    REQUIRE(probs.size() == 2);
    CHECK(probs[0].first == 1);
    CHECK_THAT(probs[0].second, Catch::Matchers::WithinAbs(0.25, 1e-15));
    CHECK(probs[1].first == 2);
    CHECK_THAT(probs[1].second, Catch::Matchers::WithinAbs(0.75, 1e-15));
}

TEST_CASE("alias table reproduces its weights", "[walks]") {
    const std::vector<double> weights{1.0, 2.0, 3.0, 4.0};
    AliasTable table(weights);
    REQUIRE(table.size() == 4);

    Rng rng(123);
    const int draws = 400000;
    std::vector<int> counts(4, 0);
    for (int i = 0; i < draws; ++i) ++counts[table.sample(rng)];
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double freq = static_cast<double>(counts[i]) / draws;
        CHECK_THAT(freq, Catch::Matchers::WithinAbs(weights[i] / 10.0, 0.01));
    }

    // identical seed, identical stream
    Rng a(77), b(77);
    for (int i = 0; i < 1000; ++i)
        REQUIRE(table.sample(a) == table.sample(b));
}

TEST_CASE("alias table handles degenerate weight vectors", "[walks]") {
    AliasTable one(std::vector<double>{5.0});
    Rng rng(1);
    for (int i = 0; i < 10; ++i) CHECK(one.sample(rng) == 0);

    AliasTable skew(std::vector<double>{1e-12, 1.0});
    int hits = 0;
    for (int i = 0; i < 10000; ++i) hits += skew.sample(rng) == 1;
    CHECK(hits > 9990);
}

TEST_CASE("second-order sampler follows the transition law", "[walks]") {
    // 0 -> {1,2,3}, 1 -> {0,2}, so after (1 -> 0): node 1 is a return,
    // node 2 is a shared neighbor, node 3 is an outward move.
    const auto g = line_graph({{0, 1, 1.0},
                               {0, 2, 2.0},
                               {0, 3, 0.5},
                               {1, 0, 1.0},
                               {1, 2, 1.0}});
    WalkParams wp;
    wp.p = 2.0;
    wp.q = 0.5;
    const auto law = transition_probs(g, NodeId{1}, NodeId{0}, wp);
    REQUIRE(law.size() == 3);

    SecondOrderSampler sampler(g, wp);
    Rng rng(99);
    const int draws = 300000;
    std::map<NodeId, int> counts;
    for (int i = 0; i < draws; ++i) ++counts[sampler.step(1, 0, rng)];
    for (const auto& [node, prob] : law) {
        const double freq = static_cast<double>(counts[node]) / draws;
        CHECK_THAT(freq, Catch::Matchers::WithinAbs(prob, 0.01));
    }

    // dead end reports kInvalidNode (3 has no out-edges)
    CHECK(sampler.step(0, 3, rng) == kInvalidNode);
}

TEST_CASE("walk generation is reproducible and thread-independent",
          "[walks]") {
    std::mt19937 gen(43);
    const auto dense = oracle::random_graph(gen, 12, 0.3);
    const auto g = oracle::to_tx(dense);
    WalkParams wp;
    wp.p = 2.0;
    wp.q = 0.5;
    wp.walk_length = 10;
    wp.walks_per_node = 3;
    wp.seed = 42;

    const auto base = generate_walks(g, wp, 1);
    CHECK(base == generate_walks(g, wp, 1));
    CHECK(base == generate_walks(g, wp, 4));

    wp.seed = 43;
    CHECK(base != generate_walks(g, wp, 1));
}

TEST_CASE("alias cache size cannot change the walks", "[walks]") {
    std::mt19937 gen(47);
    const auto dense = oracle::random_graph(gen, 10, 0.4);
    const auto g = oracle::to_tx(dense);
    WalkParams wp;
    wp.p = 0.5;
    wp.q = 2.0;
    wp.walk_length = 12;
    wp.walks_per_node = 4;
    wp.seed = 7;

    wp.alias_cache_budget = 1 << 20;
    const auto cached = generate_walks(g, wp);
    wp.alias_cache_budget = 0;
    CHECK(cached == generate_walks(g, wp));
    wp.alias_cache_budget = 3;
    CHECK(cached == generate_walks(g, wp));
}

TEST_CASE("walk slots are node-major and dead ends truncate", "[walks]") {
    const auto g = line_graph({{0, 1, 1.0}, {1, 2, 1.0}});
    WalkParams wp;
    wp.walk_length = 5;
    wp.walks_per_node = 2;
    const auto walks = generate_walks(g, wp);
    REQUIRE(walks.size() == 6);
    // out-degrees are all <= 1, so every walk is forced
    for (std::uint32_t w = 0; w < 2; ++w) {
        CHECK(walks[0 * 2 + w] == std::vector<NodeId>{0, 1, 2});
        CHECK(walks[1 * 2 + w] == std::vector<NodeId>{1, 2});
        CHECK(walks[2 * 2 + w] == std::vector<NodeId>{2});
    }

    wp.walk_length = 1;
    for (const auto& walk : generate_walks(g, wp))
        CHECK(walk.size() == 1);
}

TEST_CASE("walk parameters are validated", "[walks]") {
    const auto g = line_graph({{0, 1, 1.0}});
    WalkParams wp;
    wp.p = 0.0;
    CHECK_THROWS_AS(generate_walks(g, wp), UsageError);
    wp.p = 1.0;
    wp.walk_length = 0;
    CHECK_THROWS_AS(generate_walks(g, wp), UsageError);
    wp.walk_length = 80;
    wp.walks_per_node = 0;
    CHECK_THROWS_AS(generate_walks(g, wp), UsageError);
}
