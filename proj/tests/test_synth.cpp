#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <sstream>

#include "anticent/community.hpp"
#include "anticent/cycles.hpp"
#include "anticent/edge_io.hpp"
#include "anticent/synth.hpp"

using namespace anticent;

namespace {

SynthSpec small_spec() {
    SynthSpec spec;
    spec.community_count = 2;
    spec.community_size_range = {40, 50};
    spec.intra_density = 0.08;
    spec.inter_edge_count = 6;
    spec.clusters_per_community = 4;
    spec.seed = 11;
    return spec;
}

bool edges_equal(const TransactionEdge& a, const TransactionEdge& b) {
    return a.source == b.source && a.target == b.target &&
           a.tx_count == b.tx_count && a.total_amount == b.total_amount &&
           a.start_year == b.start_year && a.end_year == b.end_year;
}

} // namespace

TEST_CASE("generation is reproducible per seed", "[synth]") {
    auto spec = small_spec();
    spec.planted = {{4, Attachment::anti_central}, {3, Attachment::central}};
    const auto a = generate(spec);
    const auto b = generate(spec);
    REQUIRE(a.edges.size() == b.edges.size());
    for (std::size_t i = 0; i < a.edges.size(); ++i)
        REQUIRE(edges_equal(a.edges[i], b.edges[i]));
    REQUIRE(a.planted.size() == b.planted.size());
    for (std::size_t i = 0; i < a.planted.size(); ++i)
        CHECK(a.planted[i].nodes == b.planted[i].nodes);

    spec.seed = 12;
    const auto c = generate(spec);
    const bool same_size = c.edges.size() == a.edges.size();
    bool identical = same_size;
    if (same_size)
        for (std::size_t i = 0; i < a.edges.size() && identical; ++i)
            identical = edges_equal(a.edges[i], c.edges[i]);
    CHECK_FALSE(identical);
}

TEST_CASE("every generated edge survives the cleaning filter", "[synth]") {
    auto spec = small_spec();
    spec.planted = {{4, Attachment::random}};
    const auto res = generate(spec);
    REQUIRE(!res.edges.empty());

    std::set<std::pair<Token, Token>> seen;
    for (const auto& e : res.edges) {
        CHECK(e.source != e.target);
        CHECK(e.tx_count >= 1);
        CHECK(e.tx_count <= 3);
        CHECK(e.average_amount() < 10000.0);
        CHECK(e.average_amount() > 0.0);
        CHECK(e.start_year == e.end_year);
        CHECK(seen.insert({e.source, e.target}).second); // no duplicate pair
    }
    CHECK(clean_filter(res.edges).size() == res.edges.size());
}

TEST_CASE("graph indices line up with generator indices", "[synth]") {
    auto spec = small_spec();
    spec.seed = 3; // plenty of chances for stragglers across seeds
    for (std::uint64_t s = 0; s < 4; ++s) {
        spec.seed = 3 + s;
        const auto res = generate(spec);
        REQUIRE(res.graph.node_count() == res.community_of_node.size());
        REQUIRE(res.graph.node_count() == res.cluster_of_node.size());
        for (NodeId v = 0; v < res.graph.node_count(); ++v)
            REQUIRE(res.graph.token_of(v) == spec.token_base + v);
    }
}

TEST_CASE("planted cycles exist and are discoverable", "[synth]") {
    auto spec = small_spec();
    spec.planted = {{4, Attachment::anti_central},
                    {3, Attachment::central},
                    {5, Attachment::random}};
    const auto res = generate(spec);
    REQUIRE(res.planted.size() == 3);

    // edge-level existence, plus token bookkeeping
    for (const auto& pc : res.planted) {
        for (std::size_t i = 0; i < pc.nodes.size(); ++i) {
            const NodeId u = pc.nodes[i];
            const NodeId v = pc.nodes[(i + 1) % pc.nodes.size()];
            CHECK(res.graph.has_edge(u, v));
            CHECK(res.community_of_node[u] == pc.community);
        }
        for (std::size_t i = 0; i < pc.nodes.size(); ++i)
            CHECK(pc.tokens[i] == spec.token_base + pc.nodes[i]);
    }
    // round-robin community assignment
    CHECK(res.planted[0].community == 0);
    CHECK(res.planted[1].community == 1);
    CHECK(res.planted[2].community == 0);

    // the detector working off ground-truth labels finds every planted set
    const auto part =
        CommunityPartition::from_assignment(res.community_of_node);
    const auto cycles = detect_cycles(res.graph, part, 3, 6);
    for (const auto& pc : res.planted) {
        std::vector<NodeId> want = pc.nodes;
        const auto smallest =
            std::min_element(want.begin(), want.end()) - want.begin();
        std::rotate(want.begin(), want.begin() + smallest, want.end());
        bool found = false;
        for (const auto& cy : cycles) found = found || cy.nodes == want;
        CHECK(found);
    }
}

TEST_CASE("anti-central planting spreads across clusters at low degree",
          "[synth]") {
    auto spec = small_spec();
    spec.planted = {{4, Attachment::anti_central}};
    const auto res = generate(spec);
    const auto& pc = res.planted[0];

    std::set<std::uint32_t> clusters;
    for (const NodeId v : pc.nodes) clusters.insert(res.cluster_of_node[v]);
    CHECK(clusters.size() == 4); // one per cluster for length <= cluster count

    // chosen nodes sit at or below the community's median total degree
    auto total_degree = [&](NodeId v) {
        return res.graph.out_degree(v) + res.graph.in_degree(v);
    };
    std::vector<std::size_t> degrees;
    for (NodeId v = 0; v < res.graph.node_count(); ++v)
        if (res.community_of_node[v] == pc.community)
            degrees.push_back(total_degree(v));
    std::sort(degrees.begin(), degrees.end());
    const auto median = degrees[degrees.size() / 2];
    for (const NodeId v : pc.nodes)
        CHECK(total_degree(v) <= median + 2); // +2 for the cycle's own edges
}

TEST_CASE("central planting prefers hubs", "[synth]") {
    auto spec = small_spec();
    spec.planted = {{4, Attachment::central}};
    const auto res = generate(spec);
    const auto& pc = res.planted[0];

    auto total_degree = [&](NodeId v) {
        return res.graph.out_degree(v) + res.graph.in_degree(v);
    };
    double community_sum = 0.0;
    std::size_t community_n = 0;
    for (NodeId v = 0; v < res.graph.node_count(); ++v)
        if (res.community_of_node[v] == pc.community) {
            community_sum += static_cast<double>(total_degree(v));
            ++community_n;
        }
    double chosen_sum = 0.0;
    for (const NodeId v : pc.nodes)
        chosen_sum += static_cast<double>(total_degree(v));
    CHECK(chosen_sum / 4.0 > community_sum / static_cast<double>(community_n));
}

TEST_CASE("infeasible plans are data errors", "[synth]") {
    SynthSpec spec;
    spec.community_count = 1;
    spec.community_size_range = {3, 3};
    spec.intra_density = 0.3;
    spec.inter_edge_count = 0;
    spec.seed = 5;

    spec.planted = {{4, Attachment::random}};
    CHECK_THROWS_AS(generate(spec), DataError); // longer than the community

    spec.planted = {{3, Attachment::random}, {3, Attachment::random}};
    CHECK_THROWS_AS(generate(spec), DataError); // no free nodes left

    spec.planted = {{3, Attachment::anti_central},
                    {3, Attachment::anti_central}};
    CHECK_THROWS_AS(generate(spec), DataError);
}

TEST_CASE("spec validation rejects nonsense", "[synth]") {
    SynthSpec spec;
    spec.community_count = 0;
    CHECK_THROWS_AS(generate(spec), UsageError);

    spec = SynthSpec{};
    spec.intra_density = 0.0;
    CHECK_THROWS_AS(generate(spec), UsageError);
    spec.intra_density = 1.0;
    CHECK_THROWS_AS(generate(spec), UsageError);

    spec = SynthSpec{};
    spec.community_size_range = {2, 10};
    CHECK_THROWS_AS(generate(spec), UsageError);
    spec.community_size_range = {10, 4};
    CHECK_THROWS_AS(generate(spec), UsageError);

    spec = SynthSpec{};
    spec.planted = {{2, Attachment::random}};
    CHECK_THROWS_AS(generate(spec), UsageError);
    spec.planted = {{7, Attachment::random}};
    CHECK_THROWS_AS(generate(spec), UsageError);

    spec = SynthSpec{};
    spec.cross_cluster_divisor = 0.5;
    CHECK_THROWS_AS(generate(spec), UsageError);
}

TEST_CASE("no planted cycles means none reported", "[synth]") {
    auto spec = small_spec();
    const auto res = generate(spec);
    CHECK(res.planted.empty());
    CHECK(res.graph.node_count() >= 80);
}

TEST_CASE("attachment names round-trip", "[synth]") {
    for (const auto a : {Attachment::anti_central, Attachment::central,
                         Attachment::random})
        CHECK(attachment_from_string(to_string(a)) == a);
    CHECK_THROWS_AS(attachment_from_string("hubby"), UsageError);
}

TEST_CASE("generated edges write and parse back unchanged", "[synth]") {
    auto spec = small_spec();
    spec.planted = {{3, Attachment::random}};
    const auto res = generate(spec);

    std::stringstream buf;
    write_edge_list(buf, res.edges);
    const auto parsed = parse_edge_list(buf);
    REQUIRE(parsed.edges.size() == res.edges.size());
    for (std::size_t i = 0; i < res.edges.size(); ++i)
        CHECK(edges_equal(parsed.edges[i], res.edges[i]));
}
