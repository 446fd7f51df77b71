#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <vector>

#include "anticent/common.hpp"
#include "anticent/community.hpp"
#include "anticent/graph.hpp"
#include "anticent/parallel.hpp"

namespace anticent {

// A simple directed cycle, stored in canonical rotation: the smallest node
// index first, then following the edge direction. Length = node count =
// edge count.
struct Cycle {
    std::vector<NodeId> nodes;
    std::uint32_t community = 0;

    std::size_t length() const { return nodes.size(); }

    bool operator==(const Cycle& o) const { return nodes == o.nodes; }
};

struct DirectedPath {
    std::vector<NodeId> nodes; // length() edges, length()+1 nodes
    std::uint32_t community = 0;

    std::size_t length() const { return nodes.size() - 1; }
};

namespace detail {

// Bounded DFS over one community subgraph. Starting each search from the
// smallest remaining node and never descending to smaller ids yields every
// cycle exactly once, already in canonical rotation.
template <typename Sink>
void enumerate_cycles_local(const TxGraph& sub, std::size_t min_len,
                            std::size_t max_len, Sink&& sink) {
    const std::size_t n = sub.node_count();
    std::vector<char> on_path(n, 0);
    std::vector<NodeId> path;
    path.reserve(max_len);

    struct Frame {
        NodeId node;
        std::size_t next; // cursor into out_neighbors
    };
    std::vector<Frame> stack;
    stack.reserve(max_len + 1);

    for (NodeId s = 0; s < n; ++s) {
        path.assign(1, s);
        on_path[s] = 1;
        stack.assign(1, {s, 0});
        while (!stack.empty()) {
            Frame& f = stack.back();
            const auto nb = sub.out_neighbors(f.node);
            if (f.next >= nb.size()) {
                on_path[f.node] = 0;
                path.pop_back();
                stack.pop_back();
                continue;
            }
            const NodeId x = nb[f.next++];
            if (x == s) {
                if (path.size() >= min_len) sink(path);
                continue;
            }
            if (x < s || on_path[x] || path.size() >= max_len) continue;
            on_path[x] = 1;
            path.push_back(x);
            stack.push_back({x, 0});
        }
    }
}

template <typename Sink> // sink(path) -> bool, false stops enumeration
bool enumerate_paths_local(const TxGraph& sub, std::size_t min_len,
                           std::size_t max_len, Sink&& sink) {
    const std::size_t n = sub.node_count();
    std::vector<char> on_path(n, 0);
    std::vector<NodeId> path;

    struct Frame {
        NodeId node;
        std::size_t next;
    };
    std::vector<Frame> stack;

    for (NodeId s = 0; s < n; ++s) {
        path.assign(1, s);
        on_path[s] = 1;
        stack.assign(1, {s, 0});
        while (!stack.empty()) {
            Frame& f = stack.back();
            const auto nb = sub.out_neighbors(f.node);
            if (f.next >= nb.size()) {
                on_path[f.node] = 0;
                path.pop_back();
                stack.pop_back();
                continue;
            }
            const NodeId x = nb[f.next++];
            if (on_path[x]) continue;
            on_path[x] = 1;
            path.push_back(x);
            const std::size_t edges = path.size() - 1;
            if (edges >= min_len) {
                if (!sink(path)) return false;
            }
            if (edges < max_len) {
                stack.push_back({x, 0});
            } else {
                on_path[x] = 0;
                path.pop_back();
            }
        }
    }
    return true;
}

} // namespace detail

// All simple directed cycles with min_len <= length <= max_len whose nodes
// lie entirely within one community. Output is sorted by node sequence, so
// it is independent of community iteration order and thread count.
inline std::vector<Cycle> detect_cycles(const TxGraph& g,
                                        const CommunityPartition& p,
                                        std::size_t min_len = 3,
                                        std::size_t max_len = 6,
                                        unsigned threads = 1) {
    if (min_len < 2 || min_len > max_len)
        throw UsageError("detect_cycles: need 2 <= min_len <= max_len");

    std::vector<std::vector<Cycle>> per_comm(p.community_count());
    parallel_for(p.community_count(), threads, [&](std::size_t c) {
        const auto& members = p.communities[c];
        if (members.size() < min_len) return;
        const auto induced = induce_subgraph_indexed(
            g, std::span<const NodeId>(members.data(), members.size()));
        detail::enumerate_cycles_local(
            induced.graph, min_len, max_len,
            [&](const std::vector<NodeId>& local_path) {
                Cycle cy;
                cy.community = static_cast<std::uint32_t>(c);
                cy.nodes.reserve(local_path.size());
                for (const NodeId l : local_path)
                    cy.nodes.push_back(induced.parent[l]);
                per_comm[c].push_back(std::move(cy));
            });
    });

    std::vector<Cycle> all;
    for (auto& v : per_comm)
        for (auto& cy : v) all.push_back(std::move(cy));
    std::sort(all.begin(), all.end(), [](const Cycle& a, const Cycle& b) {
        return a.nodes < b.nodes;
    });
    return all;
}

// Checks the structural invariants of one cycle against the graph and
// partition it came from.
inline bool validate_cycle(const TxGraph& g, const CommunityPartition& p,
                           const Cycle& cy) {
    if (cy.nodes.size() < 2) return false;
    std::vector<NodeId> sorted = cy.nodes;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        return false; // repeated node
    if (cy.nodes.front() != sorted.front()) return false; // rotation form
    for (std::size_t i = 0; i < cy.nodes.size(); ++i) {
        const NodeId u = cy.nodes[i];
        const NodeId v = cy.nodes[(i + 1) % cy.nodes.size()];
        if (!g.has_edge(u, v)) return false;
        if (p.community_of(u) != cy.community) return false;
    }
    return true;
}

struct PathEnumResult {
    std::vector<DirectedPath> paths;
    bool truncated = false;
    std::size_t path_count = 0;        // equals paths.size() unless truncated
    std::vector<NodeId> path_nodes;    // distinct nodes on at least one path
    std::vector<NodeId> overlap_nodes; // nodes on a path and on a cycle
};

// Simple directed paths with edge count in [min_len, max_len], restricted to
// communities that contain at least one cycle. Enumeration stops at `limit`
// recorded paths and reports the truncation.
inline PathEnumResult detect_paths(const TxGraph& g,
                                   const CommunityPartition& p,
                                   const std::vector<Cycle>& cycles,
                                   std::size_t min_len = 4,
                                   std::size_t max_len = 7,
                                   std::size_t limit = 10'000'000) {
    if (min_len < 1 || min_len > max_len)
        throw UsageError("detect_paths: need 1 <= min_len <= max_len");

    std::vector<char> eligible(p.community_count(), 0);
    std::vector<char> on_cycle(g.node_count(), 0);
    for (const auto& cy : cycles) {
        eligible[cy.community] = 1;
        for (const NodeId u : cy.nodes) on_cycle[u] = 1;
    }

    PathEnumResult result;
    std::vector<char> on_any_path(g.node_count(), 0);
    for (std::size_t c = 0; c < p.community_count(); ++c) {
        if (!eligible[c]) continue;
        const auto& members = p.communities[c];
        const auto induced = induce_subgraph_indexed(
            g, std::span<const NodeId>(members.data(), members.size()));
        const bool completed = detail::enumerate_paths_local(
            induced.graph, min_len, max_len,
            [&](const std::vector<NodeId>& local_path) {
                if (result.path_count >= limit) {
                    result.truncated = true;
                    return false;
                }
                DirectedPath dp;
                dp.community = static_cast<std::uint32_t>(c);
                dp.nodes.reserve(local_path.size());
                for (const NodeId l : local_path) {
                    const NodeId u = induced.parent[l];
                    dp.nodes.push_back(u);
                    on_any_path[u] = 1;
                }
                result.paths.push_back(std::move(dp));
                ++result.path_count;
                return true;
            });
        if (!completed) break;
    }

    for (NodeId u = 0; u < g.node_count(); ++u) {
        if (!on_any_path[u]) continue;
        result.path_nodes.push_back(u);
        if (on_cycle[u]) result.overlap_nodes.push_back(u);
    }
    return result;
}

} // namespace anticent
