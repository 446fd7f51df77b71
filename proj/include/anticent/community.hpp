#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "anticent/common.hpp"
#include "anticent/graph.hpp"
#include "anticent/rng.hpp"

namespace anticent {

struct CommunityPartition {
    std::vector<std::uint32_t> assignment;   // node index -> community id
    std::vector<std::vector<NodeId>> communities; // id -> sorted node list

    std::size_t community_count() const { return communities.size(); }
    std::uint32_t community_of(NodeId u) const { return assignment[u]; }

    // Rebuilds the node lists from the assignment and renumbers communities
    // so that ids are ordered by their smallest member node.
    static CommunityPartition
    from_assignment(std::vector<std::uint32_t> raw) {
        const std::size_t n = raw.size();
        std::vector<std::uint32_t> id_of_raw;
        {
            std::uint32_t max_raw = 0;
            for (const auto c : raw) max_raw = std::max(max_raw, c);
            id_of_raw.assign(static_cast<std::size_t>(max_raw) + 1,
                             UINT32_MAX);
        }
        CommunityPartition p;
        p.assignment.resize(n);
        std::uint32_t next = 0;
        for (std::size_t u = 0; u < n; ++u) {
            auto& id = id_of_raw[raw[u]];
            if (id == UINT32_MAX) {
                id = next++;
                p.communities.emplace_back();
            }
            p.assignment[u] = id;
            p.communities[id].push_back(static_cast<NodeId>(u));
        }
        return p;
    }
};

namespace detail {

// Undirected weighted view used by the modularity optimizer. Edges are
// stored twice (once per endpoint); self-loops once, with strength counting
// them twice as usual.
struct UndirectedGraph {
    std::vector<std::size_t> offsets;
    std::vector<std::uint32_t> targets;
    std::vector<double> weights;
    std::vector<double> self_loop;
    std::vector<double> strength;
    double m2 = 0.0; // sum of all strengths

    std::size_t size() const { return self_loop.size(); }
};

inline UndirectedGraph project_undirected(const TxGraph& g) {
    struct P {
        std::uint32_t a, b;
        double w;
    };
    std::vector<P> pairs;
    pairs.reserve(g.edge_count());
    g.for_each_edge([&](NodeId u, NodeId v, double w, std::uint64_t) {
        pairs.push_back({std::min(u, v), std::max(u, v), w});
    });
    std::sort(pairs.begin(), pairs.end(), [](const P& x, const P& y) {
        return x.a != y.a ? x.a < y.a : x.b < y.b;
    });
    // merge the two directions of an account pair
    std::size_t out = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (out > 0 && pairs[out - 1].a == pairs[i].a &&
            pairs[out - 1].b == pairs[i].b)
            pairs[out - 1].w += pairs[i].w;
        else
            pairs[out++] = pairs[i];
    }
    pairs.resize(out);

    const std::size_t n = g.node_count();
    UndirectedGraph u;
    u.self_loop.assign(n, 0.0);
    u.offsets.assign(n + 1, 0);
    for (const auto& p : pairs) {
        ++u.offsets[p.a + 1];
        ++u.offsets[p.b + 1];
    }
    for (std::size_t i = 0; i < n; ++i) u.offsets[i + 1] += u.offsets[i];
    u.targets.resize(pairs.size() * 2);
    u.weights.resize(pairs.size() * 2);
    std::vector<std::size_t> cursor(u.offsets.begin(), u.offsets.end() - 1);
    for (const auto& p : pairs) {
        u.targets[cursor[p.a]] = p.b;
        u.weights[cursor[p.a]++] = p.w;
        u.targets[cursor[p.b]] = p.a;
        u.weights[cursor[p.b]++] = p.w;
    }
    u.strength.assign(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
        double s = 2.0 * u.self_loop[v];
        for (std::size_t i = u.offsets[v]; i < u.offsets[v + 1]; ++i)
            s += u.weights[i];
        u.strength[v] = s;
        u.m2 += s;
    }
    return u;
}

// One pass of greedy local moving. Returns true if any node changed
// community. Node visit order is seeded; all tie-breaks are first-max over a
// fixed iteration order, so the result is a pure function of (graph, seed).
inline bool louvain_one_level(const UndirectedGraph& g, double resolution,
                              std::vector<std::uint32_t>& comm, Rng& rng) {
    const std::size_t n = g.size();
    std::vector<double> tot(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) tot[comm[v]] += g.strength[v];

    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    std::vector<double> w_to(n, 0.0); // scratch: weight from v to community
    std::vector<std::uint32_t> touched;
    bool any_move = false;
    bool moved = true;
    while (moved) {
        moved = false;
        for (const std::uint32_t v : order) {
            const std::uint32_t old_c = comm[v];
            touched.clear();
            for (std::size_t i = g.offsets[v]; i < g.offsets[v + 1]; ++i) {
                const std::uint32_t c = comm[g.targets[i]];
                if (w_to[c] == 0.0 && g.targets[i] != v) touched.push_back(c);
                if (g.targets[i] != v) w_to[c] += g.weights[i];
            }

            tot[old_c] -= g.strength[v];
            double best_gain =
                w_to[old_c] -
                resolution * g.strength[v] * tot[old_c] / g.m2;
            std::uint32_t best_c = old_c;
            for (const std::uint32_t c : touched) {
                if (c == old_c) continue;
                const double gain =
                    w_to[c] - resolution * g.strength[v] * tot[c] / g.m2;
                if (gain > best_gain + 1e-12) {
                    best_gain = gain;
                    best_c = c;
                }
            }
            tot[best_c] += g.strength[v];
            if (best_c != old_c) {
                comm[v] = best_c;
                moved = true;
                any_move = true;
            }
            for (const std::uint32_t c : touched) w_to[c] = 0.0;
            w_to[old_c] = 0.0;
        }
    }
    return any_move;
}

inline UndirectedGraph louvain_aggregate(const UndirectedGraph& g,
                                         const std::vector<std::uint32_t>& comm,
                                         std::uint32_t n_comm) {
    UndirectedGraph a;
    a.self_loop.assign(n_comm, 0.0);
    struct P {
        std::uint32_t a, b;
        double w;
    };
    std::vector<P> pairs;
    for (std::size_t v = 0; v < g.size(); ++v) {
        a.self_loop[comm[v]] += g.self_loop[v];
        for (std::size_t i = g.offsets[v]; i < g.offsets[v + 1]; ++i) {
            const std::uint32_t t = g.targets[i];
            if (t < v) continue; // each undirected edge once
            if (comm[v] == comm[t])
                a.self_loop[comm[v]] += g.weights[i];
            else
                pairs.push_back({std::min(comm[v], comm[t]),
                                 std::max(comm[v], comm[t]), g.weights[i]});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const P& x, const P& y) {
        return x.a != y.a ? x.a < y.a : x.b < y.b;
    });
    std::size_t out = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (out > 0 && pairs[out - 1].a == pairs[i].a &&
            pairs[out - 1].b == pairs[i].b)
            pairs[out - 1].w += pairs[i].w;
        else
            pairs[out++] = pairs[i];
    }
    pairs.resize(out);

    a.offsets.assign(n_comm + 1, 0);
    for (const auto& p : pairs) {
        ++a.offsets[p.a + 1];
        ++a.offsets[p.b + 1];
    }
    for (std::size_t i = 0; i < n_comm; ++i) a.offsets[i + 1] += a.offsets[i];
    a.targets.resize(pairs.size() * 2);
    a.weights.resize(pairs.size() * 2);
    std::vector<std::size_t> cursor(a.offsets.begin(), a.offsets.end() - 1);
    for (const auto& p : pairs) {
        a.targets[cursor[p.a]] = p.b;
        a.weights[cursor[p.a]++] = p.w;
        a.targets[cursor[p.b]] = p.a;
        a.weights[cursor[p.b]++] = p.w;
    }
    a.strength.assign(n_comm, 0.0);
    for (std::size_t v = 0; v < n_comm; ++v) {
        double s = 2.0 * a.self_loop[v];
        for (std::size_t i = a.offsets[v]; i < a.offsets[v + 1]; ++i)
            s += a.weights[i];
        a.strength[v] = s;
        a.m2 += s;
    }
    return a;
}

} // namespace detail

// Modularity of an assignment on the undirected projection of g, with the
// usual resolution parameter. Exposed for diagnostics.
inline double modularity(const TxGraph& g,
                         const std::vector<std::uint32_t>& assignment,
                         double resolution = 1.0) {
    const auto u = detail::project_undirected(g);
    if (u.m2 == 0.0) return 0.0;
    std::uint32_t n_comm = 0;
    for (const auto c : assignment) n_comm = std::max(n_comm, c + 1);
    std::vector<double> in(n_comm, 0.0), tot(n_comm, 0.0);
    for (std::size_t v = 0; v < u.size(); ++v) {
        tot[assignment[v]] += u.strength[v];
        in[assignment[v]] += 2.0 * u.self_loop[v];
        for (std::size_t i = u.offsets[v]; i < u.offsets[v + 1]; ++i)
            if (assignment[u.targets[i]] == assignment[v])
                in[assignment[v]] += u.weights[i];
    }
    double q = 0.0;
    for (std::uint32_t c = 0; c < n_comm; ++c)
        q += in[c] / u.m2 -
             resolution * (tot[c] / u.m2) * (tot[c] / u.m2);
    return q;
}

// Multilevel greedy modularity on the undirected weighted projection
// (weights of the two directions of a pair are summed). Deterministic for a
// fixed (graph, resolution, seed).
inline CommunityPartition detect_communities(const TxGraph& g,
                                             double resolution = 1.0,
                                             std::uint64_t seed = 0) {
    if (resolution <= 0.0)
        throw UsageError("community resolution must be positive");
    const std::size_t n = g.node_count();
    std::vector<std::uint32_t> final_comm(n);
    std::iota(final_comm.begin(), final_comm.end(), 0);
    if (n == 0) return CommunityPartition::from_assignment({});

    auto u = detail::project_undirected(g);
    if (u.m2 == 0.0) // edgeless: every node is its own community
        return CommunityPartition::from_assignment(std::move(final_comm));

    Rng rng(derive_seed(seed, seed_domain::community));
    while (true) {
        std::vector<std::uint32_t> comm(u.size());
        std::iota(comm.begin(), comm.end(), 0);
        const bool moved =
            detail::louvain_one_level(u, resolution, comm, rng);
        if (!moved) break;

        // compact labels in order of first appearance
        std::vector<std::uint32_t> remap(u.size(), UINT32_MAX);
        std::uint32_t next = 0;
        for (auto& c : comm) {
            if (remap[c] == UINT32_MAX) remap[c] = next++;
            c = remap[c];
        }
        for (auto& c : final_comm) c = comm[c];
        if (next == u.size()) break;
        u = detail::louvain_aggregate(u, comm, next);
    }
    return CommunityPartition::from_assignment(std::move(final_comm));
}

} // namespace anticent
