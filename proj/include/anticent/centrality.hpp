#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "anticent/common.hpp"
#include "anticent/graph.hpp"

namespace anticent {

// Brandes' algorithm, directed and unweighted. Endpoints are excluded and
// pair dependencies are not halved, matching the directed convention.
inline std::vector<double> betweenness(const TxGraph& g) {
    const std::size_t n = g.node_count();
    std::vector<double> cb(n, 0.0);
    if (n == 0) return cb;

    std::vector<std::int64_t> dist(n);
    std::vector<double> sigma(n), delta(n);
    std::vector<std::vector<NodeId>> preds(n);
    std::vector<NodeId> order;
    order.reserve(n);
    std::deque<NodeId> queue;

    for (NodeId s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        std::fill(sigma.begin(), sigma.end(), 0.0);
        std::fill(delta.begin(), delta.end(), 0.0);
        for (auto& p : preds) p.clear();
        order.clear();

        dist[s] = 0;
        sigma[s] = 1.0;
        queue.push_back(s);
        while (!queue.empty()) {
            const NodeId v = queue.front();
            queue.pop_front();
            order.push_back(v);
            for (const NodeId w : g.out_neighbors(v)) {
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if (dist[w] == dist[v] + 1) {
                    sigma[w] += sigma[v];
                    preds[w].push_back(v);
                }
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const NodeId w = *it;
            for (const NodeId v : preds[w])
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            if (w != s) cb[w] += delta[w];
        }
    }
    return cb;
}

// (in-degree + out-degree) / |V|
inline std::vector<double> degree_centrality(const TxGraph& g) {
    const std::size_t n = g.node_count();
    std::vector<double> dc(n, 0.0);
    if (n == 0) return dc;
    for (NodeId v = 0; v < n; ++v)
        dc[v] = static_cast<double>(g.in_degree(v) + g.out_degree(v)) /
                static_cast<double>(n);
    return dc;
}

// Inverse of the total hop distance from every node that can reach v;
// zero when nothing reaches v.
inline std::vector<double> closeness(const TxGraph& g) {
    const std::size_t n = g.node_count();
    std::vector<double> cl(n, 0.0);
    std::vector<std::int64_t> dist(n);
    std::deque<NodeId> queue;
    for (NodeId v = 0; v < n; ++v) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[v] = 0;
        queue.push_back(v);
        std::int64_t total = 0;
        while (!queue.empty()) {
            const NodeId x = queue.front();
            queue.pop_front();
            total += dist[x];
            for (const NodeId u : g.in_neighbors(x)) {
                if (dist[u] < 0) {
                    dist[u] = dist[x] + 1;
                    queue.push_back(u);
                }
            }
        }
        cl[v] = total > 0 ? 1.0 / static_cast<double>(total) : 0.0;
    }
    return cl;
}

// Sum over out-neighbours w of (indeg(w) - 1): how contested v's
// downstream nodes are by other senders.
inline std::vector<double> con_score(const TxGraph& g) {
    const std::size_t n = g.node_count();
    std::vector<double> con(n, 0.0);
    for (NodeId v = 0; v < n; ++v) {
        double s = 0.0;
        for (const NodeId w : g.out_neighbors(v))
            s += static_cast<double>(g.in_degree(w)) - 1.0;
        con[v] = s;
    }
    return con;
}

struct PageRankParams {
    double damping = 0.85;
    double tolerance = 1e-12; // L1 residual
    std::uint32_t max_iterations = 500;
};

// Weighted power iteration. Dangling mass (no out-edges, or zero total
// out-weight) is spread uniformly.
inline std::vector<double> pagerank(const TxGraph& g,
                                    const PageRankParams& params = {}) {
    const std::size_t n = g.node_count();
    if (n == 0) return {};
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> rank(n, inv_n), next(n);
    std::vector<double> out_weight(n, 0.0);
    for (NodeId v = 0; v < n; ++v) {
        const auto ws = g.out_weights(v);
        double s = 0.0;
        for (const double w : ws) s += w;
        out_weight[v] = s;
    }

    for (std::uint32_t iter = 0; iter < params.max_iterations; ++iter) {
        double dangling = 0.0;
        for (NodeId v = 0; v < n; ++v)
            if (out_weight[v] <= 0.0) dangling += rank[v];
        std::fill(next.begin(), next.end(),
                  (1.0 - params.damping) * inv_n +
                      params.damping * dangling * inv_n);
        for (NodeId v = 0; v < n; ++v) {
            if (out_weight[v] <= 0.0) continue;
            const auto nbrs = g.out_neighbors(v);
            const auto ws = g.out_weights(v);
            const double share = params.damping * rank[v] / out_weight[v];
            for (std::size_t i = 0; i < nbrs.size(); ++i)
                next[nbrs[i]] += share * ws[i];
        }
        double residual = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            residual += std::abs(next[i] - rank[i]);
        rank.swap(next);
        if (residual < params.tolerance) return rank;
    }

    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) residual += std::abs(next[i] - rank[i]);
    throw InternalError("pagerank did not converge: residual " +
                        std::to_string(residual) + " after " +
                        std::to_string(params.max_iterations) + " iterations");
}

} // namespace anticent
