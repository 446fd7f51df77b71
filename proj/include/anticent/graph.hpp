#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "anticent/common.hpp"

namespace anticent {

// One cleaned input row: a directed account pair with its aggregate volume.
struct TransactionEdge {
    Token source = 0;
    Token target = 0;
    std::uint64_t tx_count = 1;
    double total_amount = 0.0;
    int start_year = 0;
    int end_year = 0;

    double average_amount() const {
        return total_amount / static_cast<double>(tx_count);
    }
};

// Weighted directed graph in CSR form, immutable after construction.
// Account tokens are remapped to dense indices [0, n); the token table keeps
// the original ids for report emission. Out-neighbor lists are sorted by
// target so edge lookup is a binary search.
class TxGraph {
public:
    TxGraph() { out_offsets_.push_back(0); in_offsets_.push_back(0); }

    static TxGraph from_edges(const std::vector<TransactionEdge>& edges) {
        std::vector<Token> tokens;
        tokens.reserve(edges.size() * 2);
        for (const auto& e : edges) {
            tokens.push_back(e.source);
            tokens.push_back(e.target);
        }
        std::sort(tokens.begin(), tokens.end());
        tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());

        TxGraph g;
        g.init_tokens(std::move(tokens));
        std::vector<RawEdge> raw;
        raw.reserve(edges.size());
        for (const auto& e : edges) {
            if (e.source == e.target)
                throw DataError("self-loop in edge list: account " +
                                std::to_string(e.source));
            raw.push_back({*g.index_of(e.source), *g.index_of(e.target),
                           e.total_amount, e.tx_count});
        }
        g.build_adjacency(std::move(raw));
        return g;
    }

    std::size_t node_count() const { return tokens_.size(); }
    std::size_t edge_count() const { return out_targets_.size(); }

    Token token_of(NodeId u) const { return tokens_[u]; }
    const std::vector<Token>& tokens() const { return tokens_; }

    std::optional<NodeId> index_of(Token t) const {
        const auto it = std::lower_bound(tokens_.begin(), tokens_.end(), t);
        if (it == tokens_.end() || *it != t) return std::nullopt;
        return static_cast<NodeId>(it - tokens_.begin());
    }

    std::span<const NodeId> out_neighbors(NodeId u) const {
        return {out_targets_.data() + out_offsets_[u],
                out_targets_.data() + out_offsets_[u + 1]};
    }
    std::span<const double> out_weights(NodeId u) const {
        return {out_weights_.data() + out_offsets_[u],
                out_weights_.data() + out_offsets_[u + 1]};
    }
    std::span<const std::uint64_t> out_tx_counts(NodeId u) const {
        return {out_tx_counts_.data() + out_offsets_[u],
                out_tx_counts_.data() + out_offsets_[u + 1]};
    }
    std::span<const NodeId> in_neighbors(NodeId u) const {
        return {in_sources_.data() + in_offsets_[u],
                in_sources_.data() + in_offsets_[u + 1]};
    }

    std::uint32_t out_degree(NodeId u) const {
        return static_cast<std::uint32_t>(out_offsets_[u + 1] -
                                          out_offsets_[u]);
    }
    std::uint32_t in_degree(NodeId u) const {
        return static_cast<std::uint32_t>(in_offsets_[u + 1] -
                                          in_offsets_[u]);
    }

    bool has_edge(NodeId u, NodeId v) const {
        const auto nb = out_neighbors(u);
        return std::binary_search(nb.begin(), nb.end(), v);
    }

    // 0 when the edge is absent.
    double edge_weight(NodeId u, NodeId v) const {
        const auto nb = out_neighbors(u);
        const auto it = std::lower_bound(nb.begin(), nb.end(), v);
        if (it == nb.end() || *it != v) return 0.0;
        return out_weights_[out_offsets_[u] + (it - nb.begin())];
    }

    template <typename Fn> // fn(source, target, weight, tx_count)
    void for_each_edge(Fn&& fn) const {
        for (NodeId u = 0; u < node_count(); ++u) {
            for (std::size_t i = out_offsets_[u]; i < out_offsets_[u + 1];
                 ++i)
                fn(u, out_targets_[i], out_weights_[i], out_tx_counts_[i]);
        }
    }

private:
    struct RawEdge {
        NodeId src, dst;
        double weight;
        std::uint64_t tx_count;
    };

    void init_tokens(std::vector<Token> tokens) {
        tokens_ = std::move(tokens);
    }

    void build_adjacency(std::vector<RawEdge> raw) {
        const std::size_t n = tokens_.size();
        std::sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) {
            return a.src != b.src ? a.src < b.src : a.dst < b.dst;
        });
        for (std::size_t i = 1; i < raw.size(); ++i)
            if (raw[i].src == raw[i - 1].src && raw[i].dst == raw[i - 1].dst)
                throw DataError(
                    "duplicate directed account pair: " +
                    std::to_string(tokens_[raw[i].src]) + " -> " +
                    std::to_string(tokens_[raw[i].dst]));

        out_offsets_.assign(n + 1, 0);
        for (const auto& e : raw) ++out_offsets_[e.src + 1];
        for (std::size_t u = 0; u < n; ++u)
            out_offsets_[u + 1] += out_offsets_[u];
        out_targets_.resize(raw.size());
        out_weights_.resize(raw.size());
        out_tx_counts_.resize(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) {
            out_targets_[i] = raw[i].dst;
            out_weights_[i] = raw[i].weight;
            out_tx_counts_[i] = raw[i].tx_count;
        }

        in_offsets_.assign(n + 1, 0);
        for (const auto& e : raw) ++in_offsets_[e.dst + 1];
        for (std::size_t u = 0; u < n; ++u)
            in_offsets_[u + 1] += in_offsets_[u];
        in_sources_.resize(raw.size());
        std::vector<std::size_t> cursor(in_offsets_.begin(),
                                        in_offsets_.end() - 1);
        for (const auto& e : raw) in_sources_[cursor[e.dst]++] = e.src;
        for (std::size_t u = 0; u < n; ++u)
            std::sort(in_sources_.begin() + in_offsets_[u],
                      in_sources_.begin() + in_offsets_[u + 1]);
    }

    friend struct GraphAssembler;

    std::vector<Token> tokens_;
    std::vector<std::size_t> out_offsets_;
    std::vector<NodeId> out_targets_;
    std::vector<double> out_weights_;
    std::vector<std::uint64_t> out_tx_counts_;
    std::vector<std::size_t> in_offsets_;
    std::vector<NodeId> in_sources_;
};

// Internal hook for constructing graphs whose node set is not implied by the
// edge list (induced subgraphs, synthetic generators).
struct GraphAssembler {
    std::vector<Token> tokens; // must be sorted and unique
    struct E {
        NodeId src, dst;
        double weight;
        std::uint64_t tx_count;
    };
    std::vector<E> edges;

    TxGraph assemble() && {
        TxGraph g;
        g.init_tokens(std::move(tokens));
        std::vector<TxGraph::RawEdge> raw;
        raw.reserve(edges.size());
        for (const auto& e : edges)
            raw.push_back({e.src, e.dst, e.weight, e.tx_count});
        g.build_adjacency(std::move(raw));
        return g;
    }
};

inline TxGraph build_graph(const std::vector<TransactionEdge>& edges) {
    return TxGraph::from_edges(edges);
}

// Induced subgraph plus the mapping from local indices back to the parent's.
struct InducedGraph {
    TxGraph graph;
    std::vector<NodeId> parent; // parent[local] = index in the parent graph
};

inline InducedGraph induce_subgraph_indexed(const TxGraph& g,
                                            std::span<const NodeId> nodes) {
    const std::size_t n = g.node_count();
    std::vector<NodeId> sorted(nodes.begin(), nodes.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (const NodeId u : sorted)
        if (u >= n)
            throw DataError("induce_subgraph: unknown node index " +
                            std::to_string(u));

    // Local ids follow token order, which equals parent index order because
    // the parent's token table is sorted.
    GraphAssembler asmb;
    asmb.tokens.reserve(sorted.size());
    for (const NodeId u : sorted) asmb.tokens.push_back(g.token_of(u));

    std::vector<NodeId> local_of(n, kInvalidNode);
    for (std::size_t i = 0; i < sorted.size(); ++i)
        local_of[sorted[i]] = static_cast<NodeId>(i);

    for (const NodeId u : sorted) {
        const auto nb = g.out_neighbors(u);
        const auto w = g.out_weights(u);
        const auto c = g.out_tx_counts(u);
        for (std::size_t i = 0; i < nb.size(); ++i) {
            if (local_of[nb[i]] == kInvalidNode) continue;
            asmb.edges.push_back({local_of[u], local_of[nb[i]], w[i], c[i]});
        }
    }
    return {std::move(asmb).assemble(), std::move(sorted)};
}

inline TxGraph induce_subgraph(const TxGraph& g,
                               std::span<const NodeId> nodes) {
    return induce_subgraph_indexed(g, nodes).graph;
}

} // namespace anticent
