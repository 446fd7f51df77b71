#pragma once

#include <cstdint>
#include <list>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "anticent/common.hpp"
#include "anticent/graph.hpp"
#include "anticent/parallel.hpp"
#include "anticent/rng.hpp"

namespace anticent {

struct WalkParams {
    double p = 1.0;            // return parameter
    double q = 1.0;            // in-out parameter
    std::uint32_t walk_length = 80;    // nodes per walk
    std::uint32_t walks_per_node = 10;
    std::uint64_t seed = 0;
    std::size_t alias_cache_budget = 1 << 16; // cached (prev,current) tables

    void validate() const {
        if (!(p > 0.0) || !(q > 0.0))
            throw UsageError("walk params: p and q must be positive");
        if (walk_length < 1)
            throw UsageError("walk params: walk_length must be >= 1");
        if (walks_per_node < 1)
            throw UsageError("walk params: walks_per_node must be >= 1");
    }
};

// Walker bias for a candidate next node x after traversing (prev -> current):
// 1/p when x returns to prev, 1 when prev points at x, 1/q otherwise.
inline double step_bias(const TxGraph& g, NodeId prev, NodeId x,
                        const WalkParams& params) {
    if (x == prev) return 1.0 / params.p;
    if (g.has_edge(prev, x)) return 1.0;
    return 1.0 / params.q;
}

// Exact next-step distribution over the out-neighbors of `current`, in
// CSR (ascending target) order. Empty when current has no out-edges.
// Without a previous node (first step) the draw is weight-proportional.
inline std::vector<std::pair<NodeId, double>>
transition_probs(const TxGraph& g, std::optional<NodeId> prev,
                 NodeId current, const WalkParams& params) {
    params.validate();
    const auto nb = g.out_neighbors(current);
    const auto w = g.out_weights(current);
    std::vector<std::pair<NodeId, double>> probs;
    probs.reserve(nb.size());
    double z = 0.0;
    for (std::size_t i = 0; i < nb.size(); ++i) {
        const double unnorm =
            prev ? w[i] * step_bias(g, *prev, nb[i], params) : w[i];
        probs.emplace_back(nb[i], unnorm);
        z += unnorm;
    }
    for (auto& pr : probs) pr.second /= z;
    return probs;
}

// Walker's alias table; one uniform draw per sample.
class AliasTable {
public:
    explicit AliasTable(const std::vector<double>& weights) {
        const std::size_t k = weights.size();
        prob_.resize(k);
        alias_.resize(k);
        double sum = 0.0;
        for (const double w : weights) sum += w;
        std::vector<double> scaled(k);
        for (std::size_t i = 0; i < k; ++i)
            scaled[i] = weights[i] * static_cast<double>(k) / sum;

        std::vector<std::uint32_t> small, large;
        for (std::size_t i = 0; i < k; ++i)
            (scaled[i] < 1.0 ? small : large)
                .push_back(static_cast<std::uint32_t>(i));
        while (!small.empty() && !large.empty()) {
            const std::uint32_t s = small.back();
            const std::uint32_t l = large.back();
            small.pop_back();
            prob_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] -= 1.0 - scaled[s];
            if (scaled[l] < 1.0) {
                large.pop_back();
                small.push_back(l);
            }
        }
        for (const std::uint32_t i : large) {
            prob_[i] = 1.0;
            alias_[i] = i;
        }
        for (const std::uint32_t i : small) { // fp leftovers
            prob_[i] = 1.0;
            alias_[i] = i;
        }
    }

    std::uint32_t sample(Rng& rng) const {
        const double pos = rng.next_double() * static_cast<double>(prob_.size());
        std::uint32_t i = static_cast<std::uint32_t>(pos);
        if (i >= prob_.size()) i = static_cast<std::uint32_t>(prob_.size() - 1);
        const double frac = pos - static_cast<double>(i);
        return frac < prob_[i] ? i : alias_[i];
    }

    std::size_t size() const { return prob_.size(); }

private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

// Second-order sampler with a lazy LRU of per-(prev,current) alias tables.
// Every draw goes through an alias table built the same way whether or not
// it was cached, so cache hits cannot change the sampled walk.
class SecondOrderSampler {
public:
    SecondOrderSampler(const TxGraph& g, const WalkParams& params)
        : g_(g), params_(params), budget_(params.alias_cache_budget) {}

    // next node after traversing (prev -> current); kInvalidNode at dead ends
    NodeId step(NodeId prev, NodeId current, Rng& rng) {
        const auto nb = g_.out_neighbors(current);
        if (nb.empty()) return kInvalidNode;
        const AliasTable& table = lookup(prev, current);
        return nb[table.sample(rng)];
    }

    NodeId first_step(NodeId start, Rng& rng) {
        const auto nb = g_.out_neighbors(start);
        if (nb.empty()) return kInvalidNode;
        const auto w = g_.out_weights(start);
        const AliasTable table(std::vector<double>(w.begin(), w.end()));
        return nb[table.sample(rng)];
    }

private:
    const AliasTable& lookup(NodeId prev, NodeId current) {
        const std::uint64_t key =
            (static_cast<std::uint64_t>(prev) << 32) | current;
        const auto it = index_.find(key);
        if (it != index_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second);
            return it->second->second;
        }
        const auto nb = g_.out_neighbors(current);
        const auto w = g_.out_weights(current);
        std::vector<double> biased(nb.size());
        for (std::size_t i = 0; i < nb.size(); ++i)
            biased[i] = w[i] * step_bias(g_, prev, nb[i], params_);
        lru_.emplace_front(key, AliasTable(biased));
        index_[key] = lru_.begin();
        // keep the entry we are about to hand out even when the budget is 0
        while (lru_.size() > budget_ && lru_.size() > 1) {
            index_.erase(lru_.back().first);
            lru_.pop_back();
        }
        return lru_.front().second;
    }

    const TxGraph& g_;
    WalkParams params_;
    std::size_t budget_;
    std::list<std::pair<std::uint64_t, AliasTable>> lru_;
    std::unordered_map<std::uint64_t,
                       std::list<std::pair<std::uint64_t, AliasTable>>::iterator>
        index_;
};

// walks_per_node walks from every node, node-major order. Each walk draws
// from its own counter-derived RNG stream, so output is independent of the
// thread count.
inline std::vector<std::vector<NodeId>>
generate_walks(const TxGraph& g, const WalkParams& params,
               unsigned threads = 1) {
    params.validate();
    const std::size_t n = g.node_count();
    std::vector<std::vector<NodeId>> walks(n * params.walks_per_node);

    parallel_for(n, threads, [&](std::size_t ui) {
        const NodeId u = static_cast<NodeId>(ui);
        SecondOrderSampler sampler(g, params);
        for (std::uint32_t w = 0; w < params.walks_per_node; ++w) {
            Rng rng(derive_seed(params.seed, seed_domain::walks, u, w));
            auto& walk = walks[ui * params.walks_per_node + w];
            walk.reserve(params.walk_length);
            walk.push_back(u);
            if (params.walk_length == 1) continue;
            NodeId cur = sampler.first_step(u, rng);
            if (cur == kInvalidNode) continue;
            walk.push_back(cur);
            NodeId prev = u;
            while (walk.size() < params.walk_length) {
                const NodeId nxt = sampler.step(prev, cur, rng);
                if (nxt == kInvalidNode) break;
                walk.push_back(nxt);
                prev = cur;
                cur = nxt;
            }
        }
    });
    return walks;
}

} // namespace anticent
