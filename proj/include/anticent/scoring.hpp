#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anticent/common.hpp"
#include "anticent/community.hpp"
#include "anticent/cycles.hpp"
#include "anticent/embedding.hpp"
#include "anticent/graph.hpp"
#include "anticent/rng.hpp"

namespace anticent {

// A CNS outcome: a ratio, or one of two null states. Disregarded means the
// community was too small to sample against; infinite means the random
// baseline was zero while the subject scored positive (ranks above any
// finite ratio, but stays null for aggregation).
struct CnsValue {
    enum class State : std::uint8_t { finite, disregarded, infinite };
    State state = State::disregarded;
    double value = 0.0;

    static CnsValue of(double v) { return {State::finite, v}; }
    static CnsValue disregard() { return {State::disregarded, 0.0}; }
    static CnsValue inf() { return {State::infinite, 0.0}; }

    bool is_finite() const { return state == State::finite; }
    bool is_null() const { return state != State::finite; }
    bool is_infinite() const { return state == State::infinite; }
    bool is_disregarded() const { return state == State::disregarded; }

    bool exceeds(double threshold) const {
        return state == State::infinite ||
               (state == State::finite && value > threshold);
    }

    std::optional<double> as_optional() const {
        if (is_finite()) return value;
        return std::nullopt;
    }

    bool operator==(const CnsValue& o) const {
        return state == o.state && (state != State::finite || value == o.value);
    }
};

struct CnsResult {
    CnsValue cns;
    double r_subgraph = 0.0;
    double r_random = 0.0; // mean sample score; 0 when disregarded
    std::uint32_t sample_count = 0;
};

// Shared CNS sampling loop: draw m same-size sets from a pool of candidate
// slots and compare the subject's score against their mean. sample_score
// receives positions into the pool.
template <typename SampleScore>
CnsResult cns_from_pool(double r_subgraph, std::size_t subject_size,
                        std::size_t pool_size, std::size_t m, Rng& rng,
                        SampleScore&& sample_score) {
    if (m < 1) throw UsageError("cns: m >= 1");
    if (subject_size == 0) throw UsageError("cns: empty subject");
    CnsResult res;
    res.r_subgraph = r_subgraph;
    res.sample_count = static_cast<std::uint32_t>(m);
    if (pool_size < subject_size) {
        res.cns = CnsValue::disregard();
        return res;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const auto pick = rng.sample_without_replacement(
            static_cast<std::uint32_t>(pool_size),
            static_cast<std::uint32_t>(subject_size));
        total += sample_score(std::span<const std::uint32_t>(pick));
    }
    res.r_random = total / static_cast<double>(m);
    if (res.r_random > 0.0)
        res.cns = CnsValue::of(res.r_subgraph / res.r_random);
    else if (res.r_subgraph == 0.0)
        res.cns = CnsValue::of(1.0); // indistinguishable from random
    else
        res.cns = CnsValue::inf();
    return res;
}

namespace detail {

// Community id of the subject, throwing if it straddles communities.
inline std::uint32_t subject_community(const CommunityPartition& part,
                                       std::span<const NodeId> subject) {
    if (subject.empty()) throw UsageError("cns: empty subject");
    const std::uint32_t c = part.community_of(subject.front());
    for (const NodeId v : subject)
        if (part.community_of(v) != c)
            throw UsageError("cns: subject spans communities");
    return c;
}

// Community members minus the subject, as positions into the community's
// sorted node list (the same indexing the induced subgraph uses).
inline std::vector<std::uint32_t>
community_pool(const std::vector<NodeId>& members,
               std::span<const NodeId> subject) {
    std::vector<bool> in_subject(members.size(), false);
    for (const NodeId v : subject) {
        const auto it = std::lower_bound(members.begin(), members.end(), v);
        if (it == members.end() || *it != v)
            throw InternalError("cns: subject node missing from community");
        in_subject[static_cast<std::size_t>(it - members.begin())] = true;
    }
    std::vector<std::uint32_t> pool;
    pool.reserve(members.size() - subject.size());
    for (std::uint32_t i = 0; i < members.size(); ++i)
        if (!in_subject[i]) pool.push_back(i);
    return pool;
}

} // namespace detail

// CNS of a per-node measure. rho is indexed like the community's sorted node
// list, i.e. like the induced community subgraph the measure was computed on.
inline CnsResult cns(const CommunityPartition& part,
                     std::span<const NodeId> subject,
                     std::span<const double> rho, std::size_t m,
                     std::uint64_t seed) {
    const std::uint32_t c = detail::subject_community(part, subject);
    const auto& members = part.communities[c];
    if (rho.size() != members.size())
        throw UsageError("cns: measure size does not match community size");
    const auto pool = detail::community_pool(members, subject);

    double r_sub = 0.0;
    for (const NodeId v : subject) {
        const auto it = std::lower_bound(members.begin(), members.end(), v);
        r_sub += rho[static_cast<std::size_t>(it - members.begin())];
    }
    Rng rng(seed);
    return cns_from_pool(r_sub, subject.size(), pool.size(), m, rng,
                         [&](std::span<const std::uint32_t> pick) {
                             double s = 0.0;
                             for (const auto i : pick) s += rho[pool[i]];
                             return s;
                         });
}

// Sum of pairwise l2 embedding distances over a node set, each unordered
// pair counted in both directions.
inline double dispersion(const EmbeddingMatrix& emb,
                         std::span<const NodeId> nodes) {
    for (const NodeId v : nodes)
        if (v >= emb.n) throw UsageError("dispersion: node has no embedding");
    double total = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        for (std::size_t j = i + 1; j < nodes.size(); ++j)
            total += 2.0 * emb.distance(nodes[i], nodes[j]);
    return total;
}

enum class DispersionMode {
    set_relative,    // random sets scored by their own internal spread
    cycle_referenced // random sets scored by distance to the cycle's nodes
};

// r' = CNS of embedding dispersion for one cycle.
inline CnsResult r_prime(const CommunityPartition& part, const Cycle& cycle,
                         const EmbeddingMatrix& emb, std::size_t m,
                         std::uint64_t seed,
                         DispersionMode mode = DispersionMode::set_relative) {
    std::span<const NodeId> subject(cycle.nodes);
    const std::uint32_t c = detail::subject_community(part, subject);
    const auto& members = part.communities[c];
    for (const NodeId v : members)
        if (v >= emb.n) throw UsageError("r_prime: node has no embedding");
    const auto pool = detail::community_pool(members, subject);
    const double r_sub = dispersion(emb, subject);

    std::vector<NodeId> sample_nodes(subject.size());
    auto score = [&](std::span<const std::uint32_t> pick) {
        for (std::size_t i = 0; i < pick.size(); ++i)
            sample_nodes[i] = members[pool[pick[i]]];
        if (mode == DispersionMode::set_relative)
            return dispersion(emb, sample_nodes);
        double s = 0.0;
        for (const NodeId v : sample_nodes)
            for (const NodeId u : cycle.nodes) s += emb.distance(u, v);
        return s;
    };
    Rng rng(seed);
    return cns_from_pool(r_sub, subject.size(), pool.size(), m, rng, score);
}

// Linear-interpolation percentile (the numpy default). Input need not be
// sorted; pct in (0, 100).
inline double percentile_linear(std::vector<double> xs, double pct) {
    if (xs.empty()) throw UsageError("percentile of empty set");
    if (!(pct > 0.0 && pct < 100.0))
        throw UsageError("percentile must lie in (0, 100)");
    std::sort(xs.begin(), xs.end());
    const double rank = pct / 100.0 * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(rank);
    const double frac = rank - static_cast<double>(lo);
    if (lo + 1 >= xs.size()) return xs.back();
    return xs[lo] + frac * (xs[lo + 1] - xs[lo]);
}

struct RPrimeRun {
    double p = 1.0;
    double q = 1.0;
    std::vector<CnsValue> r_prime; // indexed by cycle
};

struct RPrimeTable {
    std::vector<RPrimeRun> runs;
};

// Spread number per cycle: the fraction of runs where the cycle's r' lands
// strictly above the run's percentile over all finite r' values. Infinite
// r' ranks above everything; null never counts.
inline std::vector<double> spread_numbers(const RPrimeTable& table,
                                          double percentile,
                                          std::size_t cycle_count) {
    if (table.runs.empty()) throw UsageError("spread: need at least one run");
    std::vector<double> spread(cycle_count, 0.0);
    for (const auto& run : table.runs) {
        if (run.r_prime.size() != cycle_count)
            throw UsageError("spread: run has wrong cycle count");
        std::vector<double> finite;
        finite.reserve(cycle_count);
        for (const auto& v : run.r_prime)
            if (v.is_finite()) finite.push_back(v.value);
        const bool have_threshold = !finite.empty();
        const double threshold =
            have_threshold ? percentile_linear(finite, percentile) : 0.0;
        for (std::size_t cidx = 0; cidx < cycle_count; ++cidx) {
            const auto& v = run.r_prime[cidx];
            const bool outlier =
                v.is_infinite() || (have_threshold && v.is_finite() &&
                                    v.value > threshold);
            if (outlier) spread[cidx] += 1.0;
        }
    }
    const double k = static_cast<double>(table.runs.size());
    for (double& s : spread) s /= k;
    return spread;
}

// (x - min) / (max - min) over the non-null entries; a flat series maps to
// all zeros; nulls stay null.
inline std::vector<std::optional<double>>
min_max_normalize(std::span<const std::optional<double>> xs) {
    if (xs.empty()) throw UsageError("min_max_normalize: empty input");
    double lo = 0.0, hi = 0.0;
    bool seen = false;
    for (const auto& x : xs) {
        if (!x) continue;
        if (!seen) {
            lo = hi = *x;
            seen = true;
        } else {
            lo = std::min(lo, *x);
            hi = std::max(hi, *x);
        }
    }
    if (!seen) throw UsageError("min_max_normalize: all values null");
    std::vector<std::optional<double>> out(xs.size());
    const double range = hi - lo;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!xs[i]) continue;
        out[i] = range > 0.0 ? (*xs[i] - lo) / range : 0.0;
    }
    return out;
}

enum class CentralityVariant { degree, pagerank };

inline const char* to_string(CentralityVariant v) {
    return v == CentralityVariant::degree ? "degree" : "pagerank";
}

struct RPrimeEntry {
    double p = 1.0;
    double q = 1.0;
    CnsValue value;
};

struct CycleScoreCard {
    std::size_t cycle_index = 0;
    std::vector<RPrimeEntry> r_prime_per_run;
    double spread_number = 0.0;
    CnsValue cns_betweenness;
    CnsValue cns_degree;
    CnsValue cns_closeness;
    CnsValue cns_con;
    CnsValue cns_pagerank;
    std::optional<double> norm_spread;
    std::optional<double> norm_betweenness;
    std::optional<double> norm_degree;
    std::optional<double> norm_closeness;
    std::optional<double> norm_con;
    std::optional<double> norm_pagerank;
    std::optional<double> R;
};

namespace detail {

template <typename Get, typename Set>
void normalize_series(std::vector<CycleScoreCard>& cards, Get&& get,
                      Set&& set) {
    std::vector<std::optional<double>> xs(cards.size());
    bool any = false;
    for (std::size_t i = 0; i < cards.size(); ++i) {
        xs[i] = get(cards[i]);
        any = any || xs[i].has_value();
    }
    if (!any) return; // every subject disregarded; leave the series null
    const auto normed = min_max_normalize(xs);
    for (std::size_t i = 0; i < cards.size(); ++i) set(cards[i], normed[i]);
}

} // namespace detail

// Min-max normalize every series across the cycle population, then combine
// spread with the betweenness and degree (or pagerank) complements into R.
inline void aggregate_R(std::vector<CycleScoreCard>& cards,
                        CentralityVariant variant) {
    if (cards.empty()) return;
    using Card = CycleScoreCard;
    detail::normalize_series(
        cards, [](const Card& c) { return std::optional<double>(c.spread_number); },
        [](Card& c, std::optional<double> v) { c.norm_spread = v; });
    detail::normalize_series(
        cards, [](const Card& c) { return c.cns_betweenness.as_optional(); },
        [](Card& c, std::optional<double> v) { c.norm_betweenness = v; });
    detail::normalize_series(
        cards, [](const Card& c) { return c.cns_degree.as_optional(); },
        [](Card& c, std::optional<double> v) { c.norm_degree = v; });
    detail::normalize_series(
        cards, [](const Card& c) { return c.cns_closeness.as_optional(); },
        [](Card& c, std::optional<double> v) { c.norm_closeness = v; });
    detail::normalize_series(
        cards, [](const Card& c) { return c.cns_con.as_optional(); },
        [](Card& c, std::optional<double> v) { c.norm_con = v; });
    if (variant == CentralityVariant::pagerank)
        detail::normalize_series(
            cards, [](const Card& c) { return c.cns_pagerank.as_optional(); },
            [](Card& c, std::optional<double> v) { c.norm_pagerank = v; });

    for (auto& card : cards) {
        const auto& deg_like = variant == CentralityVariant::degree
                                   ? card.norm_degree
                                   : card.norm_pagerank;
        if (card.norm_spread && card.norm_betweenness && deg_like)
            card.R = (*card.norm_spread + (1.0 - *card.norm_betweenness) +
                      (1.0 - *deg_like)) /
                     3.0;
        else
            card.R = std::nullopt;
    }
}

} // namespace anticent
