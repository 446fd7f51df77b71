#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "anticent/common.hpp"
#include "anticent/graph.hpp"
#include "anticent/parallel.hpp"
#include "anticent/rng.hpp"
#include "anticent/walks.hpp"

namespace anticent {

struct TrainParams {
    std::uint32_t dimension = 32;
    std::uint32_t window = 10;
    std::uint32_t negative_samples = 5;
    std::uint32_t epochs = 1;
    float learning_rate = 0.025f;     // decays linearly over the corpus
    float min_learning_rate = 0.0001f;
    std::uint64_t seed = 0;
    std::uint32_t threads = 1; // >1 trains hogwild and is not reproducible

    void validate() const {
        if (dimension < 1) throw UsageError("train params: dimension >= 1");
        if (window < 1) throw UsageError("train params: window >= 1");
        if (epochs < 1) throw UsageError("train params: epochs >= 1");
        if (!(learning_rate >= 0.0f))
            throw UsageError("train params: learning_rate >= 0");
    }
};

struct EmbeddingMatrix {
    std::uint64_t n = 0;
    std::uint32_t d = 0;
    std::vector<float> data; // row-major, row i = node i

    std::span<const float> row(std::uint64_t i) const {
        return {data.data() + i * d, d};
    }
    std::span<float> row(std::uint64_t i) {
        return {data.data() + i * d, d};
    }

    double distance(std::uint64_t a, std::uint64_t b) const {
        const float* x = data.data() + a * d;
        const float* y = data.data() + b * d;
        double s = 0.0;
        for (std::uint32_t k = 0; k < d; ++k) {
            const double diff = static_cast<double>(x[k]) - y[k];
            s += diff * diff;
        }
        return std::sqrt(s);
    }

    bool all_finite() const {
        for (const float v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

struct SkipGramModel {
    EmbeddingMatrix input;   // the embedding that leaves the trainer
    EmbeddingMatrix context; // output-side vectors
};

namespace detail {

class SigmoidTable {
public:
    SigmoidTable() {
        for (std::size_t i = 0; i < kSize; ++i) {
            const double x =
                (static_cast<double>(i) / kSize * 2.0 - 1.0) * kBound;
            table_[i] = static_cast<float>(1.0 / (1.0 + std::exp(-x)));
        }
    }
    float operator()(float x) const {
        if (x >= kBound) return 1.0f;
        if (x <= -kBound) return 0.0f;
        const auto i = static_cast<std::size_t>((x + kBound) *
                                                (kSize / (2.0f * kBound)));
        return table_[i < kSize ? i : kSize - 1];
    }

private:
    static constexpr float kBound = 6.0f;
    static constexpr std::size_t kSize = 4096;
    std::array<float, kSize> table_{};
};

inline const SigmoidTable& sigmoid_table() {
    static const SigmoidTable t;
    return t;
}

// Unigram^(3/4) negative-sampling distribution over the walk corpus.
inline AliasTable
build_negative_table(const std::vector<std::vector<NodeId>>& walks,
                     std::size_t node_count) {
    std::vector<double> weight(node_count, 0.0);
    for (const auto& walk : walks)
        for (const NodeId u : walk) weight[u] += 1.0;
    for (double& w : weight) w = std::pow(w, 0.75);
    return AliasTable(weight);
}

struct PairVisitStats {
    std::uint64_t tokens = 0;
};

// Shared skip-gram pair walk: calls fn(center, context) for every in-window
// pair, consuming one rng draw per token for the dynamic window size.
template <typename Fn>
void for_each_pair(const std::vector<NodeId>& walk, std::uint32_t window,
                   Rng& rng, Fn&& fn) {
    const std::size_t len = walk.size();
    for (std::size_t i = 0; i < len; ++i) {
        const std::size_t b =
            1 + static_cast<std::size_t>(rng.next_index(window));
        const std::size_t lo = i >= b ? i - b : 0;
        const std::size_t hi = std::min(len - 1, i + b);
        for (std::size_t j = lo; j <= hi; ++j) {
            if (j == i) continue;
            fn(walk[i], walk[j]);
        }
    }
}

} // namespace detail

inline SkipGramModel init_model(std::size_t node_count,
                                const TrainParams& params) {
    params.validate();
    SkipGramModel m;
    m.input.n = node_count;
    m.input.d = params.dimension;
    m.input.data.resize(node_count * params.dimension);
    Rng rng(derive_seed(params.seed, seed_domain::train, 0));
    const float scale = 1.0f / static_cast<float>(params.dimension);
    for (auto& v : m.input.data)
        v = (static_cast<float>(rng.next_double()) - 0.5f) * scale;
    m.context.n = node_count;
    m.context.d = params.dimension;
    m.context.data.assign(node_count * params.dimension, 0.0f);
    return m;
}

// SGD over the negative-sampling objective. Walk (center, context) pairs are
// visited word2vec-style: the context word's input vector is pulled towards
// the center word's output vector and away from sampled negatives.
inline void train_in_place(SkipGramModel& model,
                           const std::vector<std::vector<NodeId>>& walks,
                           const TrainParams& params) {
    params.validate();
    const std::uint32_t d = params.dimension;
    const auto& sigmoid = detail::sigmoid_table();
    const AliasTable neg_table =
        detail::build_negative_table(walks, model.input.n);

    std::uint64_t corpus_tokens = 0;
    for (const auto& w : walks) corpus_tokens += w.size();
    const std::uint64_t total_tokens =
        corpus_tokens * static_cast<std::uint64_t>(params.epochs);
    if (total_tokens == 0) throw UsageError("empty walk corpus");

    std::atomic<std::uint64_t> processed{0};
    float* const W = model.input.data.data();
    float* const C = model.context.data.data();

    auto train_range = [&](std::size_t lo, std::size_t hi,
                           std::uint64_t stream) {
        Rng rng(derive_seed(params.seed, seed_domain::train, 1, stream));
        std::vector<float> grad(d);
        float lr = params.learning_rate;
        for (std::uint32_t epoch = 0; epoch < params.epochs; ++epoch) {
            for (std::size_t wi = lo; wi < hi; ++wi) {
                const auto& walk = walks[wi];
                detail::for_each_pair(
                    walk, params.window, rng,
                    [&](NodeId center, NodeId context) {
                        float* const in = W + static_cast<std::size_t>(context) * d;
                        std::fill(grad.begin(), grad.end(), 0.0f);
                        for (std::uint32_t s = 0;
                             s <= params.negative_samples; ++s) {
                            NodeId target;
                            float label;
                            if (s == 0) {
                                target = center;
                                label = 1.0f;
                            } else {
                                target = static_cast<NodeId>(
                                    neg_table.sample(rng));
                                if (target == center) continue;
                                label = 0.0f;
                            }
                            float* const out =
                                C + static_cast<std::size_t>(target) * d;
                            float dot = 0.0f;
                            for (std::uint32_t k = 0; k < d; ++k)
                                dot += in[k] * out[k];
                            const float g = (label - sigmoid(dot)) * lr;
                            for (std::uint32_t k = 0; k < d; ++k) {
                                grad[k] += g * out[k];
                                out[k] += g * in[k];
                            }
                        }
                        for (std::uint32_t k = 0; k < d; ++k)
                            in[k] += grad[k];
                    });
                const std::uint64_t done =
                    processed.fetch_add(walk.size(),
                                        std::memory_order_relaxed) +
                    walk.size();
                const float frac = static_cast<float>(done) /
                                   static_cast<float>(total_tokens);
                lr = params.learning_rate * (1.0f - frac);
                if (lr < params.min_learning_rate)
                    lr = params.min_learning_rate;
            }
        }
    };

    const unsigned threads = params.threads;
    if (threads <= 1) {
        train_range(0, walks.size(), 0);
        return;
    }
    // hogwild: unsynchronized updates, throughput mode only
    std::vector<std::thread> pool;
    const std::size_t chunk = (walks.size() + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(walks.size(), lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi, t] { train_range(lo, hi, t); });
    }
    for (auto& th : pool) th.join();
}

// Mean per-pair negative-sampling log likelihood under a fixed evaluation
// stream; used to sanity-check that training improved the objective.
inline double sampled_objective(const SkipGramModel& model,
                                const std::vector<std::vector<NodeId>>& walks,
                                const TrainParams& params, std::uint64_t seed,
                                std::uint64_t max_pairs = 500000) {
    const std::uint32_t d = params.dimension;
    const AliasTable neg_table =
        detail::build_negative_table(walks, model.input.n);
    Rng rng(derive_seed(seed, seed_domain::train, 2));
    double total = 0.0;
    std::uint64_t pairs = 0;
    const float* const W = model.input.data.data();
    const float* const C = model.context.data.data();
    for (const auto& walk : walks) {
        if (pairs >= max_pairs) break;
        detail::for_each_pair(walk, params.window, rng,
                              [&](NodeId center, NodeId context) {
            if (pairs >= max_pairs) return;
            ++pairs;
            const float* in = W + static_cast<std::size_t>(context) * d;
            for (std::uint32_t s = 0; s <= params.negative_samples; ++s) {
                NodeId target = center;
                if (s > 0) {
                    target = static_cast<NodeId>(neg_table.sample(rng));
                    if (target == center) continue;
                }
                const float* out = C + static_cast<std::size_t>(target) * d;
                double dot = 0.0;
                for (std::uint32_t k = 0; k < d; ++k)
                    dot += static_cast<double>(in[k]) * out[k];
                const double z = s == 0 ? dot : -dot;
                // log sigmoid, stable form
                total += z < 0 ? z - std::log1p(std::exp(z))
                               : -std::log1p(std::exp(-z));
            }
        });
    }
    return pairs > 0 ? total / static_cast<double>(pairs) : 0.0;
}

inline EmbeddingMatrix
train_embedding(const std::vector<std::vector<NodeId>>& walks,
                const TrainParams& params, std::size_t node_count) {
    params.validate();
    std::uint64_t tokens = 0;
    for (const auto& w : walks) {
        tokens += w.size();
        for (const NodeId u : w)
            if (u >= node_count)
                throw UsageError("walk references node >= node_count");
    }
    if (tokens == 0) throw UsageError("empty walk corpus");
    SkipGramModel model = init_model(node_count, params);
    train_in_place(model, walks, params);
    return std::move(model.input);
}

inline EmbeddingMatrix embed(const TxGraph& g, const WalkParams& wp,
                             const TrainParams& tp, unsigned walk_threads = 1) {
    if (g.node_count() == 0) throw UsageError("embed: empty graph");
    const auto walks = generate_walks(g, wp, walk_threads);
    return train_embedding(walks, tp, g.node_count());
}

// --- binary format: magic, version, |V|, d, row-major f32 ---------------

inline constexpr char kEmbeddingMagic[4] = {'A', 'C', 'E', 'M'};
inline constexpr std::uint32_t kEmbeddingVersion = 1;

inline void save_embedding(std::ostream& out, const EmbeddingMatrix& emb) {
    out.write(kEmbeddingMagic, 4);
    auto put_u32 = [&](std::uint32_t v) {
        char b[4];
        for (int i = 0; i < 4; ++i) b[i] = static_cast<char>(v >> (8 * i));
        out.write(b, 4);
    };
    auto put_u64 = [&](std::uint64_t v) {
        char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<char>(v >> (8 * i));
        out.write(b, 8);
    };
    put_u32(kEmbeddingVersion);
    put_u64(emb.n);
    put_u32(emb.d);
    static_assert(sizeof(float) == 4);
    out.write(reinterpret_cast<const char*>(emb.data.data()),
              static_cast<std::streamsize>(emb.data.size() * 4));
}

inline void save_embedding_file(const std::string& path,
                                const EmbeddingMatrix& emb) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write embedding file: " + path);
    save_embedding(out, emb);
}

inline EmbeddingMatrix load_embedding(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kEmbeddingMagic, 4) != 0)
        throw DataError("not an embedding file (bad magic)");
    auto get_u32 = [&]() {
        unsigned char b[4];
        in.read(reinterpret_cast<char*>(b), 4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
        return v;
    };
    auto get_u64 = [&]() {
        unsigned char b[8];
        in.read(reinterpret_cast<char*>(b), 8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
        return v;
    };
    const std::uint32_t version = get_u32();
    if (version != kEmbeddingVersion)
        throw DataError("unsupported embedding file version " +
                        std::to_string(version));
    EmbeddingMatrix emb;
    emb.n = get_u64();
    emb.d = get_u32();
    emb.data.resize(emb.n * emb.d);
    in.read(reinterpret_cast<char*>(emb.data.data()),
            static_cast<std::streamsize>(emb.data.size() * 4));
    if (!in) throw DataError("truncated embedding file");
    return emb;
}

inline EmbeddingMatrix load_embedding_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open embedding file: " + path);
    return load_embedding(in);
}

// Delimited text export: token, then d vector components per row.
inline void export_embedding_text(std::ostream& out,
                                  const EmbeddingMatrix& emb,
                                  const std::vector<Token>& tokens,
                                  char delim = ',') {
    out << "token";
    for (std::uint32_t k = 0; k < emb.d; ++k) out << delim << 'v' << k;
    out << '\n';
    char buf[48];
    for (std::uint64_t i = 0; i < emb.n; ++i) {
        out << tokens[i];
        const auto r = emb.row(i);
        for (std::uint32_t k = 0; k < emb.d; ++k) {
            std::snprintf(buf, sizeof(buf), "%.9g",
                          static_cast<double>(r[k]));
            out << delim << buf;
        }
        out << '\n';
    }
}

} // namespace anticent
