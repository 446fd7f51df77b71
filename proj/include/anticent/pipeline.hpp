#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "anticent/centrality.hpp"
#include "anticent/common.hpp"
#include "anticent/community.hpp"
#include "anticent/cycles.hpp"
#include "anticent/edge_io.hpp"
#include "anticent/embedding.hpp"
#include "anticent/graph.hpp"
#include "anticent/hash.hpp"
#include "anticent/parallel.hpp"
#include "anticent/rng.hpp"
#include "anticent/scoring.hpp"
#include "anticent/walks.hpp"

namespace anticent {

using json = nlohmann::json;
namespace fs = std::filesystem;

struct GridPoint {
    double p = 1.0;
    double q = 1.0;
};

struct PipelineConfig {
    std::string input;
    std::string output_dir = "out";

    // cleaning
    double max_avg_amount = 10000.0;
    bool require_same_year = true;

    // communities
    double resolution = 1.0;

    // cycles and paths
    std::uint32_t cycle_min = 3;
    std::uint32_t cycle_max = 6;
    std::uint32_t path_min = 4;
    std::uint32_t path_max = 7;
    std::uint64_t path_limit = 10'000'000;

    // walks
    std::uint32_t walk_length = 80;
    std::uint32_t walks_per_node = 10;

    // training
    std::uint32_t dimension = 32;
    std::uint32_t window = 10;
    std::uint32_t negative_samples = 5;
    std::uint32_t epochs = 1;
    double learning_rate = 0.025;
    double min_learning_rate = 0.0001;

    // (p, q) grid
    std::uint32_t k = 8;
    std::string grid_mode = "diagonal"; // "diagonal" or "full"
    std::uint32_t grid_p_count = 0;     // full mode: p_count * q_count == k
    std::uint32_t grid_q_count = 0;

    // scoring
    std::uint32_t m = 100;
    double percentile = 75.0;
    std::string centrality_variant = "degree"; // "degree" or "pagerank"
    std::string dispersion_mode = "set_relative";

    // run control
    std::uint64_t seed = 0;
    std::uint32_t threads = 1;
    bool deterministic = true;

    void validate() const {
        if (!(max_avg_amount > 0)) throw UsageError("config: max_avg_amount > 0");
        if (!(resolution > 0)) throw UsageError("config: resolution > 0");
        if (cycle_min < 2 || cycle_min > cycle_max)
            throw UsageError("config: need 2 <= cycle_min <= cycle_max");
        if (path_min < 1 || path_min > path_max)
            throw UsageError("config: need 1 <= path_min <= path_max");
        if (walk_length < 1) throw UsageError("config: walk_length >= 1");
        if (walks_per_node < 1) throw UsageError("config: walks_per_node >= 1");
        if (dimension < 1) throw UsageError("config: dimension >= 1");
        if (window < 1) throw UsageError("config: window >= 1");
        if (epochs < 1) throw UsageError("config: epochs >= 1");
        if (k < 1) throw UsageError("config: k >= 1");
        if (m < 1) throw UsageError("config: m >= 1");
        if (!(percentile > 0.0 && percentile < 100.0))
            throw UsageError("config: percentile in (0, 100)");
        if (threads < 1) throw UsageError("config: threads >= 1");
        if (grid_mode != "diagonal" && grid_mode != "full")
            throw UsageError("config: grid_mode is 'diagonal' or 'full'");
        if (grid_mode == "full" && grid_p_count * grid_q_count != k)
            throw UsageError("config: full grid needs grid_p_count * grid_q_count == k");
        if (centrality_variant != "degree" && centrality_variant != "pagerank")
            throw UsageError("config: centrality_variant is 'degree' or 'pagerank'");
        if (dispersion_mode != "set_relative" &&
            dispersion_mode != "cycle_referenced")
            throw UsageError("config: dispersion_mode is 'set_relative' or "
                             "'cycle_referenced'");
    }

    json to_json() const {
        return json{{"input", input},
                    {"output_dir", output_dir},
                    {"max_avg_amount", max_avg_amount},
                    {"require_same_year", require_same_year},
                    {"resolution", resolution},
                    {"cycle_min", cycle_min},
                    {"cycle_max", cycle_max},
                    {"path_min", path_min},
                    {"path_max", path_max},
                    {"path_limit", path_limit},
                    {"walk_length", walk_length},
                    {"walks_per_node", walks_per_node},
                    {"dimension", dimension},
                    {"window", window},
                    {"negative_samples", negative_samples},
                    {"epochs", epochs},
                    {"learning_rate", learning_rate},
                    {"min_learning_rate", min_learning_rate},
                    {"k", k},
                    {"grid_mode", grid_mode},
                    {"grid_p_count", grid_p_count},
                    {"grid_q_count", grid_q_count},
                    {"m", m},
                    {"percentile", percentile},
                    {"centrality_variant", centrality_variant},
                    {"dispersion_mode", dispersion_mode},
                    {"seed", seed},
                    {"threads", threads},
                    {"deterministic", deterministic}};
    }

    static PipelineConfig from_json(const json& j) {
        PipelineConfig c;
        const json defaults = c.to_json();
        for (const auto& [key, value] : j.items())
            if (!defaults.contains(key))
                throw UsageError("config: unknown key '" + key + "'");
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
        };
        get("input", c.input);
        get("output_dir", c.output_dir);
        get("max_avg_amount", c.max_avg_amount);
        get("require_same_year", c.require_same_year);
        get("resolution", c.resolution);
        get("cycle_min", c.cycle_min);
        get("cycle_max", c.cycle_max);
        get("path_min", c.path_min);
        get("path_max", c.path_max);
        get("path_limit", c.path_limit);
        get("walk_length", c.walk_length);
        get("walks_per_node", c.walks_per_node);
        get("dimension", c.dimension);
        get("window", c.window);
        get("negative_samples", c.negative_samples);
        get("epochs", c.epochs);
        get("learning_rate", c.learning_rate);
        get("min_learning_rate", c.min_learning_rate);
        get("k", c.k);
        get("grid_mode", c.grid_mode);
        get("grid_p_count", c.grid_p_count);
        get("grid_q_count", c.grid_q_count);
        get("m", c.m);
        get("percentile", c.percentile);
        get("centrality_variant", c.centrality_variant);
        get("dispersion_mode", c.dispersion_mode);
        get("seed", c.seed);
        get("threads", c.threads);
        get("deterministic", c.deterministic);
        c.validate();
        return c;
    }

    static PipelineConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open config file: " + path);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw DataError("config parse error in " + path + ": " + e.what());
        }
        return from_json(j);
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw DataError("cannot write config file: " + path);
        out << to_json().dump(2) << '\n';
    }

    // nlohmann objects iterate in key order, so the dump is canonical
    std::string config_hash() const { return sha256_hex(to_json().dump()); }

    std::vector<GridPoint> grid() const {
        std::vector<GridPoint> pts;
        if (grid_mode == "diagonal") {
            for (std::uint32_t i = 0; i < k; ++i) {
                const double v = 2.0 * (i + 1) / static_cast<double>(k);
                pts.push_back({v, v});
            }
        } else {
            for (std::uint32_t a = 0; a < grid_p_count; ++a)
                for (std::uint32_t b = 0; b < grid_q_count; ++b)
                    pts.push_back(
                        {2.0 * (a + 1) / static_cast<double>(grid_p_count),
                         2.0 * (b + 1) / static_cast<double>(grid_q_count)});
        }
        return pts;
    }

    CentralityVariant variant() const {
        return centrality_variant == "degree" ? CentralityVariant::degree
                                              : CentralityVariant::pagerank;
    }
    DispersionMode disp_mode() const {
        return dispersion_mode == "set_relative"
                   ? DispersionMode::set_relative
                   : DispersionMode::cycle_referenced;
    }
    unsigned train_threads() const { return deterministic ? 1u : threads; }
};

namespace artifact {
inline constexpr const char* graph = "graph.csv";
inline constexpr const char* communities = "communities.jsonl";
inline constexpr const char* cycles = "cycles.jsonl";
inline constexpr const char* paths = "paths.jsonl";
inline constexpr const char* centrality = "centrality.csv";
inline constexpr const char* r_prime = "r_prime.csv";
inline constexpr const char* report = "report.json";
inline constexpr const char* manifest = "manifest.json";
inline std::string embedding(std::uint32_t run) {
    return "emb_" + std::to_string(run) + ".bin";
}
inline std::string embedding_meta(std::uint32_t run) {
    return "emb_" + std::to_string(run) + ".json";
}
} // namespace artifact

struct StageOutcome {
    std::string stage;
    std::vector<std::string> artifacts;
    bool from_cache = false;
};

// Orchestrates the stages over an output directory. Every artifact is
// tracked in manifest.json with a content hash, the stage's config subset,
// and its input hashes; a stage reruns only when that stamp changes.
class PipelineRunner {
public:
    explicit PipelineRunner(PipelineConfig cfg, bool force = false)
        : cfg_(std::move(cfg)), force_(force), out_(cfg_.output_dir) {
        cfg_.validate();
        fs::create_directories(out_);
        load_manifest();
    }

    const PipelineConfig& config() const { return cfg_; }
    fs::path artifact_path(const std::string& name) const {
        return out_ / name;
    }

    // --- stages ----------------------------------------------------------

    StageOutcome ingest() {
        if (cfg_.input.empty())
            throw UsageError("no input path configured (set 'input' in the "
                             "config or pass --input)");
        if (!fs::exists(cfg_.input))
            throw DataError("ingest: input file not found: " + cfg_.input);
        const json stamp = {
            {"config",
             {{"max_avg_amount", cfg_.max_avg_amount},
              {"require_same_year", cfg_.require_same_year}}},
            {"inputs", {{cfg_.input, sha256_file(cfg_.input)}}}};
        if (cached(artifact::graph, stamp))
            return {"ingest", {artifact::graph}, true};

        begin(artifact::graph, "ingest", stamp);
        auto parsed = parse_edge_list_file(cfg_.input);
        CleanRules rules;
        rules.max_avg_amount = cfg_.max_avg_amount;
        rules.require_same_year = cfg_.require_same_year;
        auto kept = clean_filter(parsed.edges, rules);
        std::sort(kept.begin(), kept.end(),
                  [](const TransactionEdge& a, const TransactionEdge& b) {
                      return std::tie(a.source, a.target) <
                             std::tie(b.source, b.target);
                  });
        const TxGraph g = TxGraph::from_edges(kept); // validates invariants
        std::ofstream fout(artifact_path(artifact::graph));
        if (!fout) throw DataError("cannot write graph artifact");
        write_edge_list(fout, kept, ',',
                        {meta_comment(), "rows_seen=" + std::to_string(parsed.rows_seen),
                         "self_loops_dropped=" +
                             std::to_string(parsed.self_loops_rejected),
                         "raw_edges=" + std::to_string(parsed.edges.size()),
                         "clean_edges=" + std::to_string(kept.size()),
                         "nodes=" + std::to_string(g.node_count())});
        fout.close();
        commit(artifact::graph);
        return {"ingest", {artifact::graph}, false};
    }

    StageOutcome communities() {
        const json stamp = {
            {"config",
             {{"resolution", cfg_.resolution}, {"seed", cfg_.seed}}},
            {"inputs", input_hashes({artifact::graph})}};
        if (cached(artifact::communities, stamp))
            return {"communities", {artifact::communities}, true};

        begin(artifact::communities, "communities", stamp);
        const TxGraph g = load_graph();
        const auto part = detect_communities(
            g, cfg_.resolution, derive_seed(cfg_.seed, seed_domain::community));
        std::ofstream fout(artifact_path(artifact::communities));
        if (!fout) throw DataError("cannot write communities artifact");
        json meta = {{"type", "meta"},
                     {"artifact", "communities"},
                     {"config_hash", cfg_.config_hash()},
                     {"seed", cfg_.seed},
                     {"resolution", cfg_.resolution},
                     {"community_count", part.community_count()},
                     {"nodes", g.node_count()}};
        fout << meta.dump() << '\n';
        for (std::uint32_t c = 0; c < part.community_count(); ++c) {
            json line = {{"type", "community"}, {"id", c}};
            json nodes = json::array();
            for (const NodeId v : part.communities[c])
                nodes.push_back(g.token_of(v));
            line["nodes"] = std::move(nodes);
            fout << line.dump() << '\n';
        }
        fout.close();
        commit(artifact::communities);
        return {"communities", {artifact::communities}, false};
    }

    StageOutcome cycles() {
        const json stamp = {
            {"config",
             {{"cycle_min", cfg_.cycle_min}, {"cycle_max", cfg_.cycle_max}}},
            {"inputs",
             input_hashes({artifact::graph, artifact::communities})}};
        if (cached(artifact::cycles, stamp))
            return {"cycles", {artifact::cycles}, true};

        begin(artifact::cycles, "cycles", stamp);
        const TxGraph g = load_graph();
        const auto part = load_partition(g);
        const auto found = detect_cycles(g, part, cfg_.cycle_min,
                                         cfg_.cycle_max, cfg_.threads);
        std::ofstream fout(artifact_path(artifact::cycles));
        if (!fout) throw DataError("cannot write cycles artifact");
        json meta = {{"type", "meta"},
                     {"artifact", "cycles"},
                     {"config_hash", cfg_.config_hash()},
                     {"seed", cfg_.seed},
                     {"cycle_min", cfg_.cycle_min},
                     {"cycle_max", cfg_.cycle_max},
                     {"cycle_count", found.size()}};
        fout << meta.dump() << '\n';
        for (std::size_t i = 0; i < found.size(); ++i) {
            json nodes = json::array();
            for (const NodeId v : found[i].nodes)
                nodes.push_back(g.token_of(v));
            json line = {{"type", "cycle"},
                         {"id", i},
                         {"community", found[i].community},
                         {"nodes", std::move(nodes)}};
            fout << line.dump() << '\n';
        }
        fout.close();
        commit(artifact::cycles);
        return {"cycles", {artifact::cycles}, false};
    }

    StageOutcome paths() {
        const json stamp = {
            {"config",
             {{"path_min", cfg_.path_min},
              {"path_max", cfg_.path_max},
              {"path_limit", cfg_.path_limit}}},
            {"inputs",
             input_hashes({artifact::graph, artifact::communities,
                           artifact::cycles})}};
        if (cached(artifact::paths, stamp))
            return {"paths", {artifact::paths}, true};

        begin(artifact::paths, "paths", stamp);
        const TxGraph g = load_graph();
        const auto part = load_partition(g);
        const auto cys = load_cycles(g);
        const auto result = detect_paths(g, part, cys, cfg_.path_min,
                                         cfg_.path_max, cfg_.path_limit);
        std::ofstream fout(artifact_path(artifact::paths));
        if (!fout) throw DataError("cannot write paths artifact");
        json meta = {{"type", "meta"},
                     {"artifact", "paths"},
                     {"config_hash", cfg_.config_hash()},
                     {"seed", cfg_.seed},
                     {"path_min", cfg_.path_min},
                     {"path_max", cfg_.path_max},
                     {"path_limit", cfg_.path_limit}};
        fout << meta.dump() << '\n';
        for (const auto& p : result.paths) {
            json nodes = json::array();
            for (const NodeId v : p.nodes) nodes.push_back(g.token_of(v));
            json line = {{"type", "path"},
                         {"community", p.community},
                         {"nodes", std::move(nodes)}};
            fout << line.dump() << '\n';
        }
        json stats = {{"type", "path_stats"},
                      {"path_count", result.path_count},
                      {"path_node_count", result.path_nodes.size()},
                      {"overlap_node_count", result.overlap_nodes.size()},
                      {"truncated", result.truncated}};
        fout << stats.dump() << '\n';
        fout.close();
        commit(artifact::paths);
        return {"paths", {artifact::paths}, false};
    }

    StageOutcome embed() {
        StageOutcome outcome{"embed", {}, true};
        const auto grid = cfg_.grid();
        std::optional<TxGraph> g; // loaded lazily, once
        for (std::uint32_t i = 0; i < grid.size(); ++i) {
            const std::string bin = artifact::embedding(i);
            const std::string meta_name = artifact::embedding_meta(i);
            const json stamp = {
                {"config",
                 {{"p", grid[i].p},
                  {"q", grid[i].q},
                  {"run", i},
                  {"walk_length", cfg_.walk_length},
                  {"walks_per_node", cfg_.walks_per_node},
                  {"dimension", cfg_.dimension},
                  {"window", cfg_.window},
                  {"negative_samples", cfg_.negative_samples},
                  {"epochs", cfg_.epochs},
                  {"learning_rate", cfg_.learning_rate},
                  {"min_learning_rate", cfg_.min_learning_rate},
                  {"seed", cfg_.seed},
                  {"deterministic", cfg_.deterministic}}},
                {"inputs", input_hashes({artifact::graph})}};
            if (cached(bin, stamp)) {
                outcome.artifacts.push_back(bin);
                continue;
            }
            outcome.from_cache = false;
            begin(bin, "embed", stamp);
            if (!g) g = load_graph();

            const std::uint64_t run_seed =
                derive_seed(cfg_.seed, seed_domain::grid, i);
            WalkParams wp;
            wp.p = grid[i].p;
            wp.q = grid[i].q;
            wp.walk_length = cfg_.walk_length;
            wp.walks_per_node = cfg_.walks_per_node;
            wp.seed = derive_seed(run_seed, seed_domain::walks);
            TrainParams tp;
            tp.dimension = cfg_.dimension;
            tp.window = cfg_.window;
            tp.negative_samples = cfg_.negative_samples;
            tp.epochs = cfg_.epochs;
            tp.learning_rate = static_cast<float>(cfg_.learning_rate);
            tp.min_learning_rate = static_cast<float>(cfg_.min_learning_rate);
            tp.seed = derive_seed(run_seed, seed_domain::train);
            tp.threads = cfg_.train_threads();

            const EmbeddingMatrix emb =
                anticent::embed(*g, wp, tp, cfg_.threads);
            save_embedding_file(artifact_path(bin).string(), emb);
            json side = {{"artifact", "embedding"},
                         {"run", i},
                         {"p", grid[i].p},
                         {"q", grid[i].q},
                         {"config_hash", cfg_.config_hash()},
                         {"seed", cfg_.seed},
                         {"walk_seed", wp.seed},
                         {"train_seed", tp.seed},
                         {"nodes", emb.n},
                         {"dimension", emb.d},
                         {"graph_sha256",
                          sha256_file(artifact_path(artifact::graph).string())}};
            std::ofstream mout(artifact_path(meta_name));
            if (!mout) throw DataError("cannot write embedding sidecar");
            mout << side.dump(2) << '\n';
            mout.close();
            commit(bin, meta_name);
            outcome.artifacts.push_back(bin);
        }
        return outcome;
    }

    StageOutcome centrality() {
        const json stamp = {
            {"config", json::object()},
            {"inputs",
             input_hashes({artifact::graph, artifact::communities,
                           artifact::cycles})}};
        if (cached(artifact::centrality, stamp))
            return {"centrality", {artifact::centrality}, true};

        begin(artifact::centrality, "centrality", stamp);
        const TxGraph g = load_graph();
        const auto part = load_partition(g);
        const auto cys = load_cycles(g);
        std::vector<bool> has_cycle(part.community_count(), false);
        for (const auto& c : cys) has_cycle[c.community] = true;

        std::ofstream fout(artifact_path(artifact::centrality));
        if (!fout) throw DataError("cannot write centrality artifact");
        fout << "# " << meta_comment() << '\n';
        fout << "community,node,betweenness,degree,closeness,con,pagerank\n";
        char buf[64];
        auto emit = [&](double v) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            fout << buf;
        };
        for (std::uint32_t c = 0; c < part.community_count(); ++c) {
            if (!has_cycle[c]) continue;
            const auto sub = induce_subgraph_indexed(g, part.communities[c]);
            const auto b = betweenness(sub.graph);
            const auto d = degree_centrality(sub.graph);
            const auto cl = closeness(sub.graph);
            const auto con = con_score(sub.graph);
            const auto pr = pagerank(sub.graph);
            for (std::size_t i = 0; i < sub.parent.size(); ++i) {
                fout << c << ',' << g.token_of(sub.parent[i]) << ',';
                emit(b[i]);
                fout << ',';
                emit(d[i]);
                fout << ',';
                emit(cl[i]);
                fout << ',';
                emit(con[i]);
                fout << ',';
                emit(pr[i]);
                fout << '\n';
            }
        }
        fout.close();
        commit(artifact::centrality);
        return {"centrality", {artifact::centrality}, false};
    }

    StageOutcome score() {
        const auto grid = cfg_.grid();
        std::vector<std::string> emb_inputs{artifact::graph,
                                            artifact::communities,
                                            artifact::cycles};
        for (std::uint32_t i = 0; i < grid.size(); ++i)
            emb_inputs.push_back(artifact::embedding(i));
        const json stamp = {
            {"config",
             {{"m", cfg_.m},
              {"dispersion_mode", cfg_.dispersion_mode},
              {"seed", cfg_.seed},
              {"k", cfg_.k},
              {"grid_mode", cfg_.grid_mode}}},
            {"inputs", input_hashes(emb_inputs)}};
        if (cached(artifact::r_prime, stamp))
            return {"score", {artifact::r_prime}, true};

        begin(artifact::r_prime, "score", stamp);
        const TxGraph g = load_graph();
        const auto part = load_partition(g);
        const auto cys = load_cycles(g);

        std::ofstream fout(artifact_path(artifact::r_prime));
        if (!fout) throw DataError("cannot write r_prime artifact");
        fout << "# " << meta_comment() << '\n';
        fout << "run,p,q,cycle,r_prime\n";
        char buf[64];
        for (std::uint32_t run = 0; run < grid.size(); ++run) {
            const auto emb = load_embedding_file(
                artifact_path(artifact::embedding(run)).string());
            if (emb.n != g.node_count())
                throw DataError("embedding " + artifact::embedding(run) +
                                " does not match the graph");
            std::vector<CnsResult> results(cys.size());
            parallel_for(cys.size(), cfg_.threads, [&](std::size_t ci) {
                results[ci] = r_prime(
                    part, cys[ci], emb, cfg_.m,
                    derive_seed(cfg_.seed, seed_domain::cns_rprime, run, ci),
                    cfg_.disp_mode());
            });
            for (std::size_t ci = 0; ci < cys.size(); ++ci) {
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g", grid[run].p,
                              grid[run].q);
                fout << run << ',' << buf << ',' << ci << ',';
                const auto& v = results[ci].cns;
                if (v.is_finite()) {
                    std::snprintf(buf, sizeof(buf), "%.17g", v.value);
                    fout << buf;
                } else if (v.is_infinite()) {
                    fout << "inf";
                } else {
                    fout << "null";
                }
                fout << '\n';
            }
        }
        fout.close();
        commit(artifact::r_prime);
        return {"score", {artifact::r_prime}, false};
    }

    StageOutcome report() {
        const json stamp = {
            {"config",
             {{"m", cfg_.m},
              {"percentile", cfg_.percentile},
              {"centrality_variant", cfg_.centrality_variant},
              {"seed", cfg_.seed}}},
            {"inputs",
             input_hashes({artifact::communities, artifact::cycles,
                           artifact::centrality, artifact::r_prime})}};
        if (cached(artifact::report, stamp))
            return {"report", {artifact::report}, true};

        begin(artifact::report, "report", stamp);
        const json report = build_report();
        std::ofstream fout(artifact_path(artifact::report));
        if (!fout) throw DataError("cannot write report artifact");
        fout << report.dump(2) << '\n';
        fout.close();
        commit(artifact::report);
        return {"report", {artifact::report}, false};
    }

    // The canonical end-to-end order; stage-wise invocation writes the same
    // bytes because each stage only reads prior artifacts from disk.
    std::vector<StageOutcome> run_all() {
        std::vector<StageOutcome> outcomes;
        outcomes.push_back(ingest());
        outcomes.push_back(communities());
        outcomes.push_back(cycles());
        outcomes.push_back(embed());
        outcomes.push_back(centrality());
        outcomes.push_back(score());
        outcomes.push_back(report());
        return outcomes;
    }

    // --- verification and summaries ---------------------------------------

    json validate_artifacts() const {
        json out = json::object();
        if (!manifest_.contains("artifacts")) return out;
        for (const auto& [name, entry] : manifest_.at("artifacts").items()) {
            const fs::path p = out_ / name;
            std::string status = "ok";
            if (!entry.value("valid", false))
                status = "invalid";
            else if (!fs::exists(p))
                status = "missing";
            else if (sha256_file(p.string()) !=
                     entry.value("sha256", std::string()))
                status = "tampered";
            else if (entry.contains("sidecar")) {
                const fs::path sp = out_ / entry["sidecar"].get<std::string>();
                if (!fs::exists(sp))
                    status = "missing";
                else if (sha256_file(sp.string()) !=
                         entry.value("sidecar_sha256", std::string()))
                    status = "tampered";
            }
            out[name] = status;
        }
        return out;
    }

    json stats() const {
        json out = json::object();
        if (fs::exists(out_ / artifact::graph)) {
            const TxGraph g = load_graph();
            out["graph"] = {{"nodes", g.node_count()},
                            {"edges", g.edge_count()}};
        }
        for (const char* name :
             {artifact::communities, artifact::cycles, artifact::paths}) {
            const fs::path p = out_ / name;
            if (!fs::exists(p)) continue;
            std::ifstream in(p);
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                const json j = json::parse(line);
                const std::string type = j.value("type", "");
                if (type == "meta") {
                    json m = j;
                    m.erase("type");
                    out[std::string(name)] = std::move(m);
                } else if (type == "path_stats") {
                    json m = j;
                    m.erase("type");
                    out["path_stats"] = std::move(m);
                }
            }
        }
        if (fs::exists(out_ / artifact::report)) {
            std::ifstream in(out_ / artifact::report);
            json rep;
            in >> rep;
            if (rep.contains("summary")) out["report"] = rep["summary"];
        }
        return out;
    }

    // --- artifact loaders (shared with tests) ------------------------------

    TxGraph load_graph() const {
        require(artifact::graph);
        auto parsed =
            parse_edge_list_file(artifact_path(artifact::graph).string());
        return TxGraph::from_edges(parsed.edges);
    }

    CommunityPartition load_partition(const TxGraph& g) const {
        require(artifact::communities);
        std::ifstream in(artifact_path(artifact::communities));
        std::string line;
        std::vector<std::vector<NodeId>> communities;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const json j = json::parse(line);
            if (j.value("type", "") != "community") continue;
            const auto id = j.at("id").get<std::uint32_t>();
            if (id != communities.size())
                throw DataError("communities artifact: ids out of order");
            std::vector<NodeId> members;
            for (const auto& t : j.at("nodes"))
                members.push_back(node_for_token(g, t.get<Token>()));
            communities.push_back(std::move(members));
        }
        CommunityPartition part;
        std::vector<std::uint32_t> assignment(g.node_count(), kInvalidNode);
        for (std::uint32_t c = 0; c < communities.size(); ++c)
            for (const NodeId v : communities[c]) {
                if (assignment[v] != kInvalidNode)
                    throw DataError("communities artifact: node in two "
                                    "communities");
                assignment[v] = c;
            }
        for (const auto a : assignment)
            if (a == kInvalidNode)
                throw DataError("communities artifact: node missing");
        part.assignment = std::move(assignment);
        part.communities = std::move(communities);
        return part;
    }

    std::vector<Cycle> load_cycles(const TxGraph& g) const {
        require(artifact::cycles);
        std::ifstream in(artifact_path(artifact::cycles));
        std::string line;
        std::vector<Cycle> cys;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const json j = json::parse(line);
            if (j.value("type", "") != "cycle") continue;
            Cycle c;
            c.community = j.at("community").get<std::uint32_t>();
            for (const auto& t : j.at("nodes"))
                c.nodes.push_back(node_for_token(g, t.get<Token>()));
            cys.push_back(std::move(c));
        }
        return cys;
    }

private:
    static NodeId node_for_token(const TxGraph& g, Token t) {
        const auto idx = g.index_of(t);
        if (!idx)
            throw DataError("artifact references unknown account " +
                            std::to_string(t) +
                            "; artifacts out of sync with the graph");
        return *idx;
    }

    std::string meta_comment() const {
        return "config_hash=" + cfg_.config_hash() +
               " seed=" + std::to_string(cfg_.seed);
    }

    static std::string producer_stage(const std::string& name) {
        if (name == artifact::graph) return "ingest";
        if (name == artifact::communities) return "communities";
        if (name == artifact::cycles) return "cycles";
        if (name == artifact::paths) return "paths";
        if (name == artifact::centrality) return "centrality";
        if (name == artifact::r_prime) return "score";
        if (name == artifact::report) return "report";
        return "embed"; // emb_<i>.bin / emb_<i>.json
    }

    void require(const std::string& name) const {
        if (!fs::exists(out_ / name))
            throw DataError("missing artifact '" + name + "'; run the '" +
                            producer_stage(name) + "' stage first");
    }

    json input_hashes(const std::vector<std::string>& names) const {
        json out = json::object();
        for (const auto& n : names) {
            require(n);
            out[n] = sha256_file((out_ / n).string());
        }
        return out;
    }

    void load_manifest() {
        const fs::path p = out_ / artifact::manifest;
        if (fs::exists(p)) {
            std::ifstream in(p);
            try {
                in >> manifest_;
            } catch (const json::exception&) {
                manifest_ = json::object(); // corrupt manifest: start over
            }
        }
        if (!manifest_.is_object()) manifest_ = json::object();
        if (!manifest_.contains("artifacts"))
            manifest_["artifacts"] = json::object();
    }

    void save_manifest() const {
        std::ofstream out(out_ / artifact::manifest);
        if (!out) throw DataError("cannot write manifest");
        out << manifest_.dump(2) << '\n';
    }

    bool cached(const std::string& name, const json& stamp) const {
        if (force_) return false;
        const auto& arts = manifest_.at("artifacts");
        if (!arts.contains(name)) return false;
        const auto& e = arts.at(name);
        if (!e.value("valid", false)) return false;
        if (!e.contains("stamp") || e.at("stamp") != stamp) return false;
        const fs::path p = out_ / name;
        if (!fs::exists(p)) return false;
        if (sha256_file(p.string()) != e.value("sha256", std::string()))
            return false;
        if (e.contains("sidecar")) {
            const fs::path sp = out_ / e.at("sidecar").get<std::string>();
            if (!fs::exists(sp)) return false;
            if (sha256_file(sp.string()) !=
                e.value("sidecar_sha256", std::string()))
                return false;
        }
        return true;
    }

    // Mark the artifact invalid before writing so an aborted stage leaves a
    // manifest that flags the partial file.
    void begin(const std::string& name, const std::string& stage,
               const json& stamp) {
        manifest_["artifacts"][name] = {{"stage", stage},
                                        {"config_hash", cfg_.config_hash()},
                                        {"seed", cfg_.seed},
                                        {"stamp", stamp},
                                        {"valid", false}};
        save_manifest();
    }

    void commit(const std::string& name, const std::string& sidecar = "") {
        auto& e = manifest_["artifacts"][name];
        e["sha256"] = sha256_file((out_ / name).string());
        if (!sidecar.empty()) {
            e["sidecar"] = sidecar;
            e["sidecar_sha256"] = sha256_file((out_ / sidecar).string());
        }
        e["valid"] = true;
        save_manifest();
    }

    // --- report assembly ---------------------------------------------------

    struct CentralityColumns {
        std::vector<double> betweenness, degree, closeness, con, pagerank;
    };

    json build_report() {
        require(artifact::communities);
        require(artifact::cycles);
        require(artifact::centrality);
        require(artifact::r_prime);

        // communities and cycles in token space; the graph is not needed
        std::map<std::uint32_t, std::vector<Token>> members;
        {
            std::ifstream in(artifact_path(artifact::communities));
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                const json j = json::parse(line);
                if (j.value("type", "") != "community") continue;
                auto& m = members[j.at("id").get<std::uint32_t>()];
                for (const auto& t : j.at("nodes"))
                    m.push_back(t.get<Token>());
            }
        }
        struct CycleRow {
            std::uint32_t community = 0;
            std::vector<Token> tokens;
        };
        std::vector<CycleRow> cys;
        {
            std::ifstream in(artifact_path(artifact::cycles));
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                const json j = json::parse(line);
                if (j.value("type", "") != "cycle") continue;
                CycleRow row;
                row.community = j.at("community").get<std::uint32_t>();
                for (const auto& t : j.at("nodes"))
                    row.tokens.push_back(t.get<Token>());
                if (j.at("id").get<std::size_t>() != cys.size())
                    throw DataError("cycles artifact: ids out of order");
                cys.push_back(std::move(row));
            }
        }

        if (cys.empty()) { // cycle-free input still yields a valid report
            return json{
                {"meta",
                 {{"artifact", "report"},
                  {"config_hash", cfg_.config_hash()},
                  {"seed", cfg_.seed},
                  {"k", cfg_.grid().size()},
                  {"m", cfg_.m},
                  {"percentile", cfg_.percentile},
                  {"centrality_variant", cfg_.centrality_variant},
                  {"dispersion_mode", cfg_.dispersion_mode}}},
                {"cycles", json::array()},
                {"disregarded", json::array()},
                {"summary",
                 {{"cycle_count", 0},
                  {"ranked_count", 0},
                  {"disregarded_count", 0},
                  {"nonzero_spread_count", 0}}}};
        }

        const auto columns = load_centrality_columns(members);
        const RPrimeTable table = load_r_prime_table(cys.size());

        const auto spread =
            spread_numbers(table, cfg_.percentile, cys.size());

        std::vector<CycleScoreCard> cards(cys.size());
        for (std::size_t ci = 0; ci < cys.size(); ++ci) {
            auto& card = cards[ci];
            card.cycle_index = ci;
            for (const auto& run : table.runs)
                card.r_prime_per_run.push_back(
                    {run.p, run.q, run.r_prime[ci]});
            card.spread_number = spread[ci];

            const auto it = columns.find(cys[ci].community);
            if (it == columns.end())
                throw DataError("centrality artifact: missing community " +
                                std::to_string(cys[ci].community));
            const auto& mem = members.at(cys[ci].community);
            const auto& col = it->second;
            auto cns_of = [&](const std::vector<double>& rho,
                              std::uint64_t measure_idx) {
                return centrality_cns(mem, cys[ci].tokens, rho, ci,
                                      measure_idx);
            };
            card.cns_betweenness = cns_of(col.betweenness, 0).cns;
            card.cns_degree = cns_of(col.degree, 1).cns;
            card.cns_closeness = cns_of(col.closeness, 2).cns;
            card.cns_con = cns_of(col.con, 3).cns;
            card.cns_pagerank = cns_of(col.pagerank, 4).cns;
        }
        aggregate_R(cards, cfg_.variant());

        // ranked body: defined R first (descending, id breaks ties), the
        // disregarded rest listed separately
        std::vector<std::size_t> order(cards.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const auto& ra = cards[a].R;
            const auto& rb = cards[b].R;
            if (ra.has_value() != rb.has_value()) return ra.has_value();
            if (ra && rb && *ra != *rb) return *ra > *rb;
            return a < b;
        });

        json ranked = json::array();
        json disregarded = json::array();
        std::size_t nonzero_spread = 0;
        for (const std::size_t ci : order) {
            const auto& card = cards[ci];
            if (card.spread_number > 0.0) ++nonzero_spread;
            json rec = {{"cycle", ci},
                        {"community", cys[ci].community},
                        {"community_size", members.at(cys[ci].community).size()},
                        {"accounts", cys[ci].tokens},
                        {"spread_number", card.spread_number},
                        {"r_prime_per_run", json::array()},
                        {"cns", json::object()},
                        {"normalized", json::object()}};
            for (const auto& e : card.r_prime_per_run)
                rec["r_prime_per_run"].push_back({{"p", e.p},
                                                  {"q", e.q},
                                                  {"r_prime", cns_json(e.value)}});
            rec["cns"] = {{"betweenness", cns_json(card.cns_betweenness)},
                          {"degree", cns_json(card.cns_degree)},
                          {"closeness", cns_json(card.cns_closeness)},
                          {"con", cns_json(card.cns_con)},
                          {"pagerank", cns_json(card.cns_pagerank)}};
            rec["normalized"] = {{"spread_number", opt_json(card.norm_spread)},
                                 {"betweenness", opt_json(card.norm_betweenness)},
                                 {"degree", opt_json(card.norm_degree)},
                                 {"closeness", opt_json(card.norm_closeness)},
                                 {"con", opt_json(card.norm_con)},
                                 {"pagerank", opt_json(card.norm_pagerank)}};
            rec["R"] = opt_json(card.R);
            if (card.R) {
                ranked.push_back(std::move(rec));
            } else {
                rec["reason"] = null_reason(card);
                disregarded.push_back(std::move(rec));
            }
        }

        const std::size_t ranked_count = ranked.size();
        const std::size_t disregarded_count = disregarded.size();
        json report = {
            {"meta",
             {{"artifact", "report"},
              {"config_hash", cfg_.config_hash()},
              {"seed", cfg_.seed},
              {"k", table.runs.size()},
              {"m", cfg_.m},
              {"percentile", cfg_.percentile},
              {"centrality_variant", cfg_.centrality_variant},
              {"dispersion_mode", cfg_.dispersion_mode}}},
            {"cycles", std::move(ranked)},
            {"disregarded", std::move(disregarded)},
            {"summary",
             {{"cycle_count", cys.size()},
              {"ranked_count", ranked_count},
              {"disregarded_count", disregarded_count},
              {"nonzero_spread_count", nonzero_spread}}}};
        return report;
    }

    CnsResult centrality_cns(const std::vector<Token>& members,
                             const std::vector<Token>& subject,
                             const std::vector<double>& rho, std::size_t ci,
                             std::uint64_t measure_idx) const {
        std::vector<bool> in_subject(members.size(), false);
        double r_sub = 0.0;
        for (const Token t : subject) {
            const auto it =
                std::lower_bound(members.begin(), members.end(), t);
            if (it == members.end() || *it != t)
                throw DataError("cycle node not in its community artifact");
            const auto pos = static_cast<std::size_t>(it - members.begin());
            in_subject[pos] = true;
            r_sub += rho[pos];
        }
        std::vector<std::uint32_t> pool;
        pool.reserve(members.size() - subject.size());
        for (std::uint32_t i = 0; i < members.size(); ++i)
            if (!in_subject[i]) pool.push_back(i);
        Rng rng(derive_seed(cfg_.seed, seed_domain::cns_centrality, ci,
                            measure_idx));
        return cns_from_pool(r_sub, subject.size(), pool.size(), cfg_.m, rng,
                             [&](std::span<const std::uint32_t> pick) {
                                 double s = 0.0;
                                 for (const auto i : pick) s += rho[pool[i]];
                                 return s;
                             });
    }

    std::map<std::uint32_t, CentralityColumns> load_centrality_columns(
        const std::map<std::uint32_t, std::vector<Token>>& members) const {
        std::map<std::uint32_t, CentralityColumns> out;
        std::ifstream in(artifact_path(artifact::centrality));
        std::string line;
        bool header_seen = false;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty() || line[0] == '#') continue;
            if (!header_seen) {
                header_seen = true;
                continue;
            }
            const auto fields = detail::split(line, ',');
            if (fields.size() != 7)
                throw DataError("centrality artifact: bad row at line " +
                                std::to_string(line_no));
            std::uint32_t community;
            Token token;
            try {
                community = static_cast<std::uint32_t>(
                    std::stoul(std::string(fields[0])));
                token = std::stoll(std::string(fields[1]));
            } catch (const std::exception&) {
                throw DataError("centrality artifact: bad row at line " +
                                std::to_string(line_no));
            }
            const auto mit = members.find(community);
            if (mit == members.end())
                throw DataError("centrality artifact: unknown community " +
                                std::to_string(community));
            const auto& mem = mit->second;
            const auto pos_it =
                std::lower_bound(mem.begin(), mem.end(), token);
            if (pos_it == mem.end() || *pos_it != token)
                throw DataError("centrality artifact: account " +
                                std::to_string(token) +
                                " not in community " +
                                std::to_string(community));
            auto& col = out[community];
            if (col.betweenness.empty()) {
                col.betweenness.resize(mem.size());
                col.degree.resize(mem.size());
                col.closeness.resize(mem.size());
                col.con.resize(mem.size());
                col.pagerank.resize(mem.size());
            }
            const auto pos = static_cast<std::size_t>(pos_it - mem.begin());
            try {
                col.betweenness[pos] = std::stod(std::string(fields[2]));
                col.degree[pos] = std::stod(std::string(fields[3]));
                col.closeness[pos] = std::stod(std::string(fields[4]));
                col.con[pos] = std::stod(std::string(fields[5]));
                col.pagerank[pos] = std::stod(std::string(fields[6]));
            } catch (const std::exception&) {
                throw DataError("centrality artifact: bad value at line " +
                                std::to_string(line_no));
            }
        }
        return out;
    }

    RPrimeTable load_r_prime_table(std::size_t cycle_count) const {
        RPrimeTable table;
        std::ifstream in(artifact_path(artifact::r_prime));
        std::string line;
        bool header_seen = false;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty() || line[0] == '#') continue;
            if (!header_seen) {
                header_seen = true;
                continue;
            }
            const auto fields = detail::split(line, ',');
            if (fields.size() != 5)
                throw DataError("r_prime artifact: bad row at line " +
                                std::to_string(line_no));
            try {
                const auto run = static_cast<std::size_t>(
                    std::stoul(std::string(fields[0])));
                if (run >= table.runs.size()) table.runs.resize(run + 1);
                auto& r = table.runs[run];
                r.p = std::stod(std::string(fields[1]));
                r.q = std::stod(std::string(fields[2]));
                const auto ci = static_cast<std::size_t>(
                    std::stoul(std::string(fields[3])));
                if (ci >= cycle_count)
                    throw DataError(
                        "r_prime artifact: cycle id out of range at line " +
                        std::to_string(line_no));
                if (r.r_prime.empty())
                    r.r_prime.assign(cycle_count, CnsValue::disregard());
                const std::string value(fields[4]);
                if (value == "null")
                    r.r_prime[ci] = CnsValue::disregard();
                else if (value == "inf")
                    r.r_prime[ci] = CnsValue::inf();
                else
                    r.r_prime[ci] = CnsValue::of(std::stod(value));
            } catch (const DataError&) {
                throw;
            } catch (const std::exception&) {
                throw DataError("r_prime artifact: bad row at line " +
                                std::to_string(line_no));
            }
        }
        if (table.runs.empty())
            throw DataError("r_prime artifact has no runs");
        for (auto& run : table.runs)
            if (run.r_prime.size() != cycle_count)
                run.r_prime.resize(cycle_count, CnsValue::disregard());
        return table;
    }

    static json cns_json(const CnsValue& v) {
        json out = {{"state", v.is_finite()
                                  ? "finite"
                                  : (v.is_infinite() ? "infinite"
                                                     : "disregarded")}};
        out["value"] = v.is_finite() ? json(v.value) : json(nullptr);
        return out;
    }

    static json opt_json(const std::optional<double>& v) {
        return v ? json(*v) : json(nullptr);
    }

    static std::string null_reason(const CycleScoreCard& card) {
        auto describe = [](const CnsValue& v, const char* name)
            -> std::optional<std::string> {
            if (v.is_disregarded())
                return std::string(name) + ": community too small to sample";
            if (v.is_infinite())
                return std::string(name) + ": zero random baseline";
            return std::nullopt;
        };
        if (auto r = describe(card.cns_betweenness, "betweenness")) return *r;
        if (auto r = describe(card.cns_degree, "degree")) return *r;
        if (auto r = describe(card.cns_pagerank, "pagerank")) return *r;
        if (auto r = describe(card.cns_closeness, "closeness")) return *r;
        if (auto r = describe(card.cns_con, "con")) return *r;
        return "normalization degenerate";
    }

    PipelineConfig cfg_;
    bool force_ = false;
    fs::path out_;
    json manifest_;
};

// Convenience wrapper for the end-to-end run.
inline std::vector<StageOutcome> run_pipeline(const PipelineConfig& cfg,
                                              bool force = false) {
    PipelineRunner runner(cfg, force);
    return runner.run_all();
}

} // namespace anticent
