// anticent: rank directed transaction cycles by anti-centrality.
//
// The pipeline stages (ingest, communities, cycles, embed, centrality,
// score, report) are independently invocable and communicate through
// artifacts in the output directory; `run` executes all seven in order.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "anticent/pipeline.hpp"
#include "anticent/synth.hpp"

namespace {

using anticent::PipelineConfig;

struct CommonOpts {
    std::string config_path;
    bool force = false;
    std::optional<std::string> input, output_dir, grid_mode,
        centrality_variant, dispersion_mode;
    std::optional<double> max_avg_amount, resolution, percentile,
        learning_rate, min_learning_rate;
    std::optional<std::uint64_t> seed, path_limit;
    std::optional<std::uint32_t> cycle_min, cycle_max, path_min, path_max,
        walk_length, walks_per_node, dimension, window, negative_samples,
        epochs, k, grid_p_count, grid_q_count, m, threads;
    std::optional<bool> same_year, deterministic;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("-c,--config", o.config_path,
                    "pipeline config file (JSON); flags override its values")
        ->check(CLI::ExistingFile);
    cmd->add_flag("--force", o.force, "recompute even when cached");
    cmd->add_option("-i,--input", o.input, "raw edge list to ingest");
    cmd->add_option("-o,--output-dir", o.output_dir, "artifact directory");
    cmd->add_option("--max-avg-amount", o.max_avg_amount,
                    "cleaning: keep edges with average amount strictly below");
    cmd->add_flag("--same-year,!--no-same-year", o.same_year,
                  "cleaning: require start_year == end_year");
    cmd->add_option("--resolution", o.resolution, "community resolution");
    cmd->add_option("--cycle-min", o.cycle_min, "minimum cycle length");
    cmd->add_option("--cycle-max", o.cycle_max, "maximum cycle length");
    cmd->add_option("--path-min", o.path_min, "minimum path edge count");
    cmd->add_option("--path-max", o.path_max, "maximum path edge count");
    cmd->add_option("--path-limit", o.path_limit, "path enumeration cap");
    cmd->add_option("--walk-length", o.walk_length, "random walk length");
    cmd->add_option("--walks-per-node", o.walks_per_node, "walks per node");
    cmd->add_option("-d,--dimension", o.dimension, "embedding dimension");
    cmd->add_option("--window", o.window, "skip-gram window");
    cmd->add_option("--negative", o.negative_samples, "negative samples");
    cmd->add_option("--epochs", o.epochs, "training epochs");
    cmd->add_option("--learning-rate", o.learning_rate, "initial SGD rate");
    cmd->add_option("--min-learning-rate", o.min_learning_rate,
                    "learning rate floor");
    cmd->add_option("-k,--runs", o.k, "number of (p,q) embedding runs");
    cmd->add_option("--grid-mode", o.grid_mode, "diagonal or full");
    cmd->add_option("--grid-p-count", o.grid_p_count, "full grid p count");
    cmd->add_option("--grid-q-count", o.grid_q_count, "full grid q count");
    cmd->add_option("-m,--samples", o.m, "CNS sample count");
    cmd->add_option("--percentile", o.percentile, "spread outlier percentile");
    cmd->add_option("--variant", o.centrality_variant,
                    "R centrality variant: degree or pagerank");
    cmd->add_option("--dispersion-mode", o.dispersion_mode,
                    "set_relative or cycle_referenced");
    cmd->add_option("-s,--seed", o.seed, "master seed");
    cmd->add_option("-t,--threads", o.threads, "thread budget");
    cmd->add_flag("--deterministic,!--no-deterministic", o.deterministic,
                  "force reproducible single-threaded training");
}

PipelineConfig build_config(const CommonOpts& o) {
    PipelineConfig cfg;
    if (!o.config_path.empty()) cfg = PipelineConfig::load(o.config_path);
    auto apply = [](const auto& opt, auto& field) {
        if (opt) field = *opt;
    };
    apply(o.input, cfg.input);
    apply(o.output_dir, cfg.output_dir);
    apply(o.max_avg_amount, cfg.max_avg_amount);
    apply(o.same_year, cfg.require_same_year);
    apply(o.resolution, cfg.resolution);
    apply(o.cycle_min, cfg.cycle_min);
    apply(o.cycle_max, cfg.cycle_max);
    apply(o.path_min, cfg.path_min);
    apply(o.path_max, cfg.path_max);
    apply(o.path_limit, cfg.path_limit);
    apply(o.walk_length, cfg.walk_length);
    apply(o.walks_per_node, cfg.walks_per_node);
    apply(o.dimension, cfg.dimension);
    apply(o.window, cfg.window);
    apply(o.negative_samples, cfg.negative_samples);
    apply(o.epochs, cfg.epochs);
    apply(o.learning_rate, cfg.learning_rate);
    apply(o.min_learning_rate, cfg.min_learning_rate);
    apply(o.k, cfg.k);
    apply(o.grid_mode, cfg.grid_mode);
    apply(o.grid_p_count, cfg.grid_p_count);
    apply(o.grid_q_count, cfg.grid_q_count);
    apply(o.m, cfg.m);
    apply(o.percentile, cfg.percentile);
    apply(o.centrality_variant, cfg.centrality_variant);
    apply(o.dispersion_mode, cfg.dispersion_mode);
    apply(o.seed, cfg.seed);
    apply(o.threads, cfg.threads);
    apply(o.deterministic, cfg.deterministic);
    cfg.validate();
    return cfg;
}

template <typename Fn>
auto tag_stage(const char* stage, Fn&& fn) {
    try {
        return fn();
    } catch (const anticent::UsageError& e) {
        throw anticent::UsageError(std::string("[") + stage + "] " + e.what());
    } catch (const anticent::InternalError& e) {
        throw anticent::InternalError(std::string("[") + stage + "] " +
                                      e.what());
    } catch (const anticent::DataError& e) {
        throw anticent::DataError(std::string("[") + stage + "] " + e.what());
    }
}

void print_outcome(const anticent::StageOutcome& oc) {
    std::cout << oc.stage << ": ";
    for (std::size_t i = 0; i < oc.artifacts.size(); ++i)
        std::cout << (i ? ", " : "") << oc.artifacts[i];
    std::cout << (oc.from_cache ? " (cached)" : "") << '\n';
}

struct SynthOpts {
    std::uint32_t communities = 5;
    std::uint32_t size_lo = 180;
    std::uint32_t size_hi = 220;
    double density = 0.06;
    std::uint32_t inter_edges = 40;
    std::vector<std::string> plant;
    std::uint64_t seed = 0;
    std::uint32_t clusters = 5;
    double cross_divisor = 8.0;
    double planted_scale = 0.05;
    std::string out = "synth_edges.csv";
    std::string truth;
};

int run_synth(const SynthOpts& so) {
    anticent::SynthSpec spec;
    spec.community_count = so.communities;
    spec.community_size_range = {so.size_lo, so.size_hi};
    spec.intra_density = so.density;
    spec.inter_edge_count = so.inter_edges;
    spec.seed = so.seed;
    spec.clusters_per_community = so.clusters;
    spec.cross_cluster_divisor = so.cross_divisor;
    spec.planted_amount_scale = so.planted_scale;
    for (const auto& p : so.plant) {
        const auto colon = p.find(':');
        anticent::PlantedCycleSpec pc;
        try {
            pc.length = static_cast<std::uint32_t>(
                std::stoul(p.substr(0, colon)));
        } catch (const std::exception&) {
            throw anticent::UsageError("bad --plant value: " + p);
        }
        if (colon != std::string::npos)
            pc.attachment =
                anticent::attachment_from_string(p.substr(colon + 1));
        spec.planted.push_back(pc);
    }

    const auto result = anticent::generate(spec);
    std::ofstream out(so.out);
    if (!out) throw anticent::DataError("cannot write " + so.out);
    anticent::write_edge_list(
        out, result.edges, ',',
        {"synthetic network seed=" + std::to_string(spec.seed)});
    out.close();

    const std::string truth_path =
        so.truth.empty() ? so.out + ".truth.json" : so.truth;
    anticent::json truth = {
        {"seed", spec.seed},
        {"node_count", result.graph.node_count()},
        {"edge_count", result.graph.edge_count()},
        {"community_count", spec.community_count},
        {"community", result.community_of_node},
        {"cluster", result.cluster_of_node},
        {"planted", anticent::json::array()}};
    for (const auto& pc : result.planted)
        truth["planted"].push_back({{"tokens", pc.tokens},
                                    {"attachment", to_string(pc.attachment)},
                                    {"community", pc.community}});
    std::ofstream tout(truth_path);
    if (!tout) throw anticent::DataError("cannot write " + truth_path);
    tout << truth.dump(2) << '\n';
    std::cout << "synth: " << so.out << " (" << result.graph.node_count()
              << " nodes, " << result.graph.edge_count() << " edges), "
              << truth_path << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"anti-centrality cycle ranking for transaction networks"};
    app.require_subcommand(1);

    CommonOpts opts;
    SynthOpts synth_opts;
    std::string save_config;

    auto* c_ingest = app.add_subcommand(
        "ingest", "parse, clean, and canonicalize the raw edge list");
    auto* c_comm = app.add_subcommand(
        "communities", "detect communities on the cleaned graph");
    auto* c_cycles =
        app.add_subcommand("cycles", "enumerate per-community cycles");
    auto* c_paths = app.add_subcommand(
        "paths", "enumerate long simple paths in cycle communities");
    auto* c_embed = app.add_subcommand(
        "embed", "train the k (p,q) embedding runs");
    auto* c_centrality = app.add_subcommand(
        "centrality", "per-community centrality table");
    auto* c_score =
        app.add_subcommand("score", "per-run cycle dispersion ratios r'");
    auto* c_report = app.add_subcommand(
        "report", "spread numbers, CNS values, and the ranked R report");
    auto* c_run = app.add_subcommand("run", "all pipeline stages in order");
    auto* c_validate = app.add_subcommand(
        "validate", "check artifact hashes against the manifest");
    auto* c_stats =
        app.add_subcommand("stats", "summarize the artifacts on disk");
    for (auto* cmd : {c_ingest, c_comm, c_cycles, c_paths, c_embed,
                      c_centrality, c_score, c_report, c_run, c_validate,
                      c_stats})
        add_common(cmd, opts);
    c_run->add_option("--save-config", save_config,
                      "write the effective config to this file");

    auto* c_synth = app.add_subcommand(
        "synth", "generate a synthetic network with planted cycles");
    c_synth->add_option("--communities", synth_opts.communities,
                        "community count");
    c_synth->add_option("--size-lo", synth_opts.size_lo,
                        "community size lower bound");
    c_synth->add_option("--size-hi", synth_opts.size_hi,
                        "community size upper bound");
    c_synth->add_option("--density", synth_opts.density,
                        "within-cluster edge probability");
    c_synth->add_option("--inter-edges", synth_opts.inter_edges,
                        "edges between communities");
    c_synth->add_option("--plant", synth_opts.plant,
                        "planted cycle as LENGTH[:ATTACHMENT], repeatable; "
                        "attachment in {anti_central, central, random}");
    c_synth->add_option("--clusters", synth_opts.clusters,
                        "clusters per community");
    c_synth->add_option("--cross-divisor", synth_opts.cross_divisor,
                        "cross-cluster probability divisor");
    c_synth->add_option("--planted-scale", synth_opts.planted_scale,
                        "amount scale for planted cycle edges");
    c_synth->add_option("-s,--seed", synth_opts.seed, "generator seed");
    c_synth->add_option("-o,--out", synth_opts.out, "edge list output path");
    c_synth->add_option("--truth", synth_opts.truth,
                        "ground truth output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (c_synth->parsed()) return run_synth(synth_opts);

        const PipelineConfig cfg = build_config(opts);
        anticent::PipelineRunner runner(cfg, opts.force);

        if (c_validate->parsed()) {
            const auto statuses = runner.validate_artifacts();
            bool all_ok = true;
            for (const auto& [name, status] : statuses.items()) {
                std::cout << name << ": " << status.get<std::string>()
                          << '\n';
                all_ok = all_ok && status == "ok";
            }
            if (statuses.empty()) std::cout << "no tracked artifacts\n";
            if (!all_ok) {
                std::cerr << "data error: artifact verification failed\n";
                return 2;
            }
            return 0;
        }
        if (c_stats->parsed()) {
            std::cout << runner.stats().dump(2) << '\n';
            return 0;
        }
        if (c_run->parsed()) {
            if (!save_config.empty()) cfg.save(save_config);
            print_outcome(tag_stage("ingest", [&] { return runner.ingest(); }));
            print_outcome(
                tag_stage("communities", [&] { return runner.communities(); }));
            print_outcome(tag_stage("cycles", [&] { return runner.cycles(); }));
            print_outcome(tag_stage("embed", [&] { return runner.embed(); }));
            print_outcome(
                tag_stage("centrality", [&] { return runner.centrality(); }));
            print_outcome(tag_stage("score", [&] { return runner.score(); }));
            print_outcome(tag_stage("report", [&] { return runner.report(); }));
            return 0;
        }

        anticent::StageOutcome oc;
        if (c_ingest->parsed())
            oc = tag_stage("ingest", [&] { return runner.ingest(); });
        else if (c_comm->parsed())
            oc = tag_stage("communities",
                           [&] { return runner.communities(); });
        else if (c_cycles->parsed())
            oc = tag_stage("cycles", [&] { return runner.cycles(); });
        else if (c_paths->parsed())
            oc = tag_stage("paths", [&] { return runner.paths(); });
        else if (c_embed->parsed())
            oc = tag_stage("embed", [&] { return runner.embed(); });
        else if (c_centrality->parsed())
            oc = tag_stage("centrality", [&] { return runner.centrality(); });
        else if (c_score->parsed())
            oc = tag_stage("score", [&] { return runner.score(); });
        else if (c_report->parsed())
            oc = tag_stage("report", [&] { return runner.report(); });
        print_outcome(oc);
        return 0;
    } catch (const anticent::UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const anticent::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
}
