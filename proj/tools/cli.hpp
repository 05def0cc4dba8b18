#pragma once

// Command-line front end. Kept in a header so the test suite can drive the
// commands in-process.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "specchain/specchain.hpp"

namespace specchain::cli {

enum ExitCode : int { ok = 0, input_error = 1, runtime_error = 2 };

class IoError : public Error {
public:
    using Error::Error;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes through a temporary sibling and renames it into place.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + path);
        out << content;
        if (!out.flush()) throw IoError("cannot write " + path);
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot write " + path);
    }
}

/// 64-bit FNV-1a, used to fingerprint input files in manifests.
inline std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string format_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string records_csv(const std::vector<EnsembleRecord>& records) {
    std::string out = "chain_id,step,cut_edges,pop_dev,seed,attempts\n";
    for (const auto& r : records) {
        out += std::to_string(r.chain_id) + "," + std::to_string(r.step_index) + "," +
               std::to_string(r.cut_edge_count) + "," + format_real(r.pop_dev) + "," +
               std::to_string(r.seed_used) + "," + std::to_string(r.attempts_used) + "\n";
    }
    return out;
}

inline std::string aggregate_csv(const std::vector<EnsemblePlan>& plans) {
    std::string out = "plan_index,cut_edges,pop_dev,seed,attempts_total\n";
    for (std::size_t i = 0; i < plans.size(); ++i) {
        out += std::to_string(i) + "," + std::to_string(plans[i].cut_edges) + "," +
               format_real(plans[i].pop_dev) + "," + std::to_string(plans[i].seed) + "," +
               std::to_string(plans[i].attempts_total) + "\n";
    }
    return out;
}

inline nlohmann::ordered_json metrics_json(const Graph& g, const Partition& p) {
    const PlanMetrics m = plan_metrics(g, p);
    return {{"cut_edges", m.cut_edge_count},
            {"pop_dev", m.pop_dev},
            {"parts_connected", m.parts_connected},
            {"part_sizes", m.part_sizes},
            {"part_weights", m.part_weights}};
}

struct Manifest {
    nlohmann::ordered_json doc;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    explicit Manifest(const std::string& command) {
        doc["command"] = command;
        doc["version"] = version;
    }

    void write(const std::string& path, const std::vector<std::string>& outputs) {
        doc["outputs"] = outputs;
        doc["duration_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_file_atomic(path, doc.dump(2) + "\n");
    }
};

struct RunFlags {
    std::string graph, assignment, algorithm = "specrecom";
    std::size_t steps = 0, k = 0, max_attempts = 1000;
    std::uint64_t seed = 0;
    double eps = 0.01;
    bool popdev_constraint = false;
};

inline void add_run_flags(CLI::App* cmd, RunFlags& f) {
    cmd->add_option("--graph", f.graph, "Graph JSON file")->required();
    cmd->add_option("--assignment", f.assignment, "Initial assignment JSON file")->required();
    cmd->add_option("--algorithm", f.algorithm, "specrecom | balspecrecom | treerecom")
        ->check(CLI::IsMember({"specrecom", "balspecrecom", "treerecom"}));
    cmd->add_option("--steps", f.steps, "Accepted steps per chain")->required();
    cmd->add_option("--k", f.k, "Number of parts")->required()->check(CLI::PositiveNumber);
    cmd->add_option("--seed", f.seed, "Master seed");
    cmd->add_option("--eps", f.eps, "Balance tolerance")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--max-attempts", f.max_attempts, "Proposal attempts allowed per step")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--popdev-constraint", f.popdev_constraint,
                  "Also require popDev <= eps for every state");
}

inline ChainConfig make_config(const RunFlags& f) {
    ChainConfig cfg;
    cfg.algorithm = *parse_algorithm(f.algorithm);
    cfg.steps = f.steps;
    cfg.k = f.k;
    cfg.master_seed = f.seed;
    cfg.eps = f.eps;
    cfg.max_attempts_per_step = f.max_attempts;
    if (f.popdev_constraint) cfg.constraints.push_back(Constraint::popdev);
    return cfg;
}

inline nlohmann::ordered_json config_json(const ChainConfig& cfg) {
    std::vector<std::string> constraints;
    for (Constraint c : cfg.constraints) constraints.emplace_back(to_string(c));
    return {{"algorithm", to_string(cfg.algorithm)},
            {"steps", cfg.steps},
            {"k", cfg.k},
            {"master_seed", cfg.master_seed},
            {"eps", cfg.eps},
            {"constraints", constraints},
            {"max_attempts_per_step", cfg.max_attempts_per_step}};
}

struct Inputs {
    Graph graph;
    Partition partition;
    std::string graph_hash;
};

inline Inputs load_inputs(const std::string& graph_path, const std::string& assignment_path) {
    Inputs in;
    const std::string bytes = read_file(graph_path);
    in.graph = load_graph(bytes);
    in.graph_hash = fnv1a_hex(bytes);
    if (!assignment_path.empty()) in.partition = load_partition(read_file(assignment_path), in.graph);
    return in;
}

inline std::size_t default_jobs() {
    if (const char* env = std::getenv("SPECCHAIN_JOBS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
    }
    return 1;
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
    CLI::App app{"Spectral recombination sampler for connected graph partitions"};
    app.require_subcommand(1);

    struct {
        std::size_t side = 0, k = 0;
        std::string graph_out, assignment_out;
    } grid;
    auto* gen = app.add_subcommand("gen-grid", "Write a square grid graph and its row-band plan");
    gen->add_option("--side", grid.side, "Vertices per side")->required()->check(CLI::PositiveNumber);
    gen->add_option("--k", grid.k, "Number of bands")->required()->check(CLI::PositiveNumber);
    gen->add_option("--graph-out", grid.graph_out)->required();
    gen->add_option("--assignment-out", grid.assignment_out)->required();

    RunFlags run_flags;
    std::string records_out, final_out;
    auto* run_cmd = app.add_subcommand("run", "Run one chain");
    add_run_flags(run_cmd, run_flags);
    run_cmd->add_option("--records-out", records_out, "Per-step CSV")->required();
    run_cmd->add_option("--final-out", final_out, "Final assignment JSON")->required();

    RunFlags ens_flags;
    std::size_t count = 0, jobs = default_jobs();
    std::string mode = "independent", out_dir;
    auto* ens = app.add_subcommand("ensemble", "Generate an ensemble of plans");
    add_run_flags(ens, ens_flags);
    ens->add_option("--count", count, "Number of plans")->required()->check(CLI::PositiveNumber);
    ens->add_option("--mode", mode, "independent | subsample")
        ->check(CLI::IsMember({"independent", "subsample"}));
    ens->add_option("--out-dir", out_dir)->required();
    ens->add_option("--jobs", jobs, "Worker threads for independent mode")->check(CLI::PositiveNumber);

    struct {
        std::string graph, out;
        std::size_t k = 0;
        std::uint64_t seed = 0;
    } km;
    auto* kmeans = app.add_subcommand("speckmeans", "Spectral k-means baseline plan");
    kmeans->add_option("--graph", km.graph)->required();
    kmeans->add_option("--k", km.k)->required()->check(CLI::PositiveNumber);
    kmeans->add_option("--seed", km.seed);
    kmeans->add_option("--out", km.out)->required();

    std::string stats_graph, stats_assignment;
    auto* stats = app.add_subcommand("stats", "Report metrics of an assignment");
    stats->add_option("--graph", stats_graph)->required();
    stats->add_option("--assignment", stats_assignment)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    }

    try {
        if (*gen) {
            if (grid.k > grid.side) {
                err << "error: --k must not exceed --side\n";
                return input_error;
            }
            Manifest manifest("gen-grid");
            manifest.doc["side"] = grid.side;
            manifest.doc["k"] = grid.k;
            auto [g, p] = make_grid(grid.side, grid.k);
            write_file_atomic(grid.graph_out, save_graph(g));
            write_file_atomic(grid.assignment_out, save_partition(g, p));
            manifest.write(grid.graph_out + ".manifest.json", {grid.graph_out, grid.assignment_out});
            out << nlohmann::ordered_json{{"vertices", g.vertex_count()}, {"edges", g.edge_count()}, {"k", p.k()}}.dump()
                << "\n";
            return ok;
        }
        if (*run_cmd) {
            Manifest manifest("run");
            const ChainConfig cfg = make_config(run_flags);
            Inputs in = load_inputs(run_flags.graph, run_flags.assignment);
            manifest.doc["config"] = config_json(cfg);
            manifest.doc["graph"] = {{"path", run_flags.graph}, {"fnv1a64", in.graph_hash}};
            manifest.doc["initial_partition"] = run_flags.assignment;
            ChainResult result = run_chain(in.graph, in.partition, cfg);
            write_file_atomic(records_out, records_csv(result.records));
            write_file_atomic(final_out, save_partition(in.graph, result.final_partition));
            manifest.write(final_out + ".manifest.json", {records_out, final_out});
            auto line = metrics_json(in.graph, result.final_partition);
            out << nlohmann::ordered_json{{"cut_edges", line["cut_edges"]}, {"pop_dev", line["pop_dev"]}}.dump()
                << "\n";
            return ok;
        }
        if (*ens) {
            Manifest manifest("ensemble");
            const ChainConfig cfg = make_config(ens_flags);
            Inputs in = load_inputs(ens_flags.graph, ens_flags.assignment);
            manifest.doc["config"] = config_json(cfg);
            manifest.doc["count"] = count;
            manifest.doc["mode"] = mode;
            manifest.doc["graph"] = {{"path", ens_flags.graph}, {"fnv1a64", in.graph_hash}};
            manifest.doc["initial_partition"] = ens_flags.assignment;
            const auto m = mode == "subsample" ? EnsembleMode::subsample : EnsembleMode::independent;
            EnsembleResult result = run_ensemble(in.graph, in.partition, cfg, count, m, jobs);

            namespace fs = std::filesystem;
            std::error_code ec;
            fs::create_directories(out_dir, ec);
            if (ec) throw IoError("cannot create " + out_dir);
            std::vector<std::string> outputs;
            for (std::size_t i = 0; i < result.plans.size(); ++i) {
                char name[32];
                std::snprintf(name, sizeof name, "plan_%05zu.json", i);
                const std::string path = (fs::path(out_dir) / name).string();
                write_file_atomic(path, save_partition(in.graph, result.plans[i].partition));
                outputs.push_back(path);
            }
            const std::string csv = (fs::path(out_dir) / "ensemble.csv").string();
            write_file_atomic(csv, aggregate_csv(result.plans));
            outputs.push_back(csv);
            manifest.write((fs::path(out_dir) / "manifest.json").string(), outputs);
            out << nlohmann::ordered_json{{"plans", result.plans.size()}, {"aggregate", csv}}.dump() << "\n";
            return ok;
        }
        if (*kmeans) {
            Manifest manifest("speckmeans");
            Inputs in = load_inputs(km.graph, "");
            if (km.k < 2 || km.k > in.graph.vertex_count()) {
                err << "error: --k must lie in [2, vertex count]\n";
                return input_error;
            }
            manifest.doc["k"] = km.k;
            manifest.doc["seed"] = km.seed;
            manifest.doc["graph"] = {{"path", km.graph}, {"fnv1a64", in.graph_hash}};
            Partition p = speckmeans(in.graph, km.k, km.seed);
            write_file_atomic(km.out, save_partition(in.graph, p));
            manifest.write(km.out + ".manifest.json", {km.out});
            out << metrics_json(in.graph, p).dump() << "\n";
            return ok;
        }
        if (*stats) {
            Inputs in = load_inputs(stats_graph, stats_assignment);
            out << metrics_json(in.graph, in.partition).dump() << "\n";
            return ok;
        }
    } catch (const StuckChainError& e) {
        err << "error: " << e.what() << "\n";
        return runtime_error;
    } catch (const SolverError& e) {
        err << "error: " << e.what() << "\n";
        return runtime_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    }
    return input_error;
}

}  // namespace specchain::cli
