// stvs: command-line driver for data generation, training, evaluation,
// transfer, ablations and exports.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stvs/core/error.hpp"
#include "stvs/core/io.hpp"
#include "stvs/core/version.hpp"
#include "stvs/dynamics/simulate.hpp"
#include "stvs/dynamics/trajectory_io.hpp"
#include "stvs/features/features.hpp"
#include "stvs/features/heatmap.hpp"
#include "stvs/grid/io.hpp"
#include "stvs/harness/dataset.hpp"
#include "stvs/harness/experiments.hpp"
#include "stvs/nn/checkpoint.hpp"
#include "stvs/nn/train.hpp"
#include "stvs/steady_state/load_matrix.hpp"
#include "stvs/steady_state/power_flow.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int verbosity = 1;

void info(const std::string& msg) {
    if (verbosity >= 1) std::cerr << msg << '\n';
}

void debug(const std::string& msg) {
    if (verbosity >= 2) std::cerr << msg << '\n';
}

unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

std::vector<double> parse_doubles(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw stvs::ArgumentError("'" + item + "' is not a number");
        }
    }
    if (out.empty()) throw stvs::ArgumentError("empty number list");
    return out;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
    std::vector<std::size_t> out;
    for (double v : parse_doubles(text)) {
        if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
            throw stvs::ArgumentError("sizes must be non-negative integers");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

std::array<int, 4> parse_channels(const std::string& text) {
    const auto v = parse_doubles(text);
    if (v.size() != 4) throw stvs::ArgumentError("--channels needs four comma-separated widths");
    std::array<int, 4> c{};
    for (std::size_t i = 0; i < 4; ++i) c[i] = static_cast<int>(v[i]);
    return c;
}

std::string channels_text(const std::array<int, 4>& c) {
    return std::to_string(c[0]) + "," + std::to_string(c[1]) + "," + std::to_string(c[2]) + "," +
           std::to_string(c[3]);
}

stvs::GridModel load_topology(const std::string& source, const std::string& lines) {
    auto grid = stvs::load_grid_source(source);
    if (lines.empty()) return grid;
    return stvs::disconnect_lines(grid, stvs::parse_lines(lines));
}

void write_report(const fs::path& dir, const std::string& stem, const std::string& text, const json& j) {
    stvs::io::atomic_write_text(dir / (stem + ".txt"), text);
    stvs::io::atomic_write_text(dir / (stem + ".json"), j.dump(2) + "\n");
}

json provenance() { return {{"stvs_version", stvs::kVersion}}; }

/// Training hyperparameters shared by train, ablate and transfer.
struct TrainFlags {
    double lr = 1e-3;
    int batch = 64;
    int epochs = 50;
    int patience = 5;
    std::string optimizer = "adam";
    double finetune_lr_scale = 0.1;
    int finetune_epochs = 15;
    bool freeze_conv = false;

    void add(CLI::App* app, bool finetune) {
        app->add_option("--lr", lr, "Learning rate")->capture_default_str();
        app->add_option("--batch", batch, "Mini-batch size")->capture_default_str();
        app->add_option("--epochs", epochs, "Epoch budget")->capture_default_str();
        app->add_option("--patience", patience, "Early-stop patience in epochs (0 disables)")->capture_default_str();
        app->add_option("--optimizer", optimizer, "adam or sgd")
            ->check(CLI::IsMember({"adam", "sgd"}))
            ->capture_default_str();
        if (finetune) {
            app->add_option("--finetune-lr-scale", finetune_lr_scale, "Fine-tune learning rate as a fraction of --lr")
                ->capture_default_str();
            app->add_option("--finetune-epochs", finetune_epochs, "Fine-tune epochs")->capture_default_str();
            app->add_flag("--freeze-conv", freeze_conv, "Fine-tune only the dense head");
        }
    }

    stvs::nn::TrainConfig config(std::uint64_t seed) const {
        stvs::nn::TrainConfig c;
        c.learning_rate = lr;
        c.batch_size = batch;
        c.epochs = epochs;
        c.patience = patience;
        c.optimizer = optimizer == "sgd" ? stvs::nn::OptimizerKind::sgd : stvs::nn::OptimizerKind::adam;
        c.finetune_lr_scale = finetune_lr_scale;
        c.finetune_epochs = finetune_epochs;
        c.freeze_conv = freeze_conv;
        c.seed = seed;
        c.validate();
        return c;
    }
};

// ---------------------------------------------------------------------------

struct PowerFlowCmd {
    std::string grid = "builtin:ne39", lines, out;
    double load_scale = 1.0;

    void add(CLI::App& root) {
        auto* c = root.add_subcommand("power-flow", "Solve the AC power flow and print bus voltages");
        c->add_option("--grid", grid, "Grid JSON path or builtin:ne39")->capture_default_str();
        c->add_option("--lines", lines, "Lines out of service, e.g. 2-3,5-8");
        c->add_option("--load-scale", load_scale, "Load multiplier")->capture_default_str();
        c->add_option("--out", out, "Write the solution as JSON to this file");
        c->callback([this] { run(); });
    }

    void run() const {
        const auto g = load_topology(grid, lines);
        const auto op = stvs::solve_power_flow(g, load_scale);
        const auto part = stvs::susceptance_partition(g);
        const auto lm = stvs::load_matrix(part, op.v_gen);
        const double delta = stvs::stability_index(lm, stvs::reactive_demand(op.v_load, part, op.v_gen));
        std::printf("topology %s  load_scale %.4f  iterations %d  mismatch %.3e  Delta %.6f\n",
                    op.topology_id.c_str(), op.load_scale, op.iterations, op.mismatch, delta);
        std::printf("%5s %10s %12s %12s %12s\n", "bus", "Vm (p.u.)", "Va (deg)", "P (p.u.)", "Q (p.u.)");
        json buses = json::array();
        for (std::size_t i = 0; i < g.buses().size(); ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            const double vm = std::abs(op.v[k]), va = std::arg(op.v[k]) * 180.0 / std::numbers::pi;
            std::printf("%5d %10.6f %12.6f %12.6f %12.6f\n", g.buses()[i].id, vm, va, op.p_inj[k], op.q_inj[k]);
            buses.push_back({{"id", g.buses()[i].id}, {"vm", vm}, {"va_deg", va}, {"p", op.p_inj[k]}, {"q", op.q_inj[k]}});
        }
        if (!out.empty()) {
            json j = provenance();
            j.update({{"topology_id", op.topology_id},
                      {"load_scale", op.load_scale},
                      {"iterations", op.iterations},
                      {"mismatch", op.mismatch},
                      {"delta", delta},
                      {"buses", buses}});
            stvs::io::atomic_write_text(out, j.dump(2) + "\n");
            info("wrote " + out);
        }
    }
};

struct SimulateCmd {
    std::string grid = "builtin:ne39", lines, out, csv;
    double load_scale = 1.0, t_on = 0.1, duration = 0.1, post_fault = 5.0, dt = 0.01;
    double noise_mag = 0.0, noise_ang = 0.0;
    int fault_bus = 0;
    std::optional<std::uint64_t> seed;

    void add(CLI::App& root) {
        auto* c = root.add_subcommand("simulate", "Simulate one fault and write the voltage trajectory");
        c->add_option("--grid", grid, "Grid JSON path or builtin:ne39")->capture_default_str();
        c->add_option("--lines", lines, "Lines out of service, e.g. 2-3");
        c->add_option("--load-scale", load_scale, "Load multiplier")->capture_default_str();
        c->add_option("--fault-bus", fault_bus, "Faulted bus id")->required();
        c->add_option("--t-on", t_on, "Fault inception (s)")->capture_default_str();
        c->add_option("--duration", duration, "Fault duration (s)")->capture_default_str();
        c->add_option("--post-fault", post_fault, "Simulated time after inception (s)")->capture_default_str();
        c->add_option("--dt", dt, "Integration and sampling step (s)")->capture_default_str();
        c->add_option("--noise-mag", noise_mag, "PMU magnitude noise sigma (p.u.)")->capture_default_str();
        c->add_option("--noise-ang", noise_ang, "PMU angle noise sigma (degrees)")->capture_default_str();
        c->add_option("--seed", seed, "Noise seed (required with noise)");
        c->add_option("--out", out, "Trajectory binary; a .json sidecar is written next to it")->required();
        c->add_option("--csv", csv, "Also write the trajectory as CSV");
        c->callback([this] { run(); });
    }

    void run() const {
        if ((noise_mag > 0.0 || noise_ang > 0.0) && !seed)
            throw stvs::ArgumentError("noise injection needs --seed");
        const auto g = load_topology(grid, lines);
        const auto op = stvs::solve_power_flow(g, load_scale);
        stvs::SimulationStats stats;
        auto tr = stvs::simulate(g, op, {fault_bus, t_on, duration, 1e4}, t_on + post_fault, dt, {}, &stats);
        const auto lab = stvs::label_trajectory(tr);
        if (seed) {
            tr.meta.seed = *seed;
            tr = stvs::inject_pmu_noise(tr, noise_mag, noise_ang, *seed);
        }
        stvs::write_trajectory(out, tr);
        if (!csv.empty()) stvs::write_trajectory_csv(csv, tr);
        std::printf("topology %s  fault bus %d  %.3f s  samples %lld%s\n", tr.meta.topology_id.c_str(), fault_bus,
                    duration, static_cast<long long>(tr.samples()), tr.meta.collapsed ? "  (collapsed)" : "");
        std::printf("label %s  longest dwell below 0.8 p.u. %.2f s at bus %d\n", stvs::to_string(lab.label),
                    lab.dwell, lab.worst_bus);
        debug("factorizations " + std::to_string(stats.factorizations) + ", network iterations " +
              std::to_string(stats.network_iterations));
        info("wrote " + out);
    }
};

struct GenDataCmd {
    stvs::DatasetSpec spec;
    std::string lines, out, policy = "load-side";
    std::uint64_t seed = 0;
    unsigned jobs = default_jobs();

    void add(CLI::App& root) {
        auto* c = root.add_subcommand("gen-data", "Generate a labeled feature dataset");
        c->add_option("--grid", spec.grid, "Grid JSON path or builtin:ne39")->capture_default_str();
        c->add_option("--lines", lines, "Lines out of service, e.g. 2-3,5-8");
        c->add_option("--count", spec.count, "Number of samples")->capture_default_str();
        c->add_option("--seed", seed, "Master seed")->required();
        c->add_option("--out", out, "Output directory")->required();
        c->add_option("--load-min", spec.load_min, "Lowest load multiplier")->capture_default_str();
        c->add_option("--load-max", spec.load_max, "Highest load multiplier")->capture_default_str();
        c->add_option("--duration-min", spec.duration_min, "Shortest fault (s)")->capture_default_str();
        c->add_option("--duration-max", spec.duration_max, "Longest fault (s)")->capture_default_str();
        c->add_option("--fault-policy", policy, "load-side, any-bus or fixed")
            ->check(CLI::IsMember({"load-side", "any-bus", "fixed"}))
            ->capture_default_str();
        c->add_option("--fault-bus", spec.fault_bus, "Faulted bus for --fault-policy fixed");
        c->add_option("--t-w", spec.t_w, "Feature window length (s)")->capture_default_str();
        c->add_option("--window-offset", spec.window_offset, "Window start after fault inception (s)")
            ->capture_default_str();
        c->add_option("--dt", spec.dt, "Sampling step (s)")->capture_default_str();
        c->add_option("--noise-mag", spec.noise_mag, "PMU magnitude noise sigma baked into the features (p.u.)")
            ->capture_default_str();
        c->add_option("--noise-ang", spec.noise_ang, "PMU angle noise sigma (degrees)")->capture_default_str();
        c->add_option("--min-class-fraction", spec.min_class_fraction, "Class floor for rejection balancing")
            ->capture_default_str();
        c->add_option("--rejection-budget", spec.rejection_budget, "Candidate draws allowed, as a multiple of --count")
            ->capture_default_str();
        c->add_option("--jobs", jobs, "Worker threads")->capture_default_str();
        c->callback([this] { run(); });
    }

    void run() {
        spec.seed = seed;
        spec.fault_policy = stvs::fault_policy_from_string(policy);
        if (!lines.empty()) spec.outages = stvs::parse_lines(lines);
        spec.validate();
        std::size_t last = 0;
        stvs::GenerateOptions opts{jobs, [&](std::size_t done) {
                                       if (verbosity >= 1 && (done - last >= 100 || done == spec.count)) {
                                           std::cerr << "\rsimulated " << done << " candidates" << std::flush;
                                           last = done;
                                       }
                                   }};
        const auto ds = stvs::generate_dataset(spec, opts);
        if (verbosity >= 1) std::cerr << '\n';
        stvs::save_dataset(out, ds);
        const auto u = ds.unstable_count();
        std::printf("topology %s  samples %zu  unstable %zu (%.1f%%)  stable %zu  candidates %zu\n",
                    ds.topology_id.c_str(), ds.size(), u, 100.0 * static_cast<double>(u) / ds.size(), ds.size() - u,
                    ds.candidates);
        std::printf("content hash %s\n", ds.content_hash().c_str());
        for (const auto& w : ds.warnings) std::cerr << "warning: " << w << '\n';
        info("wrote " + (fs::path(out) / "manifest.json").string());
    }
};

struct TrainCmd {
    std::string dataset, out, channels = channels_text(stvs::kDeskChannels), report;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> split_seed;
    std::size_t kfold = 0;
    TrainFlags flags;

    void add(CLI::App& root) {
        auto* c = root.add_subcommand("train", "Train a classifier on a 60/20/20 split of a dataset");
        c->add_option("--dataset", dataset, "Dataset directory")->required();
        c->add_option("--out", out, "Checkpoint path")->required();
        c->add_option("--seed", seed, "Training seed")->required();
        c->add_option("--split-seed", split_seed, "Split seed (defaults to --seed)");
        c->add_option("--channels", channels, "Conv widths of the four blocks")->capture_default_str();
        c->add_option("--kfold", kfold, "Also run k-fold evaluation with this k");
        c->add_option("--report", report, "Report directory (defaults to the checkpoint's directory)");
        flags.add(c, false);
        c->callback([this] { run(); });
    }

    void run() const {
        const auto ds = stvs::load_dataset(dataset);
        const auto cfg = flags.config(seed);
        stvs::ModelSpec ms;
        ms.channels = parse_channels(channels);
        const auto split = stvs::source_split(ds, split_seed.value_or(seed));
        info("training on " + std::to_string(split.train.size()) + " samples, validating on " +
             std::to_string(split.val.size()));
        auto run = stvs::run_source_experiment(ds, split, ms, cfg);
        for (const auto& e : run.log.epochs)
            debug("epoch " + std::to_string(e.epoch) + "  loss " + std::to_string(e.loss) + "  train " +
                  std::to_string(e.train_acc) + "  val " + std::to_string(e.val_acc));
        std::string text = "Test set (" + std::to_string(split.test.size()) + " samples, best epoch " +
                           std::to_string(run.log.best_epoch) + ")\n" + stvs::format_metrics("test", run.test);
        json j = provenance();
        j.update({{"dataset", ds.content_hash()},
                  {"train", stvs::nn::to_json(cfg)},
                  {"log", stvs::nn::to_json(run.log)},
                  {"test", stvs::to_json(run.test)}});
        if (kfold > 0) {
            const auto km = stvs::kfold_evaluate(ds.windows(), kfold, split_seed.value_or(seed),
                                                 stvs::cnn_fold_trainer(ms, cfg));
            text += "\n" + stvs::format_metrics(std::to_string(kfold) + "-fold", km);
            j["kfold"] = stvs::to_json(km);
        }
        json meta = provenance();
        meta.update({{"dataset_hash", ds.content_hash()},
                     {"dataset_spec", stvs::to_json(ds.spec)},
                     {"topology_id", ds.topology_id},
                     {"train", stvs::nn::to_json(cfg)},
                     {"split_seed", split_seed.value_or(seed)},
                     {"test", stvs::to_json(run.test)}});
        stvs::nn::save_checkpoint(out, run.model, meta);
        std::fputs(text.c_str(), stdout);
        const fs::path dir = report.empty() ? fs::absolute(out).parent_path() : fs::path(report);
        write_report(dir, fs::path(out).stem().string() + "-train", text, j);
        info("wrote " + out);
    }
};

struct EvalCmd {
    std::string model, dataset, subset = "all", report;
    std::optional<std::uint64_t> split_seed, seed;
    double noise_mag = 0.0, noise_ang = 0.0;

    void add(CLI::App& root) {
        auto* c = root.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
        c->add_option("--model", model, "Checkpoint path")->required();
        c->add_option("--dataset", dataset, "Dataset directory")->required();
        c->add_option("--subset", subset, "all, or test for the held-out part of a 60/20/20 split")
            ->check(CLI::IsMember({"all", "test"}))
            ->capture_default_str();
        c->add_option("--split-seed", split_seed, "Split seed for --subset test (defaults to the checkpoint's)");
        c->add_option("--noise-mag", noise_mag, "Evaluate on features with PMU magnitude noise (p.u.)")
            ->capture_default_str();
        c->add_option("--noise-ang", noise_ang, "PMU angle noise sigma (degrees)")->capture_default_str();
        c->add_option("--seed", seed, "Noise seed (required with noise)");
        c->add_option("--report", report, "Report directory");
        c->callback([this] { run(); });
    }

    void run() const {
        auto ck = stvs::nn::load_checkpoint<float>(model);
        const auto ds = stvs::load_dataset(dataset);
        std::vector<std::size_t> idx(ds.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        if (subset == "test") {
            std::uint64_t s = 0;
            if (split_seed) s = *split_seed;
            else if (ck.header.at("meta").contains("split_seed")) s = ck.header["meta"]["split_seed"].get<std::uint64_t>();
            else throw stvs::ArgumentError("--subset test needs --split-seed for this checkpoint");
            idx = stvs::source_split(ds, s).test;
        }
        const bool noisy = noise_mag > 0.0 || noise_ang > 0.0;
        if (noisy && !seed) throw stvs::ArgumentError("noise injection needs --seed");
        std::string text;
        json j = provenance();
        j.update({{"model", model}, {"dataset", ds.content_hash()}, {"samples", idx.size()}});
        if (noisy) {
            const auto r = stvs::run_noise_robustness(ck.model, ds, idx, noise_mag, noise_ang, *seed);
            text = stvs::format_noise(r);
            j["noise"] = stvs::to_json(r);
        } else {
            const auto m = stvs::evaluate(ck.model, ds.windows(idx));
            text = stvs::format_metrics(subset, m);
            j["metrics"] = stvs::to_json(m);
        }
        std::fputs(text.c_str(), stdout);
        if (!report.empty()) write_report(report, "eval", text, j);
    }
};

struct TransferCmd {
    std::string model, lines, scenarios, out, source_dataset;
    std::size_t finetune = 1000, test = 500;
    std::uint64_t seed = 0;
    unsigned jobs = default_jobs();
    TrainFlags flags;

    void add(CLI::App& root) {
        auto* c = root.add_subcommand("transfer", "Direct transfer and fine-tuning on changed topologies");
        c->add_option("--model", model, "Source checkpoint")->required();
        auto* l = c->add_option("--lines", lines, "One target topology given by its outaged lines, e.g. 2-3,5-8");
        c->add_option("--scenarios", scenarios, "Named topologies G1..G12, comma-separated, or 'all'")->excludes(l);
        c->add_option("--finetune", finetune, "Fine-tune samples per target")->capture_default_str();
        c->add_option("--test", test, "Test samples per target")->capture_default_str();
        c->add_option("--seed", seed, "Seed for target data and fine-tuning")->required();
        c->add_option("--out", out, "Report directory")->required();
        c->add_option("--source-dataset", source_dataset,
                      "Source dataset; its test split is re-scored after fine-tuning");
        c->add_option("--jobs", jobs, "Worker threads for target generation")->capture_default_str();
        flags.add(c, true);
        c->callback([this] { run(); });
    }

    std::vector<stvs::TopologyScenario> targets() const {
        if (!lines.empty()) {
            stvs::TopologyScenario s;
            s.lines = stvs::parse_lines(lines);
            s.group = s.lines.size() > 1 ? 'B' : 'A';
            s.name = "lines " + stvs::lines_text(s.lines);
            for (const auto& known : stvs::topology_scenarios())
                if (known.lines == s.lines) s.name = known.name;
            return {s};
        }
        if (scenarios.empty() || scenarios == "all") return stvs::topology_scenarios();
        std::vector<stvs::TopologyScenario> out;
        std::stringstream ss(scenarios);
        std::string name;
        while (std::getline(ss, name, ',')) out.push_back(stvs::topology_scenario(name));
        return out;
    }

    void run() const {
        auto ck = stvs::nn::load_checkpoint<float>(model);
        const auto& meta = ck.header.at("meta");
        stvs::TransferOptions opts;
        opts.finetune_count = finetune;
        opts.test_count = test;
        opts.jobs = jobs;
        if (meta.contains("dataset_spec")) opts.target_template = stvs::dataset_spec_from_json(meta["dataset_spec"]);
        opts.target_template.outages.clear();
        opts.target_template.seed = seed;
        opts.log = [](const std::string& m) { info(m); };
        const auto arch = ck.model.arch();
        if (static_cast<int>(std::llround(opts.target_template.t_w / opts.target_template.dt)) != arch.cols)
            throw stvs::ArgumentError("checkpoint window of " + std::to_string(arch.cols) +
                                      " columns does not match its dataset spec");

        std::optional<stvs::nn::WindowSet> source_test;
        if (!source_dataset.empty()) {
            const auto src = stvs::load_dataset(source_dataset);
            const auto s = meta.contains("split_seed") ? meta["split_seed"].get<std::uint64_t>() : seed;
            source_test = src.windows(stvs::source_split(src, s).test);
        }
        const auto cfg = flags.config(seed);
        const auto rows = stvs::run_transfer_suite(ck.model, targets(), opts, cfg, source_test ? &*source_test : nullptr);
        std::string text = stvs::format_transfer(rows);
        if (source_test) {
            text += "\nSource test accuracy after fine-tuning\n";
            for (const auto& r : rows) text += r.name + "  " + stvs::detail::fixed(r.source_accuracy_after) + "\n";
        }
        json j = provenance();
        j.update({{"model", model},
                  {"finetune", finetune},
                  {"test", test},
                  {"seed", seed},
                  {"train", stvs::nn::to_json(cfg)},
                  {"targets", stvs::rows_json(rows)}});
        std::fputs(text.c_str(), stdout);
        write_report(out, "transfer", text, j);
        info("wrote " + (fs::path(out) / "transfer.txt").string());
    }
};

struct AblateCmd {
    std::string dataset, kind, out, sizes = "500,2000,3000", windows = "0.1,0.2,0.4,0.8", model;
    std::string channels = channels_text(stvs::kDeskChannels);
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> split_seed;
    double noise_mag = 0.3, noise_ang = 1.5;
    TrainFlags flags;

    void add(CLI::App& root) {
        auto* c = root.add_subcommand("ablate", "Dataset-size, window-length or noise ablation");
        c->add_option("--dataset", dataset, "Dataset directory")->required();
        c->add_option("--kind", kind, "size, window or noise")->check(CLI::IsMember({"size", "window", "noise"}))->required();
        c->add_option("--seed", seed, "Training, ordering and noise seed")->required();
        c->add_option("--split-seed", split_seed, "Split seed (defaults to --seed)");
        c->add_option("--out", out, "Report directory")->required();
        c->add_option("--sizes", sizes, "Training-set sizes for --kind size")->capture_default_str();
        c->add_option("--windows", windows, "Window lengths in seconds for --kind window")->capture_default_str();
        c->add_option("--model", model, "Checkpoint for --kind noise (trained on the same split when omitted)");
        c->add_option("--noise-mag", noise_mag, "PMU magnitude noise sigma (p.u.)")->capture_default_str();
        c->add_option("--noise-ang", noise_ang, "PMU angle noise sigma (degrees)")->capture_default_str();
        c->add_option("--channels", channels, "Conv widths of the four blocks")->capture_default_str();
        flags.add(c, false);
        c->callback([this] { run(); });
    }

    void run() const {
        const auto ds = stvs::load_dataset(dataset);
        const auto split = stvs::source_split(ds, split_seed.value_or(seed));
        const auto cfg = flags.config(seed);
        stvs::ModelSpec ms;
        ms.channels = parse_channels(channels);
        std::string text;
        json j = provenance();
        j.update({{"dataset", ds.content_hash()}, {"kind", kind}, {"train", stvs::nn::to_json(cfg)}});
        if (kind == "size") {
            const auto rows = stvs::run_size_ablation(ds, split, parse_sizes(sizes), ms, cfg);
            text = stvs::format_size_ablation(rows);
            j["rows"] = stvs::rows_json(rows);
        } else if (kind == "window") {
            const auto rows = stvs::run_window_ablation(ds, split, parse_doubles(windows), ms, cfg);
            text = stvs::format_window_ablation(rows);
            j["rows"] = stvs::rows_json(rows);
        } else {
            stvs::nn::CnnClassifier<float> m;
            if (!model.empty()) {
                m = stvs::nn::load_checkpoint<float>(model).model;
            } else {
                info("training a clean model on the split");
                m = stvs::run_source_experiment(ds, split, ms, cfg).model;
            }
            const auto r = stvs::run_noise_robustness(m, ds, split.test, noise_mag, noise_ang, seed);
            text = stvs::format_noise(r);
            j["noise"] = stvs::to_json(r);
        }
        std::fputs(text.c_str(), stdout);
        write_report(out, "ablate-" + kind, text, j);
        info("wrote " + (fs::path(out) / ("ablate-" + kind + ".txt")).string());
    }
};

struct HeatmapCmd {
    std::string dataset, out, csv;
    std::size_t index = 0;
    bool voltage = false;

    void add(CLI::App& root) {
        auto* c = root.add_subcommand("heatmap", "Export one feature window as PGM and CSV");
        c->add_option("--dataset", dataset, "Dataset directory")->required();
        c->add_option("--index", index, "Sample index")->capture_default_str();
        c->add_option("--out", out, "PGM path; the CSV goes next to it unless --csv is given")->required();
        c->add_option("--csv", csv, "CSV path");
        c->add_flag("--voltage", voltage, "Export load-bus voltage magnitudes instead of features");
        c->callback([this] { run(); });
    }

    void run() const {
        const auto ds = stvs::load_dataset(dataset);
        const auto m = voltage ? ds.voltage_matrix(index) : ds.feature_matrix(index);
        const fs::path csv_path = csv.empty() ? fs::path(out).replace_extension(".csv") : fs::path(csv);
        stvs::write_heatmap_pgm(out, m);
        stvs::write_heatmap_csv(csv_path, m);
        const auto& r = ds.records[index];
        std::printf("sample %zu  %s  %lldx%lld  label %s  fault bus %d  %.3f s  load %.3f\n", index,
                    voltage ? "voltage" : "features", static_cast<long long>(m.rows()),
                    static_cast<long long>(m.cols()), r.label ? "unstable" : "stable", r.fault_bus, r.fault_duration,
                    r.load_scale);
        info("wrote " + out + " and " + csv_path.string());
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Short-term voltage stability assessment with topology-aware features"};
    app.set_version_flag("--version", std::string("stvs ") + stvs::kVersion);
    app.require_subcommand(1);
    bool verbose = false, quiet = false;
    app.add_flag("-v,--verbose", verbose, "Print per-epoch and solver details");
    app.add_flag("-q,--quiet", quiet, "Print results only");

    PowerFlowCmd power_flow;
    SimulateCmd simulate;
    GenDataCmd gen_data;
    TrainCmd train;
    EvalCmd eval;
    TransferCmd transfer;
    AblateCmd ablate;
    HeatmapCmd heatmap;
    gen_data.add(app);
    train.add(app);
    eval.add(app);
    transfer.add(app);
    ablate.add(app);
    heatmap.add(app);
    simulate.add(app);
    power_flow.add(app);
    app.parse_complete_callback([&] { verbosity = quiet ? 0 : verbose ? 2 : 1; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const stvs::ArgumentError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
