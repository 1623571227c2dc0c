// SPDX-License-Identifier: Apache-2.0
//
// obdoa: one-bit off-grid DOA estimation for sparse linear arrays
// Copyright (C) 2026 The obdoa authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// obdoa command-line tool: dataset generation, OGBRIM solves, unrolled-network
// inference, Monte Carlo benchmarks and trainer parity checks.
//
// Every command that takes --out writes into that directory and finishes by
// writing manifest.json, so a run counts as complete only once the manifest
// exists. --config <file> supplies `key = value` defaults for any long flag of
// the chosen subcommand; flags given on the command line win.

#include "obdoa/dataset_io.hpp"
#include "obdoa/eval.hpp"
#include "obdoa/ogbrim.hpp"
#include "obdoa/onebit.hpp"
#include "obdoa/parity.hpp"
#include "obdoa/rng.hpp"
#include "obdoa/text.hpp"
#include "obdoa/unrolled.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#ifndef OBDOA_GIT_DESCRIBE
#define OBDOA_GIT_DESCRIBE "unknown"
#endif

namespace fs = std::filesystem;
using namespace obdoa;

namespace {

constexpr int kExitFailure = 1;

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Turns `--config path` into `--key=value` tokens placed right after the
// subcommand name, ahead of the user's own flags.
std::vector<std::string> expand_config(std::vector<std::string> args, std::string& config_path) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string value;
        std::size_t erase = 0;
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--config requires a file path");
            value = args[i + 1];
            erase = 2;
        } else if (args[i].rfind("--config=", 0) == 0) {
            value = args[i].substr(9);
            erase = 1;
        } else {
            continue;
        }
        args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                   args.begin() + static_cast<std::ptrdiff_t>(i + erase));
        config_path = value;
        break;
    }
    if (config_path.empty()) return args;

    const auto sub = std::find_if(args.begin(), args.end(), [](const std::string& a) { return a.rfind('-', 0) != 0; });
    if (sub == args.end()) throw CLI::ArgumentMismatch("--config needs a subcommand");
    std::vector<std::string> injected;
    for (const auto& [raw_key, value] : read_key_value_file(config_path)) {
        std::string key = raw_key;
        std::replace(key.begin(), key.end(), '_', '-');
        injected.push_back("--" + key + "=" + value);
    }
    args.insert(sub + 1, injected.begin(), injected.end());
    return args;
}

nlohmann::ordered_json resolved_options(const CLI::App& sub) {
    nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt->get_lnames().empty() || opt->get_lnames().front() == "help") continue;
        const std::string& name = opt->get_lnames().front();
        if (opt->count() > 0) {
            const auto& results = opt->results();
            cfg[name] = results.empty() ? std::string("true") : results.back();
        } else if (!opt->get_default_str().empty()) {
            cfg[name] = opt->get_default_str();
        } else {
            cfg[name] = nullptr;
        }
    }
    return cfg;
}

struct RunContext {
    std::vector<std::string> argv;
    std::string config_path;
    std::string started;
};

void write_manifest(const fs::path& out_dir, const CLI::App& sub, const RunContext& ctx,
                    std::optional<std::uint64_t> seed, const std::vector<std::string>& outputs,
                    nlohmann::ordered_json extra = nlohmann::ordered_json::object()) {
    nlohmann::ordered_json m;
    m["command"] = sub.get_name();
    m["argv"] = ctx.argv;
    m["config_file"] = ctx.config_path.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(ctx.config_path);
    m["config"] = resolved_options(sub);
    m["seed"] = seed ? nlohmann::ordered_json(*seed) : nlohmann::ordered_json(nullptr);
    m["git_describe"] = OBDOA_GIT_DESCRIBE;
    m["started_utc"] = ctx.started;
    m["finished_utc"] = utc_now();
    m["outputs"] = outputs;
    for (auto& [k, v] : extra.items()) m[k] = v;

    const fs::path path = out_dir / "manifest.json";
    std::ofstream out(path);
    out << m.dump(2) << "\n";
    out.close();
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

// Flags shared by solve and infer to pick a snapshot.
struct SnapshotArgs {
    std::string input;
    int index = 0;
    bool simulate = false;
    std::string doas;
    double snr_db = 20.0;
    std::uint64_t seed = 0;
    std::string geometry = "sla18";
    std::string grid = "-60:2:60";
    int sources = 0;

    void add_to(CLI::App* sub) {
        auto* in = sub->add_option("--input", input, "OBDOA1 file holding the snapshot")->check(CLI::ExistingFile);
        sub->add_option("--index", index, "record within --input")->check(CLI::NonNegativeNumber)->capture_default_str();
        auto* sim = sub->add_flag("--simulate", simulate, "simulate a snapshot from --doas/--snr/--seed");
        sub->add_option("--doas", doas, "true DOAs in degrees, comma separated (with --simulate)");
        sub->add_option("--snr", snr_db, "SNR in dB (with --simulate)")->capture_default_str();
        sub->add_option("--seed", seed, "seed for the simulated coefficients and noise")->capture_default_str();
        sub->add_option("--geometry", geometry, "sla18, sla10, ula:N or a position list")->capture_default_str();
        sub->add_option("--grid", grid, "grid as min:step:max in degrees")->capture_default_str();
        sub->add_option("--sources", sources, "number of DOAs to report (default: number of true DOAs)");
        in->excludes(sim);
    }

    struct Loaded {
        OneBitSnapshot y;
        ArrayGeometry geometry;
        GridSpec grid;
        std::vector<double> truth;
    };

    Loaded load(const CLI::App& sub) const {
        if (input.empty() == !simulate)
            throw std::invalid_argument("give exactly one of --input or --simulate");
        if (!input.empty()) {
            if (sub.count("--geometry") || sub.count("--grid") || sub.count("--doas"))
                throw std::invalid_argument("--geometry, --grid and --doas come from the --input file");
            DatasetReader reader(input);
            if (static_cast<std::uint64_t>(index) >= reader.size())
                throw std::out_of_range("--index " + std::to_string(index) + " is outside " + input +
                                        " (" + std::to_string(reader.size()) + " records)");
            LabeledSample s = reader.read(static_cast<std::uint64_t>(index));
            std::vector<double> truth = s.y.scene() ? s.y.scene()->doas_deg : std::vector<double>{};
            return {std::move(s.y), reader.header().geometry(), reader.header().grid, std::move(truth)};
        }
        if (doas.empty()) throw std::invalid_argument("--simulate needs --doas");
        const ArrayGeometry geom = make_geometry(geometry);
        SourceScene scene;
        scene.doas_deg = parse_double_list(doas);
        Rng rng(derive_seed(seed, {0}));
        std::uniform_real_distribution<double> coeff(0.5, 1.0);
        for (std::size_t k = 0; k < scene.doas_deg.size(); ++k) {
            const double re = coeff(rng);
            const double im = coeff(rng);
            scene.coeffs.emplace_back(re, im);
        }
        scene.sigma = snr_to_sigma(snr_db);
        OneBitSnapshot y = simulate_snapshot(geom, scene, derive_seed(seed, {1}));
        return {std::move(y), geom, GridSpec::parse(grid), scene.doas_deg};
    }

    int report_count(const Loaded& p) const {
        if (sources > 0) return sources;
        if (!p.truth.empty()) return static_cast<int>(p.truth.size());
        return 2;
    }
};

void add_solver_flags(CLI::App* sub, SolverConfig& cfg, std::string& beta_support) {
    sub->add_option("--lambda", cfg.lambda, "prior weight")->capture_default_str();
    sub->add_option("--alpha", cfg.alpha, "prior exponent, 0<alpha<=1")->capture_default_str();
    sub->add_option("--eta", cfg.eta, "prior smoothing")->capture_default_str();
    sub->add_option("--max-iters", cfg.max_iters, "iteration limit")->capture_default_str();
    sub->add_option("--tol", cfg.tol, "relative change stopping threshold")->capture_default_str();
    sub->add_option("--beta-update-start", cfg.beta_update_start, "first iteration with gap updates")
        ->capture_default_str();
    sub->add_option("--support-threshold", cfg.support_threshold, "gap support relative to max|x|")
        ->capture_default_str();
    sub->add_option("--beta-support", beta_support, "peaks or threshold")->capture_default_str();
}

void print_doas(const std::vector<double>& doas, const std::vector<double>& truth) {
    std::vector<double> sorted = doas;
    std::sort(sorted.begin(), sorted.end());
    std::cout << "estimated_doas_deg: " << join_doubles(sorted, ",") << "\n";
    if (!truth.empty()) {
        std::vector<double> t = truth;
        std::sort(t.begin(), t.end());
        std::cout << "true_doas_deg: " << join_doubles(t, ",") << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"One-bit off-grid DOA estimation for sparse linear arrays", "obdoa"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.set_version_flag("--version", std::string("obdoa ") + OBDOA_GIT_DESCRIBE);
    app.footer("Any subcommand accepts --config <file> with `key = value` lines for its long flags.");

    RunContext ctx;
    ctx.started = utc_now();

    // gen-dataset
    DatasetConfig ds;
    std::string ds_geometry = "sla18", ds_grid = "-60:2:60", ds_snr = "0:5:30", ds_out;
    std::uint64_t ds_seed = 0;
    unsigned ds_jobs = 0;
    auto* gen = app.add_subcommand("gen-dataset", "write train.obdoa and val.obdoa");
    gen->add_option("--geometry", ds_geometry, "sla18, sla10, ula:N or a position list")->capture_default_str();
    gen->add_option("--grid", ds_grid, "grid as min:step:max in degrees")->capture_default_str();
    gen->add_option("--count", ds.count, "total number of samples")->capture_default_str();
    gen->add_option("--sources", ds.sources, "sources per sample")->capture_default_str();
    gen->add_option("--snr-set", ds_snr, "SNRs in dB, list or start:step:stop")->capture_default_str();
    gen->add_option("--split", ds.split, "training fraction")->capture_default_str();
    gen->add_option("--seed", ds_seed, "dataset seed")->required();
    gen->add_option("--out", ds_out, "output directory")->required();
    gen->add_option("--jobs", ds_jobs, "worker threads (0 = all cores)")->capture_default_str();

    // solve
    SnapshotArgs solve_in;
    SolverConfig solve_cfg;
    std::string solve_support = to_string(solve_cfg.beta_support), solve_out;
    auto* solve_cmd = app.add_subcommand("solve", "run the OGBRIM solver on one snapshot");
    solve_in.add_to(solve_cmd);
    add_solver_flags(solve_cmd, solve_cfg, solve_support);
    solve_cmd->add_option("--out", solve_out, "output directory")->required();

    // infer
    SnapshotArgs infer_in;
    std::string infer_weights, infer_out;
    auto* infer_cmd = app.add_subcommand("infer", "run the unrolled network on one snapshot");
    infer_in.add_to(infer_cmd);
    infer_cmd->add_option("--weights", infer_weights, "OBWT1 weight file")->required()->check(CLI::ExistingFile);
    infer_cmd->add_option("--out", infer_out, "output directory")->required();

    // benchmark
    EvalConfig ev;
    SolverConfig bench_cfg;
    std::string bench_method = "ogbrim", bench_weights, bench_geometry = "sla18", bench_grid = "-60:2:60",
                bench_snr = "0:5:30", bench_doas = "-10.28,20.56", bench_out,
                bench_support = to_string(bench_cfg.beta_support);
    auto* bench = app.add_subcommand("benchmark", "Monte Carlo detection rate and RMSE per SNR");
    bench->add_option("--method", bench_method, "ogbrim or unrolled")->capture_default_str();
    bench->add_option("--trials", ev.trials, "trials per SNR")->capture_default_str();
    bench->add_option("--snr-set", bench_snr, "SNRs in dB, list or start:step:stop")->capture_default_str();
    bench->add_option("--threshold", ev.success_threshold_deg, "success threshold in degrees")->capture_default_str();
    bench->add_option("--weights", bench_weights, "OBWT1 weight file (unrolled only)")->check(CLI::ExistingFile);
    bench->add_option("--geometry", bench_geometry, "sla18, sla10, ula:N or a position list")->capture_default_str();
    bench->add_option("--grid", bench_grid, "grid as min:step:max in degrees")->capture_default_str();
    bench->add_option("--doas", bench_doas, "true DOAs in degrees")->capture_default_str();
    bench->add_option("--seed", ev.seed, "benchmark seed")->required();
    bench->add_option("--jobs", ev.jobs, "worker threads (0 = all cores)")->capture_default_str();
    bench->add_option("--out", bench_out, "output directory")->required();
    add_solver_flags(bench, bench_cfg, bench_support);

    // parity-check
    std::string par_weights, par_dataset, par_reference;
    double par_tol = 1e-4;
    auto* parity = app.add_subcommand("parity-check", "compare forward() against trainer reference outputs");
    parity->add_option("--weights", par_weights, "OBWT1 weight file")->required()->check(CLI::ExistingFile);
    parity->add_option("--dataset", par_dataset, "OBDOA1 file the reference was computed on")
        ->required()
        ->check(CLI::ExistingFile);
    parity->add_option("--reference", par_reference, "parity CSV")->required()->check(CLI::ExistingFile);
    parity->add_option("--tolerance", par_tol, "largest allowed absolute difference")->capture_default_str();

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        ctx.argv = args;
        args = expand_config(std::move(args), ctx.config_path);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }

    try {
        if (gen->parsed()) {
            ds.geometry = make_geometry(ds_geometry);
            ds.grid = GridSpec::parse(ds_grid);
            ds.snr_set_db = parse_value_set(ds_snr);
            ds.validate();
            fs::create_directories(ds_out);
            const DatasetSummary summary = generate_dataset(ds, ds_seed, ds_out, ds_jobs);
            std::cout << "train: " << summary.train_path.string() << " (" << summary.train_count << ")\n"
                      << "val:   " << summary.val_path.string() << " (" << summary.val_count << ")\n";
            write_manifest(ds_out, *gen, ctx, ds_seed, {"train.obdoa", "val.obdoa"},
                           {{"train_count", summary.train_count}, {"val_count", summary.val_count}});
        } else if (solve_cmd->parsed()) {
            solve_cfg.beta_support = parse_beta_support(solve_support);
            solve_cfg.validate();
            const auto p = solve_in.load(*solve_cmd);
            solve_cfg.grid = p.grid;
            const DictionaryPair dict = build_dictionary(p.geometry, p.grid);
            const SolveResult r = solve(p.y, dict, solve_cfg);
            const auto doas = extract_doas(r.estimate, solve_in.report_count(p));
            fs::create_directories(solve_out);
            export_spectrum(r.estimate, p.truth, fs::path(solve_out) / "spectrum.csv");
            write_trajectory_csv(r.state, fs::path(solve_out) / "trajectory.csv");
            write_solver_config(solve_cfg, fs::path(solve_out) / "solver.conf");
            print_doas(doas, p.truth);
            std::cout << "iterations: " << r.state.iter << "\n";
            write_manifest(solve_out, *solve_cmd, ctx, solve_in.simulate ? std::optional(solve_in.seed) : std::nullopt,
                           {"spectrum.csv", "trajectory.csv", "solver.conf"},
                           {{"estimated_doas_deg", doas}, {"iterations", r.state.iter}});
        } else if (infer_cmd->parsed()) {
            const WeightBundle weights = load_weights(infer_weights);
            const auto p = infer_in.load(*infer_cmd);
            const DictionaryPair dict = build_dictionary(p.geometry, p.grid);
            const SpectrumEstimate est = forward(p.y, dict, weights);
            const auto doas = extract_doas(est, infer_in.report_count(p));
            fs::create_directories(infer_out);
            export_spectrum(est, p.truth, fs::path(infer_out) / "spectrum.csv");
            print_doas(doas, p.truth);
            write_manifest(infer_out, *infer_cmd, ctx, infer_in.simulate ? std::optional(infer_in.seed) : std::nullopt,
                           {"spectrum.csv"}, {{"estimated_doas_deg", doas}});
        } else if (bench->parsed()) {
            ev.method = parse_method(bench_method);
            if (ev.method == Method::unrolled && bench_weights.empty())
                throw std::invalid_argument("--method unrolled requires --weights");
            if (ev.method == Method::ogbrim && !bench_weights.empty())
                throw std::invalid_argument("--weights only applies to --method unrolled");
            if (!bench_weights.empty()) ev.weights = std::make_shared<const WeightBundle>(load_weights(bench_weights));
            ev.geometry = make_geometry(bench_geometry);
            ev.grid = GridSpec::parse(bench_grid);
            ev.snr_grid_db = parse_value_set(bench_snr);
            ev.true_doas_deg = parse_double_list(bench_doas);
            bench_cfg.beta_support = parse_beta_support(bench_support);
            bench_cfg.grid = ev.grid;
            ev.solver = bench_cfg;
            ev.validate();
            const EvalReport report = run_monte_carlo(ev);
            fs::create_directories(bench_out);
            write_report_csv(report, fs::path(bench_out) / "report.csv");
            print_report_table(report, std::cout);
            write_manifest(bench_out, *bench, ctx, ev.seed, {"report.csv"},
                           {{"wall_seconds", report.wall_seconds}});
        } else if (parity->parsed()) {
            const WeightBundle weights = load_weights(par_weights);
            DatasetReader dataset(par_dataset);
            const ParityReport r = check_parity(read_parity_csv(par_reference), dataset, weights);
            std::cout << "rows: " << r.rows << "\n"
                      << "max_abs_magnitude: " << r.max_abs_magnitude << "\n"
                      << "max_abs_beta_deg: " << r.max_abs_beta_deg << "\n";
            if (r.rows == 0) throw std::runtime_error("parity reference has no rows");
            if (!(r.max_abs() <= par_tol)) {
                std::cerr << "parity FAILED: max deviation " << r.max_abs() << " > " << par_tol
                          << " (worst sample " << r.worst_sample << ")\n";
                return kExitFailure;
            }
            std::cout << "parity OK (tolerance " << par_tol << ")\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return 0;
}
