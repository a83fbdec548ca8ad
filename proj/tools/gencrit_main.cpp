#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gencrit/analysis.hpp"
#include "gencrit/config.hpp"
#include "gencrit/errors.hpp"
#include "gencrit/harness.hpp"
#include "gencrit/presets.hpp"
#include "gencrit/report.hpp"
#include "gencrit/snapshot.hpp"

namespace fs = std::filesystem;
using namespace gencrit;

namespace {

int cmd_train(const std::string& config_path, std::uint64_t seed_override, bool seed_given,
              int steps_override, const std::string& out_override, bool quiet) {
    RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::from_file(config_path);
    if (seed_given) {
        cfg.seed = seed_override;
        cfg.seeds.clear();
    }
    if (steps_override > 0) cfg.steps = steps_override;
    if (!out_override.empty()) cfg.output_dir = out_override;
    cfg.validate();
    for (const std::string& warning : cfg.warnings())
        std::cerr << "warning: " << warning << "\n";

    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    {
        std::ofstream echo_file(dir / "config.txt", std::ios::binary);
        echo_file << cfg.to_config_text();
    }

    for (std::uint64_t seed : cfg.effective_seeds()) {
        RunConfig run_cfg = cfg;
        run_cfg.seed = seed;
        const std::string tag = "seed" + std::to_string(seed);
        RunOptions options;
        options.metrics_path = (dir / ("metrics_" + tag + ".csv")).string();
        options.log_path = (dir / ("run_" + tag + ".jsonl")).string();
        options.echo = !quiet;
        RunResult run = run_training(run_cfg, options);

        snapshot::save_world(build_run_world(run_cfg, seed),
                             (dir / ("world_" + tag + ".json")).string());
        snapshot::save_policy(run.final_params, (dir / ("policy_" + tag + ".json")).string());
        Checkpoint checkpoint;
        checkpoint.step = run.steps_completed;
        checkpoint.params = run.final_params;
        checkpoint.cache = run.final_cache;
        checkpoint.stats = run.stats;
        checkpoint.starved_steps = run.starved_steps;
        snapshot::save_checkpoint(checkpoint, (dir / ("checkpoint_" + tag + ".json")).string());

        std::printf("%s: steps %d, gen_acc %.4f -> %.4f, crit_acc %.4f -> %.4f%s\n",
                    tag.c_str(), run.steps_completed, run.initial_eval.generation_accuracy,
                    run.final_eval.generation_accuracy, run.initial_eval.critique_accuracy,
                    run.final_eval.critique_accuracy,
                    run.aborted_starvation ? " (aborted: cache starvation)" : "");
    }
    std::printf("outputs in %s\n", dir.string().c_str());
    return 0;
}

int cmd_preset(const std::string& name, const std::vector<std::uint64_t>& seeds,
               int steps_override, const std::string& out_dir, bool quiet) {
    PresetOptions options;
    options.seeds = seeds;
    options.steps_override = steps_override;
    options.output_dir = out_dir;
    options.echo = !quiet;
    PresetResult result = run_experiment_preset(name, options, std::cout);
    return result.hard_pass() ? 0 : 1;
}

int cmd_analyze(const std::string& trace_path, const std::string& out_path,
                const std::string& csv_path) {
    const std::vector<MetricsRow> rows = report::read_metrics_csv(trace_path);
    const std::vector<analysis::TheoryComparison> comparisons =
        analysis::compare_to_theory(rows);
    if (out_path.empty()) {
        analysis::write_theory_report(std::cout, rows, comparisons);
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw DataError("cannot write report: " + out_path);
        analysis::write_theory_report(out, rows, comparisons);
    }
    if (!csv_path.empty()) analysis::write_theory_csv(csv_path, comparisons);
    return 0;
}

int cmd_dump_cache(const std::string& checkpoint_path, const std::string& out_path) {
    const Checkpoint checkpoint = snapshot::load_checkpoint(checkpoint_path);
    if (out_path.empty()) {
        snapshot::dump_cache_jsonl(checkpoint.cache, std::cout);
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw DataError("cannot write cache dump: " + out_path);
        snapshot::dump_cache_jsonl(checkpoint.cache, out);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gencrit: a desk-scale simulator of joint generation and critique training"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 1;
    int steps = 0;
    std::string out_dir;
    bool quiet = false;
    CLI::App* train = app.add_subcommand("train", "Run training from a config file");
    train->add_option("-c,--config", config_path, "Config file (omit for built-in defaults)");
    CLI::Option* seed_opt =
        train->add_option("-s,--seed", seed, "Override run.seed and run a single seed");
    train->add_option("--steps", steps, "Override run.steps");
    train->add_option("-o,--out", out_dir, "Override run.output_dir");
    train->add_flag("-q,--quiet", quiet, "Suppress per-step progress");

    std::string preset_name;
    std::vector<std::uint64_t> preset_seeds;
    int preset_steps = 0;
    std::string preset_out = "out";
    bool preset_quiet = false;
    bool list_presets = false;
    CLI::App* preset = app.add_subcommand("preset", "Run a multi-arm experiment preset");
    preset->add_option("name", preset_name, "Preset name (see --list)");
    preset->add_flag("-l,--list", list_presets, "List available presets and exit");
    preset->add_option("--seeds", preset_seeds, "Comma-separated seeds (default 1,2,3,4,5)")
        ->delimiter(',');
    preset->add_option("--steps", preset_steps, "Override steps for every arm");
    preset->add_option("-o,--out", preset_out, "Output directory (\"\" keeps results in memory)");
    preset->add_flag("-q,--quiet", preset_quiet, "Suppress per-step progress");

    std::string trace_path;
    std::string report_path;
    std::string theory_csv;
    CLI::App* analyze = app.add_subcommand("analyze", "Compare a metrics trace to theory");
    analyze->add_option("-t,--trace", trace_path, "Metrics CSV from a training run")
        ->required();
    analyze->add_option("-o,--out", report_path, "Write the text report here (default stdout)");
    analyze->add_option("--csv", theory_csv, "Also write per-step comparisons as CSV");

    std::string checkpoint_path;
    std::string dump_path;
    CLI::App* dump = app.add_subcommand("dump-cache", "Print cache contents as JSONL");
    dump->add_option("-k,--checkpoint", checkpoint_path, "Checkpoint snapshot file")
        ->required();
    dump->add_option("-o,--out", dump_path, "Write JSONL here (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(train))
            return cmd_train(config_path, seed, seed_opt->count() > 0, steps, out_dir, quiet);
        if (app.got_subcommand(preset)) {
            if (list_presets) {
                for (const std::string& name : preset_names()) std::cout << name << "\n";
                return 0;
            }
            if (preset_name.empty())
                throw ArgumentError("preset name required (try: gencrit preset --list)");
            return cmd_preset(preset_name, preset_seeds, preset_steps, preset_out, preset_quiet);
        }
        if (app.got_subcommand(analyze)) return cmd_analyze(trace_path, report_path, theory_csv);
        if (app.got_subcommand(dump)) return cmd_dump_cache(checkpoint_path, dump_path);
    } catch (const Error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
    return 0;
}
