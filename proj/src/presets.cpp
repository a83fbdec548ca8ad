#include "gencrit/presets.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "gencrit/errors.hpp"
#include "gencrit/report.hpp"

namespace gencrit {

bool PresetResult::hard_pass() const {
    for (const ClaimResult& claim : claims)
        if (!claim.exploratory && !claim.pass) return false;
    return true;
}

bool hacking_signature(const RunResult& run) {
    const std::vector<MetricsRow>& rows = run.metrics;
    if (rows.size() < 3) return false;
    const double gen_start = rows.front().gen_acc;
    const double rc_start = rows[1].mean_R_c;  // first post-training eval
    for (std::size_t i = 2; i < rows.size(); ++i)
        if (rows[i].gen_acc < gen_start - 0.02 && rows[i].mean_R_c > rc_start + 0.02)
            return true;
    return false;
}

namespace {

namespace fs = std::filesystem;

std::string fmt(const char* format, double a, double b, double c, double d) {
    char buf[200];
    std::snprintf(buf, sizeof(buf), format, a, b, c, d);
    return buf;
}

RunConfig preset_base() {
    RunConfig cfg;
    cfg.rollout.questions_per_step = 128;
    cfg.rollout.mini_batch = 128;
    cfg.steps = 1000;
    cfg.eval_every = 50;
    return cfg;
}

struct ArmSpec {
    std::string name;
    RunConfig config;
};

std::vector<ArmSpec> arms_for(const std::string& name) {
    std::vector<ArmSpec> specs;
    if (name == "joint") {
        // Generation must be learnable by the linear policy here, so a smaller
        // question pool and a hotter step than the trainer defaults.
        RunConfig base = preset_base();
        base.world.num_questions = 64;
        base.optimizer.learning_rate = 0.2;
        RunConfig g = base;
        g.mode = TrainMode::g_rl;
        specs.push_back({"g_rl", g});
        RunConfig c = base;
        c.mode = TrainMode::c_rl;
        c.data_mode = DataMode::static_set;
        specs.push_back({"c_rl_static", c});
        RunConfig gc = base;
        gc.mode = TrainMode::gc_rl;
        specs.push_back({"gc_rl", gc});
    } else if (name == "filter_vs_reweight") {
        RunConfig random = preset_base();
        random.data_mode = DataMode::dynamic_random;
        specs.push_back({"random_sampling", random});
        RunConfig reweight = random;
        reweight.rewards.variant = RewardVariant::weighted;
        // Class-dependent reward scales cancel under per-group normalization,
        // so reweighting needs the pooled advantage baseline.
        reweight.optimizer.grouping = AdvantageGrouping::combined;
        specs.push_back({"reweight", reweight});
        RunConfig filter = preset_base();
        filter.data_mode = DataMode::dynamic_filtered;
        specs.push_back({"filter", filter});
    } else if (name == "imbalance") {
        RunConfig base = preset_base();
        base.mode = TrainMode::c_rl;
        base.freeze_generation = true;
        base.world.success_mean = 0.1;
        base.steps = 2000;
        RunConfig unfiltered = base;
        unfiltered.data_mode = DataMode::dynamic_random;
        specs.push_back({"unfiltered", unfiltered});
        RunConfig filtered = base;
        filtered.data_mode = DataMode::dynamic_filtered;
        specs.push_back({"filtered", filtered});
    } else if (name == "denoise") {
        // The refinement signal earns its keep when the outcome signal is
        // corrupted: unfiltered imbalanced data drags the judge toward the
        // always-wrong prior, which the refinement bonus resists.
        RunConfig c = preset_base();
        c.steps = 400;
        c.rollout.refinement_attempts = 4;
        c.mode = TrainMode::c_rl;
        c.data_mode = DataMode::dynamic_random;
        c.world.success_mean = 0.15;
        specs.push_back({"c_outcome", c});
        RunConfig c_den = c;
        c_den.rewards.variant = RewardVariant::denoised_combined;
        specs.push_back({"c_denoised", c_den});
        RunConfig gc = preset_base();
        gc.steps = 400;
        gc.rollout.refinement_attempts = 4;
        specs.push_back({"gc_outcome", gc});
        RunConfig gc_den = gc;
        gc_den.rewards.variant = RewardVariant::denoised_combined;
        specs.push_back({"gc_denoised", gc_den});
    } else if (name == "static_vs_dynamic") {
        RunConfig base = preset_base();
        base.steps = 800;
        RunConfig gc_dyn = base;
        specs.push_back({"gc_dynamic", gc_dyn});
        RunConfig gc_static = base;
        gc_static.data_mode = DataMode::static_set;
        specs.push_back({"gc_static", gc_static});
        RunConfig c_dyn = base;
        c_dyn.mode = TrainMode::c_rl;
        specs.push_back({"c_dynamic", c_dyn});
        RunConfig c_static = base;
        c_static.mode = TrainMode::c_rl;
        c_static.data_mode = DataMode::static_set;
        specs.push_back({"c_static", c_static});
    } else if (name == "skew") {
        RunConfig base = preset_base();
        base.mode = TrainMode::c_rl;
        base.data_mode = DataMode::static_set;
        base.world.evidence_noise = 1.5;
        base.steps = 600;
        base.rewards.variant = RewardVariant::skew;
        base.optimizer.grouping = AdvantageGrouping::combined;
        RunConfig r = base;
        r.rewards.skew_correct = 0.7;
        r.rewards.skew_wrong = 0.7;
        specs.push_back({"R", r});
        RunConfig rw = base;
        rw.rewards.skew_correct = 0.6;
        rw.rewards.skew_wrong = 0.8;
        specs.push_back({"R_w", rw});
        RunConfig rr = base;
        rr.rewards.skew_correct = 0.8;
        rr.rewards.skew_wrong = 0.6;
        specs.push_back({"R_r", rr});
    } else {
        std::string known;
        for (const std::string& preset : preset_names()) {
            if (!known.empty()) known += ", ";
            known += preset;
        }
        throw LookupError("unknown preset '" + name + "'; available: " + known);
    }
    return specs;
}

const PresetArm& find_arm(const PresetResult& result, const std::string& name) {
    for (const PresetArm& arm : result.arms)
        if (arm.name == name) return arm;
    throw LookupError("preset arm not found: " + name);
}

double arm_mean(const PresetArm& arm, const std::function<double(const RunResult&)>& value) {
    if (arm.runs.empty()) throw ArgumentError("preset arm has no runs");
    double sum = 0.0;
    for (const RunResult& run : arm.runs) sum += value(run);
    return sum / static_cast<double>(arm.runs.size());
}

ClaimResult gap_claim(const std::string& name, const char* lhs_name, double lhs,
                      const char* rhs_name, double rhs, double min_gap, bool exploratory) {
    ClaimResult claim;
    claim.name = name;
    claim.exploratory = exploratory;
    claim.pass = lhs - rhs >= min_gap;
    char buf[220];
    std::snprintf(buf, sizeof(buf), "%s=%.4f %s=%.4f gap=%.4f (need >= %.3f)", lhs_name, lhs,
                  rhs_name, rhs, lhs - rhs, min_gap);
    claim.detail = buf;
    return claim;
}

std::vector<ClaimResult> claims_for(const std::string& name, const PresetResult& result) {
    std::vector<ClaimResult> claims;
    auto final_gen = [](const RunResult& r) { return r.final_eval.generation_accuracy; };
    auto final_crit = [](const RunResult& r) { return r.final_eval.critique_accuracy; };
    auto delta_gen = [](const RunResult& r) {
        return r.final_eval.generation_accuracy - r.initial_eval.generation_accuracy;
    };
    auto delta_crit = [](const RunResult& r) {
        return r.final_eval.critique_accuracy - r.initial_eval.critique_accuracy;
    };
    auto diligent = [](const RunResult& r) { return r.final_eval.diligent_rate; };
    auto predicted_wrong = [](const RunResult& r) { return r.final_eval.predicted_wrong_rate(); };

    if (name == "joint") {
        const PresetArm& gc = find_arm(result, "gc_rl");
        claims.push_back(gap_claim("gc_rl_generation_improves", "delta_gen",
                                   arm_mean(gc, delta_gen), "floor", 0.0, 0.05, false));
        claims.push_back(gap_claim("gc_rl_critique_improves", "delta_crit",
                                   arm_mean(gc, delta_crit), "floor", 0.0, 0.05, false));
        claims.push_back(gap_claim("gc_beats_g_on_generation", "gc_rl",
                                   arm_mean(gc, final_gen), "g_rl",
                                   arm_mean(find_arm(result, "g_rl"), final_gen), 0.0, true));
        claims.push_back(gap_claim("gc_beats_c_on_critique", "gc_rl",
                                   arm_mean(gc, final_crit), "c_rl_static",
                                   arm_mean(find_arm(result, "c_rl_static"), final_crit), 0.0,
                                   true));
    } else if (name == "filter_vs_reweight") {
        const double filter_crit = arm_mean(find_arm(result, "filter"), final_crit);
        const double random_crit = arm_mean(find_arm(result, "random_sampling"), final_crit);
        const double reweight_crit = arm_mean(find_arm(result, "reweight"), final_crit);
        claims.push_back(gap_claim("filter_beats_random_on_critique", "filter", filter_crit,
                                   "random_sampling", random_crit, 0.01, false));
        claims.push_back(gap_claim("reweight_beats_random_on_critique", "reweight",
                                   reweight_crit, "random_sampling", random_crit, 0.0, true));
        auto judgment_skew = [](const RunResult& r) {
            return std::abs(r.final_eval.p1 - r.final_eval.p2);
        };
        claims.push_back(gap_claim(
            "filter_balances_judgments", "random_skew",
            arm_mean(find_arm(result, "random_sampling"), judgment_skew), "filter_skew",
            arm_mean(find_arm(result, "filter"), judgment_skew), 0.0, true));
    } else if (name == "imbalance") {
        const double unfiltered_wrong =
            arm_mean(find_arm(result, "unfiltered"), predicted_wrong);
        const double filtered_wrong = arm_mean(find_arm(result, "filtered"), predicted_wrong);
        claims.push_back(gap_claim("unfiltered_drifts_toward_wrong", "unfiltered",
                                   unfiltered_wrong, "filtered", filtered_wrong, 0.10, false));
        ClaimResult balanced;
        balanced.name = "filtered_stays_balanced";
        balanced.pass = filtered_wrong >= 0.4 && filtered_wrong <= 0.6;
        balanced.detail =
            fmt("filtered_predicted_wrong=%.4f (need within [%.2f, %.2f]); unfiltered=%.4f",
                filtered_wrong, 0.4, 0.6, unfiltered_wrong);
        claims.push_back(balanced);
    } else if (name == "denoise") {
        claims.push_back(gap_claim("denoised_more_diligent", "denoised",
                                   arm_mean(find_arm(result, "c_denoised"), diligent), "outcome",
                                   arm_mean(find_arm(result, "c_outcome"), diligent), 0.0,
                                   false));
        claims.push_back(gap_claim("denoised_higher_critique_accuracy", "denoised",
                                   arm_mean(find_arm(result, "c_denoised"), final_crit),
                                   "outcome",
                                   arm_mean(find_arm(result, "c_outcome"), final_crit), 0.02,
                                   false));
        claims.push_back(gap_claim("gc_denoised_more_diligent", "denoised",
                                   arm_mean(find_arm(result, "gc_denoised"), diligent),
                                   "outcome",
                                   arm_mean(find_arm(result, "gc_outcome"), diligent), 0.0,
                                   true));
        claims.push_back(gap_claim("gc_denoised_higher_critique_accuracy", "denoised",
                                   arm_mean(find_arm(result, "gc_denoised"), final_crit),
                                   "outcome",
                                   arm_mean(find_arm(result, "gc_outcome"), final_crit), 0.0,
                                   true));
    } else if (name == "static_vs_dynamic") {
        claims.push_back(gap_claim("gc_dynamic_beats_static_on_critique", "dynamic",
                                   arm_mean(find_arm(result, "gc_dynamic"), final_crit),
                                   "static",
                                   arm_mean(find_arm(result, "gc_static"), final_crit), 0.0,
                                   true));
        claims.push_back(gap_claim("gc_dynamic_beats_static_on_generation", "dynamic",
                                   arm_mean(find_arm(result, "gc_dynamic"), final_gen), "static",
                                   arm_mean(find_arm(result, "gc_static"), final_gen), 0.0,
                                   true));
        claims.push_back(gap_claim("c_static_beats_dynamic_on_critique", "static",
                                   arm_mean(find_arm(result, "c_static"), final_crit), "dynamic",
                                   arm_mean(find_arm(result, "c_dynamic"), final_crit), 0.0,
                                   true));
        int observed = 0;
        int aborted = 0;
        std::size_t dynamic_runs = 0;
        for (const char* arm_name : {"gc_dynamic", "c_dynamic"}) {
            for (const RunResult& run : find_arm(result, arm_name).runs) {
                ++dynamic_runs;
                if (hacking_signature(run)) ++observed;
                if (run.aborted_starvation) ++aborted;
            }
        }
        ClaimResult hack;
        hack.name = "hacking_signature_in_dynamic_arms";
        hack.exploratory = true;
        hack.pass = observed > 0;
        char buf[200];
        std::snprintf(buf, sizeof(buf),
                      "signature in %d/%zu dynamic runs, starvation aborts in %d "
                      "(reported, not gated; traces in traces.csv)",
                      observed, dynamic_runs, aborted);
        hack.detail = buf;
        claims.push_back(hack);
    } else if (name == "skew") {
        auto precision = [](const RunResult& r) { return r.final_eval.precision_correct; };
        auto recall = [](const RunResult& r) { return r.final_eval.recall_correct; };
        const double prec_r = arm_mean(find_arm(result, "R"), precision);
        const double prec_rw = arm_mean(find_arm(result, "R_w"), precision);
        const double prec_rr = arm_mean(find_arm(result, "R_r"), precision);
        const double rec_r = arm_mean(find_arm(result, "R"), recall);
        const double rec_rw = arm_mean(find_arm(result, "R_w"), recall);
        const double rec_rr = arm_mean(find_arm(result, "R_r"), recall);
        claims.push_back(
            gap_claim("precision_Rw_over_R", "R_w", prec_rw, "R", prec_r, 0.02, false));
        claims.push_back(
            gap_claim("precision_R_over_Rr", "R", prec_r, "R_r", prec_rr, 0.02, false));
        claims.push_back(gap_claim("recall_Rr_over_R", "R_r", rec_rr, "R", rec_r, 0.02, false));
        claims.push_back(gap_claim("recall_R_over_Rw", "R", rec_r, "R_w", rec_rw, 0.02, false));
    }
    return claims;
}

void write_traces_csv(const PresetResult& result, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write traces CSV: " + path.string());
    out << "arm,seed,step,gen_acc,predicted_wrong_rate,mean_R_c\n";
    for (const PresetArm& arm : result.arms) {
        for (const RunResult& run : arm.runs) {
            for (const MetricsRow& row : run.metrics) {
                using report::format_double;
                out << arm.name << ',' << run.config.seed << ',' << row.step << ','
                    << format_double(row.gen_acc) << ','
                    << format_double((1.0 - row.p1 + row.p2) / 2.0) << ','
                    << format_double(row.mean_R_c) << '\n';
            }
        }
    }
}

void write_comparison_csv(const PresetResult& result, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write comparison CSV: " + path.string());
    out << "preset,arm,seed,steps_completed,aborted,gen_acc_initial,gen_acc_final,"
           "crit_acc_initial,crit_acc_final,p1,p2,precision_correct,recall_correct,"
           "diligent_rate,predicted_wrong_rate,hacking\n";
    for (const PresetArm& arm : result.arms) {
        for (const RunResult& run : arm.runs) {
            using report::format_double;
            out << result.name << ',' << arm.name << ',' << run.config.seed << ','
                << run.steps_completed << ',' << (run.aborted_starvation ? 1 : 0) << ','
                << format_double(run.initial_eval.generation_accuracy) << ','
                << format_double(run.final_eval.generation_accuracy) << ','
                << format_double(run.initial_eval.critique_accuracy) << ','
                << format_double(run.final_eval.critique_accuracy) << ','
                << format_double(run.final_eval.p1) << ',' << format_double(run.final_eval.p2)
                << ',' << format_double(run.final_eval.precision_correct) << ','
                << format_double(run.final_eval.recall_correct) << ','
                << format_double(run.final_eval.diligent_rate) << ','
                << format_double(run.final_eval.predicted_wrong_rate()) << ','
                << (hacking_signature(run) ? 1 : 0) << '\n';
        }
    }
}

}  // namespace

std::vector<std::string> preset_names() {
    return {"joint",   "filter_vs_reweight", "imbalance",
            "denoise", "static_vs_dynamic",  "skew"};
}

PresetResult run_experiment_preset(const std::string& name, const PresetOptions& options,
                                   std::ostream& out) {
    std::vector<ArmSpec> specs = arms_for(name);
    const std::vector<std::uint64_t> seeds =
        options.seeds.empty() ? std::vector<std::uint64_t>{1, 2, 3, 4, 5} : options.seeds;

    PresetResult result;
    result.name = name;

    fs::path dir;
    if (!options.output_dir.empty()) {
        dir = fs::path(options.output_dir) / name;
        fs::create_directories(dir);
    }

    for (ArmSpec& spec : specs) {
        PresetArm arm;
        arm.name = spec.name;
        arm.config = spec.config;
        if (options.steps_override > 0) arm.config.steps = options.steps_override;
        for (std::uint64_t seed : seeds) {
            RunConfig cfg = arm.config;
            cfg.seed = seed;
            RunOptions run_options;
            run_options.echo = options.echo;
            if (!dir.empty())
                run_options.metrics_path =
                    (dir / (arm.name + "_seed" + std::to_string(seed) + ".csv")).string();
            const auto start = std::chrono::steady_clock::now();
            RunResult run = run_training(cfg, run_options);
            const double elapsed =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            char line[240];
            std::snprintf(line, sizeof(line),
                          "[%s/%s seed %llu] gen %.3f -> %.3f crit %.3f -> %.3f dil %.3f%s "
                          "(%.1fs)",
                          name.c_str(), arm.name.c_str(),
                          static_cast<unsigned long long>(seed),
                          run.initial_eval.generation_accuracy,
                          run.final_eval.generation_accuracy,
                          run.initial_eval.critique_accuracy, run.final_eval.critique_accuracy,
                          run.final_eval.diligent_rate,
                          run.aborted_starvation ? " [starved]" : "", elapsed);
            out << line << std::endl;
            arm.runs.push_back(std::move(run));
        }
        result.arms.push_back(std::move(arm));
    }

    result.claims = claims_for(name, result);
    std::ostringstream claim_lines;
    for (const ClaimResult& claim : result.claims) {
        claim_lines << (claim.pass ? "PASS" : "FAIL")
                    << (claim.exploratory ? " (exploratory)" : "") << ' ' << claim.name << ": "
                    << claim.detail << '\n';
    }
    out << claim_lines.str();

    if (!dir.empty()) {
        write_comparison_csv(result, dir / "comparison.csv");
        if (name == "static_vs_dynamic") write_traces_csv(result, dir / "traces.csv");
        std::ofstream claims_file(dir / "claims.txt", std::ios::binary);
        if (!claims_file) throw DataError("cannot write claims file");
        claims_file << claim_lines.str();
    }
    return result;
}

}  // namespace gencrit
