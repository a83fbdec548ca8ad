#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gencrit/cache.hpp"
#include "gencrit/config.hpp"
#include "gencrit/optimizer.hpp"
#include "gencrit/policy.hpp"
#include "gencrit/report.hpp"
#include "gencrit/rewards.hpp"
#include "gencrit/world.hpp"

namespace gencrit {

/// Deterministic evaluation snapshot. All quantities are expectations under
/// the current policy (no sampling): generation accuracy is the expected
/// success probability, judgment metrics threshold the marginal
/// P(judged correct) at 0.5 over the balanced eval set.
struct EvalReport {
    double generation_accuracy = 0.0;
    double critique_accuracy = 0.0;
    double p1 = 0.0;  // true-positive rate on correct responses
    double p2 = 0.0;  // true-negative rate on wrong responses
    double precision_correct = 0.0;
    double recall_correct = 0.0;
    double mean_response_reward = 0.0;
    double mean_denoised_reward = 0.0;
    double diligent_rate = 0.0;  // mean P(diligent) over the eval set

    /// Fraction of eval pairs the critic would label wrong.
    double predicted_wrong_rate() const { return (1.0 - p1 + p2) / 2.0; }
};

/// Balanced <question, response> pairs from three probe tiers of increasing
/// skill (strategy weights proportional to exp(gamma * success_prob)).
/// Exactly one correct and one wrong response per surviving question.
// The world actually used by a run: config.world with its seed remixed per run seed.
World build_run_world(const RunConfig& config, std::uint64_t seed);

std::vector<CacheEntry> build_eval_set(const World& world, const EvalConfig& eval,
                                       std::uint64_t seed);

EvalReport evaluate(const PolicyParams& critique_params, const PolicyParams& generation_params,
                    const World& world, const std::vector<CacheEntry>& eval_set,
                    const RewardConfig& rewards);

struct RunOptions {
    std::string metrics_path;  // empty: keep rows in memory only
    std::string log_path;      // JSONL step/eval events; empty: no log
    bool echo = false;         // progress lines on stdout
};

struct RunResult {
    RunConfig config;  // config as run, seed included
    std::vector<MetricsRow> metrics;
    EvalReport initial_eval;
    EvalReport final_eval;
    int steps_completed = 0;
    bool aborted_starvation = false;
    std::uint64_t starved_steps = 0;
    RunningStats stats;
    PolicyParams final_params;
    QuestionResponseCache final_cache;
};

/// One full training run at config.seed. Deterministic: identical (config,
/// seed) produce byte-identical metrics CSVs.
RunResult run_training(const RunConfig& config, const RunOptions& options = {});

}  // namespace gencrit
