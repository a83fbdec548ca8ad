#pragma once

#include <cstdint>
#include <string>

#include "gencrit/world.hpp"

namespace gencrit {

enum class RewardVariant { outcome, weighted, skew, denoised_combined };

std::string to_string(RewardVariant variant);
RewardVariant reward_variant_from_string(const std::string& name);

struct RewardConfig {
    RewardVariant variant = RewardVariant::outcome;
    double critique_base = 0.7;       // reward for a judgment that matches ground truth
    double weighted_numerator = 0.35; // per-class numerator of the reweighted reward
    double skew_correct = 0.7;        // reward for correctly accepting a correct response
    double skew_wrong = 0.7;          // reward for correctly rejecting a wrong response
    double denoise_correct_scale = 0.1;
    double denoise_wrong_scale = 0.7;
    double ema_decay = 0.95;

    void validate() const;
};

/// Running estimate of the policy's response correctness rate, used by the
/// reweighted critique reward. Exponential moving average over step means.
struct RunningStats {
    double ema_response_reward = 0.5;
    double decay = 0.95;
    std::uint64_t weighted_guard_hits = 0;
};

namespace rewards {

/// 1 for a verified-correct response, 0 otherwise.
double response_reward(bool verified_correct);

/// Flat reward when the binary judgment matches ground truth, 0 otherwise.
double critique_outcome_reward(bool judged_correct, bool response_correct,
                               const RewardConfig& config = RewardConfig{});

/// Class-reweighted reward: numerator / correct-rate for accepting correct
/// responses, numerator / wrong-rate for rejecting wrong ones. The estimate is
/// clamped to [0.01, 0.99]; an exactly degenerate estimate falls back to the
/// outcome reward and bumps stats.weighted_guard_hits.
double weighted_critique_reward(bool judged_correct, bool response_correct, RunningStats& stats,
                                const RewardConfig& config = RewardConfig{});

/// Refinement-based estimate of critique quality: scale * k/n, with a small
/// scale for "correct" judgments and a large one for "wrong" judgments.
double denoised_reward(bool judged_correct, const RefinementOutcome& outcome,
                       const RewardConfig& config = RewardConfig{});

/// Asymmetric match reward used to steer precision/recall.
double skew_reward(bool judged_correct, bool response_correct, double skew_correct,
                   double skew_wrong);

/// EMA update with the step's mean response reward (input must be in [0,1]).
void update_stats(RunningStats& stats, double step_mean_response_reward);

}  // namespace rewards

}  // namespace gencrit
