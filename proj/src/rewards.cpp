#include "gencrit/rewards.hpp"

#include <algorithm>

#include "gencrit/errors.hpp"

namespace gencrit {

std::string to_string(RewardVariant variant) {
    switch (variant) {
        case RewardVariant::outcome: return "outcome";
        case RewardVariant::weighted: return "weighted";
        case RewardVariant::skew: return "skew";
        case RewardVariant::denoised_combined: return "denoised_combined";
    }
    return "outcome";
}

RewardVariant reward_variant_from_string(const std::string& name) {
    if (name == "outcome") return RewardVariant::outcome;
    if (name == "weighted") return RewardVariant::weighted;
    if (name == "skew") return RewardVariant::skew;
    if (name == "denoised_combined") return RewardVariant::denoised_combined;
    throw ConfigError("rewards.variant: unknown value '" + name + "'");
}

void RewardConfig::validate() const {
    if (!(critique_base >= 0.0)) throw ConfigError("rewards.critique_base must be >= 0");
    if (!(weighted_numerator >= 0.0))
        throw ConfigError("rewards.weighted_numerator must be >= 0");
    if (!(skew_correct >= 0.0)) throw ConfigError("rewards.skew_correct must be >= 0");
    if (!(skew_wrong >= 0.0)) throw ConfigError("rewards.skew_wrong must be >= 0");
    if (!(denoise_correct_scale >= 0.0))
        throw ConfigError("rewards.denoise_correct_scale must be >= 0");
    if (!(denoise_wrong_scale >= 0.0))
        throw ConfigError("rewards.denoise_wrong_scale must be >= 0");
    if (!(ema_decay >= 0.0 && ema_decay < 1.0))
        throw ConfigError("rewards.ema_decay must be in [0, 1)");
}

namespace rewards {

double response_reward(bool verified_correct) { return verified_correct ? 1.0 : 0.0; }

double critique_outcome_reward(bool judged_correct, bool response_correct,
                               const RewardConfig& config) {
    return judged_correct == response_correct ? config.critique_base : 0.0;
}

double weighted_critique_reward(bool judged_correct, bool response_correct, RunningStats& stats,
                                const RewardConfig& config) {
    const double ema = stats.ema_response_reward;
    if (ema == 0.0 || ema == 1.0) {
        ++stats.weighted_guard_hits;
        return critique_outcome_reward(judged_correct, response_correct, config);
    }
    if (judged_correct != response_correct) return 0.0;
    const double p = std::clamp(ema, 0.01, 0.99);
    return response_correct ? config.weighted_numerator / p
                            : config.weighted_numerator / (1.0 - p);
}

double denoised_reward(bool judged_correct, const RefinementOutcome& outcome,
                       const RewardConfig& config) {
    if (outcome.attempts < 1) throw ArgumentError("denoised_reward: attempts must be >= 1");
    const double fraction =
        static_cast<double>(outcome.successes) / static_cast<double>(outcome.attempts);
    return (judged_correct ? config.denoise_correct_scale : config.denoise_wrong_scale) *
           fraction;
}

double skew_reward(bool judged_correct, bool response_correct, double skew_correct,
                   double skew_wrong) {
    if (judged_correct != response_correct) return 0.0;
    return response_correct ? skew_correct : skew_wrong;
}

void update_stats(RunningStats& stats, double step_mean_response_reward) {
    if (!(step_mean_response_reward >= 0.0 && step_mean_response_reward <= 1.0))
        throw ArgumentError("update_stats: step mean must be in [0, 1]");
    stats.ema_response_reward = stats.decay * stats.ema_response_reward +
                                (1.0 - stats.decay) * step_mean_response_reward;
}

}  // namespace rewards
}  // namespace gencrit
