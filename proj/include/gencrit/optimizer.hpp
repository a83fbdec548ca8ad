#pragma once

#include <string>
#include <vector>

#include "gencrit/policy.hpp"
#include "gencrit/rollout.hpp"

namespace gencrit {

enum class AdvantageGrouping { per_prompt, combined };

std::string to_string(AdvantageGrouping grouping);
AdvantageGrouping advantage_grouping_from_string(const std::string& name);

struct OptimizerConfig {
    AdvantageGrouping grouping = AdvantageGrouping::per_prompt;
    double std_epsilon = 1e-6;
    double clip_ratio = 0.2;
    double kl_coef = 1e-3;
    double learning_rate = 0.05;

    void validate() const;
};

struct GradientReport {
    std::vector<double> grad;  // d(objective)/d(params), before the lr scale
    double objective = 0.0;
    double clip_fraction = 0.0;
    double kl = 0.0;
    int samples = 0;
    int skipped = 0;
};

struct StepReport {
    int response_samples = 0;
    int critique_samples = 0;
    int response_groups = 0;
    int critique_groups = 0;
    double mean_response_reward = 0.0;
    double mean_critique_reward = 0.0;
    double mean_abs_advantage = 0.0;
    double clip_fraction = 0.0;
    double kl = 0.0;
    double grad_norm = 0.0;
    int skipped_samples = 0;
};

namespace optimizer {

/// Group-relative advantages: (r - mean) / (population std + eps).
/// A singleton group or a group of identical rewards normalizes to zeros.
std::vector<double> group_advantages(const std::vector<double>& rewards, double std_epsilon);

/// Clipped-surrogate objective minus the KL penalty, averaged over every
/// sample in both rollout kinds. Reference params anchor the penalty.
double mixed_objective(const PolicyParams& params, const PolicyParams& reference,
                       const World& world, const std::vector<ResponseGroup>& responses,
                       const std::vector<CritiqueGroup>& critiques, const OptimizerConfig& cfg);

/// Analytic gradient of mixed_objective. Gradient accumulates in mini_batch
/// chunks; the chunk size cannot change the result, only the loop shape.
GradientReport mixed_gradient(const PolicyParams& params, const PolicyParams& reference,
                              const World& world, const std::vector<ResponseGroup>& responses,
                              const std::vector<CritiqueGroup>& critiques,
                              const OptimizerConfig& cfg, int mini_batch);

/// One ascent step on the mixed objective, in place.
StepReport mixed_update(PolicyParams& params, const PolicyParams& reference, const World& world,
                        const std::vector<ResponseGroup>& responses,
                        const std::vector<CritiqueGroup>& critiques, const OptimizerConfig& cfg,
                        int mini_batch);

}  // namespace optimizer

}  // namespace gencrit
