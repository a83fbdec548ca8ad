#include "gencrit/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <type_traits>

#include "gencrit/errors.hpp"

namespace gencrit {

std::string to_string(AdvantageGrouping grouping) {
    switch (grouping) {
        case AdvantageGrouping::per_prompt: return "per_prompt";
        case AdvantageGrouping::combined: return "combined";
    }
    throw ArgumentError("unknown advantage grouping");
}

AdvantageGrouping advantage_grouping_from_string(const std::string& name) {
    if (name == "per_prompt") return AdvantageGrouping::per_prompt;
    if (name == "combined") return AdvantageGrouping::combined;
    throw ConfigError("optimizer.grouping must be per_prompt or combined, got '" + name + "'");
}

void OptimizerConfig::validate() const {
    if (std_epsilon <= 0.0) throw ConfigError("optimizer.std_epsilon must be > 0");
    if (clip_ratio <= 0.0 || clip_ratio >= 1.0)
        throw ConfigError("optimizer.clip_ratio must be in (0, 1)");
    if (kl_coef < 0.0) throw ConfigError("optimizer.kl_coef must be >= 0");
    if (learning_rate <= 0.0) throw ConfigError("optimizer.learning_rate must be > 0");
}

namespace optimizer {

std::vector<double> group_advantages(const std::vector<double>& rewards, double std_epsilon) {
    const std::size_t n = rewards.size();
    if (n == 0) throw ArgumentError("advantage group must not be empty");
    std::vector<double> advantages(n, 0.0);
    if (n == 1) return advantages;

    const auto [min_it, max_it] = std::minmax_element(rewards.begin(), rewards.end());
    if (*min_it == *max_it) return advantages;  // identical rewards carry no signal

    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    var /= static_cast<double>(n);
    const double denom = std::sqrt(var) + std_epsilon;
    for (std::size_t i = 0; i < n; ++i) advantages[i] = (rewards[i] - mean) / denom;
    return advantages;
}

namespace {

struct FlatSample {
    bool is_response = true;
    const ResponseGroup* response_group = nullptr;
    const CritiqueGroup* critique_group = nullptr;
    std::size_t index = 0;
    double advantage = 0.0;
};

double behavior_logprob(const FlatSample& s) {
    return s.is_response ? s.response_group->samples[s.index].behavior_logprob
                         : s.critique_group->samples[s.index].behavior_logprob;
}

/// Advantages for every sample, honoring the grouping mode, then flattened in
/// rollout order: responses first, critiques after.
std::vector<FlatSample> flatten(const std::vector<ResponseGroup>& responses,
                                const std::vector<CritiqueGroup>& critiques,
                                const OptimizerConfig& cfg) {
    for (const ResponseGroup& g : responses) {
        if (g.rewards.size() != g.samples.size())
            throw ArgumentError("response group rewards and samples must align");
    }
    for (const CritiqueGroup& g : critiques) {
        if (g.rewards.size() != g.samples.size())
            throw ArgumentError("critique group rewards and samples must align");
    }

    std::vector<FlatSample> flat;
    auto append = [&flat](const auto& group, const std::vector<double>& advantages) {
        for (std::size_t i = 0; i < group.samples.size(); ++i) {
            FlatSample s;
            if constexpr (std::is_same_v<std::decay_t<decltype(group)>, ResponseGroup>) {
                s.is_response = true;
                s.response_group = &group;
            } else {
                s.is_response = false;
                s.critique_group = &group;
            }
            s.index = i;
            s.advantage = advantages[i];
            flat.push_back(s);
        }
    };

    if (cfg.grouping == AdvantageGrouping::per_prompt) {
        for (const ResponseGroup& g : responses) {
            if (g.samples.empty()) continue;
            append(g, group_advantages(g.rewards, cfg.std_epsilon));
        }
        for (const CritiqueGroup& g : critiques) {
            if (g.samples.empty()) continue;
            append(g, group_advantages(g.rewards, cfg.std_epsilon));
        }
        return flat;
    }

    // combined: one pool per rollout kind
    std::vector<double> pool;
    for (const ResponseGroup& g : responses)
        pool.insert(pool.end(), g.rewards.begin(), g.rewards.end());
    if (!pool.empty()) {
        const std::vector<double> advantages = group_advantages(pool, cfg.std_epsilon);
        std::size_t cursor = 0;
        for (const ResponseGroup& g : responses) {
            if (g.samples.empty()) continue;
            std::vector<double> slice(advantages.begin() + cursor,
                                      advantages.begin() + cursor + g.samples.size());
            cursor += g.samples.size();
            append(g, slice);
        }
    }
    pool.clear();
    for (const CritiqueGroup& g : critiques)
        pool.insert(pool.end(), g.rewards.begin(), g.rewards.end());
    if (!pool.empty()) {
        const std::vector<double> advantages = group_advantages(pool, cfg.std_epsilon);
        std::size_t cursor = 0;
        for (const CritiqueGroup& g : critiques) {
            if (g.samples.empty()) continue;
            std::vector<double> slice(advantages.begin() + cursor,
                                      advantages.begin() + cursor + g.samples.size());
            cursor += g.samples.size();
            append(g, slice);
        }
    }
    return flat;
}

struct SampleTerms {
    bool valid = false;
    double objective = 0.0;   // min(rho A, clip(rho) A) - kl_coef * k3
    double grad_coef = 0.0;   // multiplier on d(logprob)/d(params)
    bool clipped = false;
    double k3 = 0.0;
};

SampleTerms sample_terms(const PolicyParams& params, const PolicyParams& reference,
                         const World& world, const FlatSample& s, const OptimizerConfig& cfg) {
    SampleTerms t;
    double lp, lp_ref;
    if (s.is_response) {
        const ResponseRecord& r = s.response_group->samples[s.index];
        lp = policy::current_logprob(params, world, r);
        lp_ref = policy::current_logprob(reference, world, r);
    } else {
        const CritiqueRecord& c = s.critique_group->samples[s.index];
        const ResponseRecord& r = s.critique_group->pair.response;
        lp = policy::current_logprob(params, world, c, r);
        lp_ref = policy::current_logprob(reference, world, c, r);
    }
    const double lp_b = behavior_logprob(s);
    if (!std::isfinite(lp) || !std::isfinite(lp_ref) || !std::isfinite(lp_b)) return t;

    const double rho = std::exp(lp - lp_b);
    const double a = s.advantage;
    const double unclipped = rho * a;
    const double clipped = std::clamp(rho, 1.0 - cfg.clip_ratio, 1.0 + cfg.clip_ratio) * a;
    const double delta = lp_ref - lp;
    t.k3 = std::exp(delta) - delta - 1.0;
    t.valid = true;
    t.clipped = unclipped > clipped;
    t.objective = std::min(unclipped, clipped) - cfg.kl_coef * t.k3;
    t.grad_coef = (t.clipped ? 0.0 : a * rho) - cfg.kl_coef * (1.0 - std::exp(delta));
    return t;
}

}  // namespace

double mixed_objective(const PolicyParams& params, const PolicyParams& reference,
                       const World& world, const std::vector<ResponseGroup>& responses,
                       const std::vector<CritiqueGroup>& critiques, const OptimizerConfig& cfg) {
    const std::vector<FlatSample> flat = flatten(responses, critiques, cfg);
    double total = 0.0;
    int valid = 0;
    for (const FlatSample& s : flat) {
        const SampleTerms t = sample_terms(params, reference, world, s, cfg);
        if (!t.valid) continue;
        total += t.objective;
        ++valid;
    }
    return valid > 0 ? total / valid : 0.0;
}

GradientReport mixed_gradient(const PolicyParams& params, const PolicyParams& reference,
                              const World& world, const std::vector<ResponseGroup>& responses,
                              const std::vector<CritiqueGroup>& critiques,
                              const OptimizerConfig& cfg, int mini_batch) {
    if (mini_batch < 1) throw ArgumentError("mini_batch must be >= 1");
    const std::vector<FlatSample> flat = flatten(responses, critiques, cfg);

    GradientReport report;
    report.grad.assign(params.size(), 0.0);
    double objective = 0.0;
    double kl = 0.0;
    int clipped = 0;
    int valid = 0;
    const std::size_t chunk = static_cast<std::size_t>(mini_batch);
    for (std::size_t start = 0; start < flat.size(); start += chunk) {
        const std::size_t stop = std::min(flat.size(), start + chunk);
        for (std::size_t i = start; i < stop; ++i) {
            const FlatSample& s = flat[i];
            const SampleTerms t = sample_terms(params, reference, world, s, cfg);
            if (!t.valid) {
                ++report.skipped;
                continue;
            }
            ++valid;
            objective += t.objective;
            kl += t.k3;
            if (t.clipped) ++clipped;
            if (t.grad_coef != 0.0) {
                if (s.is_response) {
                    const ResponseRecord& r = s.response_group->samples[s.index];
                    policy::add_scaled_grad_response(params, world.question(r.question_id),
                                                     r.strategy, t.grad_coef, report.grad);
                } else {
                    const CritiqueRecord& c = s.critique_group->samples[s.index];
                    const ResponseRecord& r = s.critique_group->pair.response;
                    policy::add_scaled_grad_critique(params, r.evidence, c.judged_correct,
                                                     c.diligent, t.grad_coef, report.grad);
                }
            }
        }
    }
    report.samples = valid;
    if (valid > 0) {
        const double inv = 1.0 / static_cast<double>(valid);
        for (double& g : report.grad) g *= inv;
        report.objective = objective * inv;
        report.kl = kl * inv;
        report.clip_fraction = static_cast<double>(clipped) * inv;
    }
    return report;
}

StepReport mixed_update(PolicyParams& params, const PolicyParams& reference, const World& world,
                        const std::vector<ResponseGroup>& responses,
                        const std::vector<CritiqueGroup>& critiques, const OptimizerConfig& cfg,
                        int mini_batch) {
    cfg.validate();
    const GradientReport grad = mixed_gradient(params, reference, world, responses, critiques,
                                               cfg, mini_batch);

    StepReport report;
    report.response_groups = static_cast<int>(responses.size());
    report.critique_groups = static_cast<int>(critiques.size());
    double reward_sum = 0.0;
    int reward_count = 0;
    for (const ResponseGroup& g : responses) {
        report.response_samples += static_cast<int>(g.samples.size());
        for (double r : g.rewards) {
            reward_sum += r;
            ++reward_count;
        }
    }
    report.mean_response_reward = reward_count > 0 ? reward_sum / reward_count : 0.0;
    reward_sum = 0.0;
    reward_count = 0;
    for (const CritiqueGroup& g : critiques) {
        report.critique_samples += static_cast<int>(g.samples.size());
        for (double r : g.rewards) {
            reward_sum += r;
            ++reward_count;
        }
    }
    report.mean_critique_reward = reward_count > 0 ? reward_sum / reward_count : 0.0;

    double abs_adv = 0.0;
    const std::vector<FlatSample> flat = flatten(responses, critiques, cfg);
    for (const FlatSample& s : flat) abs_adv += std::abs(s.advantage);
    report.mean_abs_advantage = flat.empty() ? 0.0 : abs_adv / static_cast<double>(flat.size());

    report.clip_fraction = grad.clip_fraction;
    report.kl = grad.kl;
    report.skipped_samples = grad.skipped;
    double norm_sq = 0.0;
    for (double g : grad.grad) norm_sq += g * g;
    report.grad_norm = std::sqrt(norm_sq);

    if (grad.samples > 0) params = policy::apply_update(params, grad.grad, cfg.learning_rate);
    return report;
}

}  // namespace optimizer

}  // namespace gencrit
