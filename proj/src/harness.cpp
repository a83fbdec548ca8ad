#include "gencrit/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <utility>

#include "gencrit/errors.hpp"
#include "gencrit/rng.hpp"
#include "gencrit/rollout.hpp"

namespace gencrit {

namespace {

std::uint64_t eval_uid(int tier, int question_id, int index) {
    return (0xEull << 56) | (static_cast<std::uint64_t>(tier + 1) << 40) |
           (static_cast<std::uint64_t>(static_cast<std::uint32_t>(question_id)) << 16) |
           static_cast<std::uint64_t>(static_cast<std::uint16_t>(index));
}

}  // namespace

std::vector<CacheEntry> build_eval_set(const World& world, const EvalConfig& eval,
                                       std::uint64_t seed) {
    eval.validate();
    std::vector<CacheEntry> entries;
    for (const Question& question : world.questions()) {
        std::vector<ResponseRecord> pool;
        pool.reserve(eval.probe_gammas.size() * static_cast<std::size_t>(eval.per_question));
        const double max_p =
            *std::max_element(question.success_probs.begin(), question.success_probs.end());
        for (std::size_t tier = 0; tier < eval.probe_gammas.size(); ++tier) {
            const double gamma = eval.probe_gammas[tier];
            std::vector<double> weights(question.success_probs.size());
            double total = 0.0;
            for (std::size_t s = 0; s < weights.size(); ++s) {
                weights[s] = std::exp(gamma * (question.success_probs[s] - max_p));
                total += weights[s];
            }
            Rng rng = Rng::derive(seed, {stream::kEvalSet, tier + 1,
                                         static_cast<std::uint64_t>(question.id)});
            for (int i = 0; i < eval.per_question; ++i) {
                const int s = static_cast<int>(rng.categorical(weights));
                ResponseRecord r;
                r.question_id = question.id;
                r.strategy = s;
                r.correct = rng.bernoulli(question.success_probs[s]);
                r.noise = rng.normal();
                r.behavior_logprob = std::log(weights[s] / total);
                r.uid = eval_uid(static_cast<int>(tier), question.id, i);
                r.evidence = world.observe_response(question, r);
                pool.push_back(std::move(r));
            }
        }
        Rng pick = Rng::derive(seed, {stream::kEvalSet, 0, static_cast<std::uint64_t>(question.id)});
        if (auto pair = filter_group(pool, pick)) {
            entries.push_back({question.id, std::move(pair->first), true, 0});
            entries.push_back({question.id, std::move(pair->second), false, 0});
        }
    }
    if (entries.empty())
        throw ConfigError(
            "eval set is empty: every question came out all-correct or all-wrong; "
            "raise eval.per_question or adjust world.success_mean");
    return entries;
}

EvalReport evaluate(const PolicyParams& critique_params, const PolicyParams& generation_params,
                    const World& world, const std::vector<CacheEntry>& eval_set,
                    const RewardConfig& rewards) {
    if (eval_set.empty()) throw ArgumentError("evaluate: empty eval set");
    policy::check_shape(critique_params, world);
    policy::check_shape(generation_params, world);

    EvalReport ev;
    double acc = 0.0;
    for (const Question& question : world.questions()) {
        const std::vector<double> dist =
            policy::generation_distribution(generation_params, question);
        for (std::size_t s = 0; s < dist.size(); ++s) acc += dist[s] * question.success_probs[s];
    }
    ev.generation_accuracy = acc / world.num_questions();
    ev.mean_response_reward = ev.generation_accuracy;

    std::size_t n_correct = 0;
    std::size_t n_wrong = 0;
    std::size_t true_pos = 0;
    std::size_t true_neg = 0;
    double diligent_sum = 0.0;
    double denoised_sum = 0.0;
    for (const CacheEntry& entry : eval_set) {
        const CritiqueProbs probs =
            policy::critique_distribution(critique_params, entry.response.evidence);
        const bool judged_correct = probs.marginal_correct() > 0.5;
        const bool diligent = probs.p_diligent > 0.5;
        diligent_sum += probs.p_diligent;
        if (entry.correct) {
            ++n_correct;
            if (judged_correct) ++true_pos;
        } else {
            ++n_wrong;
            if (!judged_correct) ++true_neg;
        }
        const double p_refine =
            world.refinement_success_prob(entry.correct, judged_correct, diligent);
        denoised_sum +=
            (judged_correct ? rewards.denoise_correct_scale : rewards.denoise_wrong_scale) *
            p_refine;
    }
    ev.p1 = n_correct > 0 ? static_cast<double>(true_pos) / n_correct : 0.0;
    ev.p2 = n_wrong > 0 ? static_cast<double>(true_neg) / n_wrong : 0.0;
    ev.critique_accuracy = (ev.p1 + ev.p2) / 2.0;
    const double false_pos_rate = 1.0 - ev.p2;
    ev.precision_correct =
        ev.p1 + false_pos_rate > 0.0 ? ev.p1 / (ev.p1 + false_pos_rate) : 0.0;
    ev.recall_correct = ev.p1;
    ev.diligent_rate = diligent_sum / static_cast<double>(eval_set.size());
    ev.mean_denoised_reward = denoised_sum / static_cast<double>(eval_set.size());
    return ev;
}

World build_run_world(const RunConfig& config, std::uint64_t seed) {
    // Pair worlds across arms at matched seeds, vary them across seeds.
    WorldConfig world_config = config.world;
    world_config.seed = Rng::derive(config.world.seed, {stream::kWorld, seed}).next_u64();
    return World::build(world_config);
}

RunResult run_training(const RunConfig& config, const RunOptions& options) {
    config.validate();
    const std::uint64_t seed = config.seed;

    RunResult result;
    result.config = config;

    const World world = build_run_world(config, seed);

    Rng init_rng = Rng::derive(seed, {stream::kPolicyInit});
    PolicyParams params =
        PolicyParams::random_init(config.policy_shape(), config.policy.init_scale, init_rng);
    const PolicyParams initial_params = params;

    const std::vector<CacheEntry> eval_set = build_eval_set(world, config.eval, seed);

    QuestionResponseCache cache(config.cache.capacity, config.cache_mode());
    cache.set_consume_on_sample(config.cache.consume_on_sample);
    if (config.data_mode == DataMode::static_set) {
        if (config.mode == TrainMode::g_rl)
            throw ConfigError("run.data_mode static is meaningless for mode g_rl");
        cache = build_static_dataset(world, initial_params, config.cache.static_per_question,
                                     seed);
    }

    RunningStats stats;
    stats.decay = config.rewards.ema_decay;

    JsonlLogger log = options.log_path.empty() ? JsonlLogger{} : JsonlLogger(options.log_path);
    log.log({{"event", "run_start"},
             {"mode", to_string(config.mode)},
             {"data_mode", to_string(config.data_mode)},
             {"reward_variant", to_string(config.rewards.variant)},
             {"seed", seed},
             {"steps", config.steps},
             {"world_seed", world.config().seed},
             {"eval_pairs", eval_set.size()}});
    for (const std::string& warning : config.warnings()) {
        log.log({{"event", "warning"}, {"message", warning}});
        if (options.echo) std::cerr << "warning: " << warning << '\n';
    }

    double last_mean_rr = 0.0;
    bool have_rr = false;
    double last_mean_rc = 0.0;
    bool have_rc = false;
    double last_clip_frac = 0.0;
    double last_kl = 0.0;
    EvalReport last_eval;
    int last_eval_step = -1;

    auto do_eval = [&](int step) {
        const PolicyParams& gen_params = config.freeze_generation ? initial_params : params;
        const EvalReport ev = evaluate(params, gen_params, world, eval_set, config.rewards);
        MetricsRow row;
        row.step = step;
        row.mode = to_string(config.mode);
        row.data_mode = to_string(config.data_mode);
        row.reward_variant = to_string(config.rewards.variant);
        row.seed = seed;
        row.mean_R_r = have_rr ? last_mean_rr : ev.mean_response_reward;
        row.ema_E_Rr = stats.ema_response_reward;
        row.mean_R_c =
            have_rc ? last_mean_rc : config.rewards.critique_base * (ev.p1 + ev.p2) / 2.0;
        row.gen_acc = ev.generation_accuracy;
        row.crit_acc = ev.critique_accuracy;
        row.p1 = ev.p1;
        row.p2 = ev.p2;
        row.precision_correct = ev.precision_correct;
        row.recall_correct = ev.recall_correct;
        row.clip_frac = last_clip_frac;
        row.kl = last_kl;
        result.metrics.push_back(row);
        log.log({{"event", "eval"},
                 {"step", step},
                 {"gen_acc", ev.generation_accuracy},
                 {"crit_acc", ev.critique_accuracy},
                 {"p1", ev.p1},
                 {"p2", ev.p2},
                 {"precision_correct", ev.precision_correct},
                 {"recall_correct", ev.recall_correct},
                 {"diligent_rate", ev.diligent_rate},
                 {"mean_denoised_reward", ev.mean_denoised_reward},
                 {"ema_E_Rr", stats.ema_response_reward}});
        if (options.echo) {
            char line[160];
            std::snprintf(line, sizeof(line),
                          "[seed %llu] step %d/%d gen=%.4f crit=%.4f p1=%.3f p2=%.3f",
                          static_cast<unsigned long long>(seed), step, config.steps,
                          ev.generation_accuracy, ev.critique_accuracy, ev.p1, ev.p2);
            std::cout << line << std::endl;
        }
        last_eval = ev;
        last_eval_step = step;
    };

    do_eval(0);
    result.initial_eval = last_eval;

    std::uint64_t consecutive_starved = 0;
    int completed = 0;
    for (int step = 1; step <= config.steps; ++step) {
        const bool needs_first_order =
            !(config.mode == TrainMode::c_rl && config.data_mode == DataMode::static_set);

        std::vector<ResponseGroup> response_groups;
        double step_mean_rr = 0.0;
        int response_samples = 0;
        if (needs_first_order) {
            Rng batch_rng =
                Rng::derive(seed, {stream::kQuestionBatch, static_cast<std::uint64_t>(step)});
            std::vector<int> batch(static_cast<std::size_t>(config.rollout.questions_per_step));
            for (int& qid : batch)
                qid = static_cast<int>(
                    batch_rng.uniform_index(static_cast<std::uint64_t>(world.num_questions())));
            const PolicyParams& gen_params = config.freeze_generation ? initial_params : params;
            response_groups =
                rollout::first_order(gen_params, world, batch, config.rollout.n, seed, step);
            int correct = 0;
            for (ResponseGroup& group : response_groups) {
                group.rewards.resize(group.samples.size());
                for (std::size_t i = 0; i < group.samples.size(); ++i) {
                    const bool ok = world.verify(group.samples[i]);
                    group.rewards[i] = rewards::response_reward(ok);
                    if (ok) ++correct;
                    ++response_samples;
                }
            }
            step_mean_rr =
                response_samples > 0 ? static_cast<double>(correct) / response_samples : 0.0;
        }

        std::vector<CritiqueGroup> critique_groups;
        bool starved_this_step = false;
        double step_mean_rc = 0.0;
        int critique_samples = 0;
        std::size_t pairs_drawn = 0;
        if (config.mode != TrainMode::g_rl) {
            if (config.data_mode == DataMode::dynamic_filtered) {
                Rng filter_rng =
                    Rng::derive(seed, {stream::kFilter, static_cast<std::uint64_t>(step)});
                std::vector<std::pair<ResponseRecord, ResponseRecord>> pairs;
                for (const ResponseGroup& group : response_groups)
                    if (auto pair = filter_group(group.samples, filter_rng))
                        pairs.push_back(std::move(*pair));
                cache.push_pairs(pairs, step);
            } else if (config.data_mode == DataMode::dynamic_random) {
                Rng pick_rng =
                    Rng::derive(seed, {stream::kFilter, static_cast<std::uint64_t>(step)});
                std::vector<ResponseRecord> kept;
                kept.reserve(response_groups.size());
                for (const ResponseGroup& group : response_groups)
                    kept.push_back(group.samples[pick_rng.uniform_index(group.samples.size())]);
                cache.push_raw(kept, step);
            }

            Rng sample_rng =
                Rng::derive(seed, {stream::kCacheSample, static_cast<std::uint64_t>(step)});
            const QuestionResponseCache::SampleResult drawn = cache.sample(
                static_cast<std::size_t>(config.rollout.questions_per_step), sample_rng);
            pairs_drawn = drawn.entries.size();
            if (drawn.entries.empty()) {
                starved_this_step = true;
            } else {
                critique_groups = rollout::second_order(params, world, drawn.entries,
                                                        config.rollout.n, seed, step);
                double reward_sum = 0.0;
                for (CritiqueGroup& group : critique_groups) {
                    group.rewards.resize(group.samples.size());
                    if (config.rewards.variant == RewardVariant::denoised_combined)
                        group.refinements.resize(group.samples.size());
                    for (std::size_t i = 0; i < group.samples.size(); ++i) {
                        const CritiqueRecord& critique = group.samples[i];
                        double r = 0.0;
                        switch (config.rewards.variant) {
                            case RewardVariant::outcome:
                                r = rewards::critique_outcome_reward(
                                    critique.judged_correct, group.pair.correct, config.rewards);
                                break;
                            case RewardVariant::weighted:
                                r = rewards::weighted_critique_reward(
                                    critique.judged_correct, group.pair.correct, stats,
                                    config.rewards);
                                break;
                            case RewardVariant::skew:
                                r = rewards::skew_reward(
                                    critique.judged_correct, group.pair.correct,
                                    config.rewards.skew_correct, config.rewards.skew_wrong);
                                break;
                            case RewardVariant::denoised_combined: {
                                const RefinementOutcome outcome = rollout::refinement(
                                    world, group.pair.response, critique,
                                    config.rollout.refinement_attempts, seed, step,
                                    static_cast<int>(i));
                                group.refinements[i] = outcome;
                                r = rewards::critique_outcome_reward(critique.judged_correct,
                                                                     group.pair.correct,
                                                                     config.rewards) +
                                    rewards::denoised_reward(critique.judged_correct, outcome,
                                                             config.rewards);
                                break;
                            }
                        }
                        group.rewards[i] = r;
                        reward_sum += r;
                        ++critique_samples;
                    }
                }
                step_mean_rc = critique_samples > 0 ? reward_sum / critique_samples : 0.0;
            }
        }

        if (starved_this_step) {
            ++result.starved_steps;
            ++consecutive_starved;
        } else {
            consecutive_starved = 0;
        }
        if (consecutive_starved > static_cast<std::uint64_t>(config.starvation_limit)) {
            log.log({{"event", "starvation_abort"},
                     {"step", step},
                     {"consecutive_starved", consecutive_starved}});
            if (options.echo)
                std::cerr << "aborting: cache starved for " << consecutive_starved
                          << " consecutive steps at step " << step << '\n';
            result.aborted_starvation = true;
            completed = step - 1;
            break;
        }

        std::vector<ResponseGroup> train_responses;
        if (config.mode != TrainMode::c_rl && !config.freeze_generation)
            train_responses = std::move(response_groups);
        std::vector<CritiqueGroup> train_critiques;
        if (config.mode != TrainMode::g_rl) train_critiques = std::move(critique_groups);

        const PolicyParams reference = params;
        const StepReport step_report =
            optimizer::mixed_update(params, reference, world, train_responses, train_critiques,
                                    config.optimizer, config.rollout.mini_batch);

        if (needs_first_order) rewards::update_stats(stats, step_mean_rr);

        last_clip_frac = step_report.clip_fraction;
        last_kl = step_report.kl;
        if (needs_first_order) {
            last_mean_rr = step_mean_rr;
            have_rr = true;
        }
        if (critique_samples > 0) {
            last_mean_rc = step_mean_rc;
            have_rc = true;
        }

        log.log({{"event", "step"},
                 {"step", step},
                 {"response_samples", response_samples},
                 {"critique_samples", critique_samples},
                 {"pairs_drawn", pairs_drawn},
                 {"mean_R_r", step_mean_rr},
                 {"mean_R_c", step_mean_rc},
                 {"ema_E_Rr", stats.ema_response_reward},
                 {"starved", starved_this_step},
                 {"cache_size", cache.size()},
                 {"cache_correct", cache.correct_count()},
                 {"cache_wrong", cache.wrong_count()},
                 {"clip_frac", step_report.clip_fraction},
                 {"kl", step_report.kl},
                 {"grad_norm", step_report.grad_norm},
                 {"skipped_samples", step_report.skipped_samples},
                 {"weighted_guard_hits", stats.weighted_guard_hits}});

        completed = step;
        if (step % config.eval_every == 0 && step != config.steps) do_eval(step);
    }

    result.steps_completed = completed;
    if (last_eval_step != completed) do_eval(completed);
    result.final_eval = last_eval;
    result.stats = stats;
    result.final_params = std::move(params);
    result.final_cache = std::move(cache);

    log.log({{"event", "run_end"},
             {"steps_completed", result.steps_completed},
             {"aborted_starvation", result.aborted_starvation},
             {"starved_steps", result.starved_steps},
             {"weighted_guard_hits", stats.weighted_guard_hits}});

    if (!options.metrics_path.empty())
        report::write_metrics_csv(options.metrics_path, result.metrics);
    return result;
}

}  // namespace gencrit
