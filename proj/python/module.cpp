#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gencrit/analysis.hpp"
#include "gencrit/config.hpp"
#include "gencrit/harness.hpp"
#include "gencrit/optimizer.hpp"
#include "gencrit/presets.hpp"
#include "gencrit/world.hpp"

namespace py = pybind11;
using namespace gencrit;

PYBIND11_MODULE(_gencrit, m) {
    m.doc() = "Desk-scale simulator of joint generation and critique training";

    py::register_exception<Error>(m, "GencritError");

    py::class_<WorldConfig>(m, "WorldConfig")
        .def(py::init<>())
        .def_readwrite("num_questions", &WorldConfig::num_questions)
        .def_readwrite("num_strategies", &WorldConfig::num_strategies)
        .def_readwrite("feature_dim", &WorldConfig::feature_dim)
        .def_readwrite("evidence_noise", &WorldConfig::evidence_noise)
        .def_readwrite("success_mean", &WorldConfig::success_mean)
        .def_readwrite("success_concentration", &WorldConfig::success_concentration)
        .def_readwrite("refinement_base", &WorldConfig::refinement_base)
        .def_readwrite("refinement_boost", &WorldConfig::refinement_boost)
        .def_readwrite("seed", &WorldConfig::seed);

    py::class_<World>(m, "World")
        .def_static("build", &World::build)
        .def_property_readonly("num_questions", &World::num_questions)
        .def("uniform_policy_success_mean", &World::uniform_policy_success_mean)
        .def("success_probs", [](const World& w, int qid) {
            return w.question(qid).success_probs;
        });

    py::class_<PolicyConfig>(m, "PolicyConfig")
        .def(py::init<>())
        .def_readwrite("embed_dim", &PolicyConfig::embed_dim)
        .def_readwrite("init_scale", &PolicyConfig::init_scale);

    py::class_<RolloutConfig>(m, "RolloutConfig")
        .def(py::init<>())
        .def_readwrite("n", &RolloutConfig::n)
        .def_readwrite("questions_per_step", &RolloutConfig::questions_per_step)
        .def_readwrite("mini_batch", &RolloutConfig::mini_batch)
        .def_readwrite("refinement_attempts", &RolloutConfig::refinement_attempts);

    py::class_<OptimizerConfig>(m, "OptimizerConfig")
        .def(py::init<>())
        .def_property(
            "grouping",
            [](const OptimizerConfig& c) { return to_string(c.grouping); },
            [](OptimizerConfig& c, const std::string& s) {
                c.grouping = advantage_grouping_from_string(s);
            })
        .def_readwrite("std_epsilon", &OptimizerConfig::std_epsilon)
        .def_readwrite("clip_ratio", &OptimizerConfig::clip_ratio)
        .def_readwrite("kl_coef", &OptimizerConfig::kl_coef)
        .def_readwrite("learning_rate", &OptimizerConfig::learning_rate);

    py::class_<RewardConfig>(m, "RewardConfig")
        .def(py::init<>())
        .def_property(
            "variant", [](const RewardConfig& c) { return to_string(c.variant); },
            [](RewardConfig& c, const std::string& s) {
                c.variant = reward_variant_from_string(s);
            })
        .def_readwrite("critique_base", &RewardConfig::critique_base)
        .def_readwrite("weighted_numerator", &RewardConfig::weighted_numerator)
        .def_readwrite("skew_correct", &RewardConfig::skew_correct)
        .def_readwrite("skew_wrong", &RewardConfig::skew_wrong)
        .def_readwrite("denoise_correct_scale", &RewardConfig::denoise_correct_scale)
        .def_readwrite("denoise_wrong_scale", &RewardConfig::denoise_wrong_scale)
        .def_readwrite("ema_decay", &RewardConfig::ema_decay);

    py::class_<CacheConfig>(m, "CacheConfig")
        .def(py::init<>())
        .def_readwrite("capacity", &CacheConfig::capacity)
        .def_readwrite("consume_on_sample", &CacheConfig::consume_on_sample)
        .def_readwrite("static_per_question", &CacheConfig::static_per_question);

    py::class_<EvalConfig>(m, "EvalConfig")
        .def(py::init<>())
        .def_readwrite("per_question", &EvalConfig::per_question)
        .def_readwrite("probe_gammas", &EvalConfig::probe_gammas);

    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_static("from_text", &RunConfig::from_string)
        .def_static("from_file", &RunConfig::from_file)
        .def_property(
            "mode", [](const RunConfig& c) { return to_string(c.mode); },
            [](RunConfig& c, const std::string& s) { c.mode = train_mode_from_string(s); })
        .def_property(
            "data_mode", [](const RunConfig& c) { return to_string(c.data_mode); },
            [](RunConfig& c, const std::string& s) { c.data_mode = data_mode_from_string(s); })
        .def_readwrite("world", &RunConfig::world)
        .def_readwrite("policy", &RunConfig::policy)
        .def_readwrite("rollout", &RunConfig::rollout)
        .def_readwrite("optimizer", &RunConfig::optimizer)
        .def_readwrite("rewards", &RunConfig::rewards)
        .def_readwrite("cache", &RunConfig::cache)
        .def_readwrite("eval", &RunConfig::eval)
        .def_readwrite("steps", &RunConfig::steps)
        .def_readwrite("eval_every", &RunConfig::eval_every)
        .def_readwrite("seed", &RunConfig::seed)
        .def_readwrite("output_dir", &RunConfig::output_dir)
        .def_readwrite("freeze_generation", &RunConfig::freeze_generation)
        .def_readwrite("starvation_limit", &RunConfig::starvation_limit)
        .def("validate", &RunConfig::validate)
        .def("warnings", &RunConfig::warnings)
        .def("to_text", &RunConfig::to_config_text);

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("generation_accuracy", &EvalReport::generation_accuracy)
        .def_readonly("critique_accuracy", &EvalReport::critique_accuracy)
        .def_readonly("p1", &EvalReport::p1)
        .def_readonly("p2", &EvalReport::p2)
        .def_readonly("precision_correct", &EvalReport::precision_correct)
        .def_readonly("recall_correct", &EvalReport::recall_correct)
        .def_readonly("mean_response_reward", &EvalReport::mean_response_reward)
        .def_readonly("mean_denoised_reward", &EvalReport::mean_denoised_reward)
        .def_readonly("diligent_rate", &EvalReport::diligent_rate)
        .def("predicted_wrong_rate", &EvalReport::predicted_wrong_rate);

    py::class_<MetricsRow>(m, "MetricsRow")
        .def_readonly("step", &MetricsRow::step)
        .def_readonly("mode", &MetricsRow::mode)
        .def_readonly("data_mode", &MetricsRow::data_mode)
        .def_readonly("reward_variant", &MetricsRow::reward_variant)
        .def_readonly("seed", &MetricsRow::seed)
        .def_readonly("mean_R_r", &MetricsRow::mean_R_r)
        .def_readonly("ema_E_Rr", &MetricsRow::ema_E_Rr)
        .def_readonly("mean_R_c", &MetricsRow::mean_R_c)
        .def_readonly("gen_acc", &MetricsRow::gen_acc)
        .def_readonly("crit_acc", &MetricsRow::crit_acc)
        .def_readonly("p1", &MetricsRow::p1)
        .def_readonly("p2", &MetricsRow::p2)
        .def_readonly("precision_correct", &MetricsRow::precision_correct)
        .def_readonly("recall_correct", &MetricsRow::recall_correct)
        .def_readonly("clip_frac", &MetricsRow::clip_frac)
        .def_readonly("kl", &MetricsRow::kl);

    py::class_<RunResult>(m, "RunResult")
        .def_readonly("config", &RunResult::config)
        .def_readonly("metrics", &RunResult::metrics)
        .def_readonly("initial_eval", &RunResult::initial_eval)
        .def_readonly("final_eval", &RunResult::final_eval)
        .def_readonly("steps_completed", &RunResult::steps_completed)
        .def_readonly("aborted_starvation", &RunResult::aborted_starvation)
        .def_readonly("starved_steps", &RunResult::starved_steps);

    m.def(
        "run_training",
        [](const RunConfig& config, const std::string& metrics_path,
           const std::string& log_path, bool echo) {
            RunOptions options;
            options.metrics_path = metrics_path;
            options.log_path = log_path;
            options.echo = echo;
            return run_training(config, options);
        },
        py::arg("config"), py::arg("metrics_path") = "", py::arg("log_path") = "",
        py::arg("echo") = false);

    m.def("group_advantages", &optimizer::group_advantages, py::arg("rewards"),
          py::arg("std_epsilon") = 1e-6);

    py::class_<TheoryInputs>(m, "TheoryInputs")
        .def(py::init<>())
        .def_readwrite("p", &TheoryInputs::p)
        .def_readwrite("p1", &TheoryInputs::p1)
        .def_readwrite("p2", &TheoryInputs::p2)
        .def_readwrite("samples", &TheoryInputs::samples);

    py::class_<ClosedFormReward>(m, "ClosedFormReward")
        .def_readonly("direct", &ClosedFormReward::direct)
        .def_readonly("rearranged", &ClosedFormReward::rearranged)
        .def_readonly("expected_validation", &ClosedFormReward::expected_validation);

    py::class_<MonteCarloEstimate>(m, "MonteCarloEstimate")
        .def_readonly("estimate", &MonteCarloEstimate::estimate)
        .def_readonly("std_error", &MonteCarloEstimate::std_error);

    m.def("closed_form_expected_reward", &analysis::closed_form_expected_reward);
    m.def(
        "monte_carlo_outcome_reward",
        [](const TheoryInputs& inputs, double base, std::uint64_t seed) {
            return analysis::monte_carlo_expected_reward(
                inputs, analysis::outcome_reward_fn(base), seed);
        },
        py::arg("inputs"), py::arg("base") = 0.7, py::arg("seed") = 1);
    m.def(
        "monte_carlo_weighted_reward",
        [](const TheoryInputs& inputs, double numerator, std::uint64_t seed) {
            return analysis::monte_carlo_expected_reward(
                inputs, analysis::weighted_reward_fn(inputs.p, numerator), seed);
        },
        py::arg("inputs"), py::arg("numerator") = 0.35, py::arg("seed") = 1);

    m.def("preset_names", &preset_names);
}
