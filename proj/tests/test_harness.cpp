#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gencrit/errors.hpp"
#include "gencrit/harness.hpp"
#include "gencrit/snapshot.hpp"

using namespace gencrit;

namespace {

RunConfig tiny_config() {
    RunConfig config;
    config.world.num_questions = 16;
    config.world.seed = 9;
    config.rollout.questions_per_step = 16;
    config.rollout.n = 4;
    config.rollout.mini_batch = 16;
    config.cache.capacity = 256;
    config.eval.per_question = 6;
    config.steps = 5;
    config.eval_every = 2;
    config.seed = 3;
    return config;
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

bool same_params(const PolicyParams& a, const PolicyParams& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t k = 0; k < a.size(); ++k)
        if (a.data()[k] != b.data()[k]) return false;
    return true;
}

}  // namespace

TEST_CASE("the eval set pairs one correct and one wrong response per question") {
    const World world = World::build(WorldConfig{});
    EvalConfig eval;
    const auto entries = build_eval_set(world, eval, 5);
    REQUIRE(!entries.empty());
    CHECK(entries.size() % 2 == 0);
    std::map<int, std::pair<int, int>> per_question;  // correct, wrong
    for (const CacheEntry& e : entries) {
        CHECK(e.correct == e.response.correct);
        CHECK(e.correct == world.verify(e.response));
        (e.correct ? per_question[e.question_id].first
                   : per_question[e.question_id].second)++;
    }
    for (const auto& [qid, counts] : per_question) {
        CHECK(counts.first == 1);
        CHECK(counts.second == 1);
    }
}

TEST_CASE("the eval set is a pure function of world and seed") {
    const World world = World::build(WorldConfig{});
    EvalConfig eval;
    const auto a = build_eval_set(world, eval, 5);
    const auto b = build_eval_set(world, eval, 5);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].response.uid == b[i].response.uid);
        CHECK(a[i].response.noise == b[i].response.noise);
        CHECK(a[i].response.strategy == b[i].response.strategy);
    }
    const auto c = build_eval_set(world, eval, 6);
    bool any_difference = c.size() != a.size();
    for (std::size_t i = 0; i < a.size() && !any_difference; ++i)
        if (a[i].response.noise != c[i].response.noise) any_difference = true;
    CHECK(any_difference);
}

TEST_CASE("a degenerate world yields no eval set") {
    WorldConfig config;
    config.num_questions = 2;
    config.num_strategies = 2;
    config.feature_dim = 2;
    std::vector<Question> questions;
    for (int i = 0; i < 2; ++i) {
        Question q;
        q.id = i;
        q.features = {0.5, -0.5};
        q.success_probs = {1.0, 1.0};
        questions.push_back(q);
    }
    const World world = World::restore(config, std::move(questions));
    CHECK_THROWS_AS(build_eval_set(world, EvalConfig{}, 1), ConfigError);
}

TEST_CASE("evaluation is deterministic and ties accuracy to p1 and p2") {
    const World world = World::build(WorldConfig{});
    const auto eval_set = build_eval_set(world, EvalConfig{}, 5);
    Rng rng(2);
    const PolicyParams params = PolicyParams::random_init(PolicyShape{}, 0.2, rng);
    const RewardConfig rewards;
    const EvalReport a = evaluate(params, params, world, eval_set, rewards);
    const EvalReport b = evaluate(params, params, world, eval_set, rewards);
    CHECK(a.generation_accuracy == b.generation_accuracy);
    CHECK(a.p1 == b.p1);
    CHECK(a.p2 == b.p2);
    CHECK(a.diligent_rate == b.diligent_rate);
    CHECK(a.critique_accuracy == doctest::Approx((a.p1 + a.p2) / 2.0).epsilon(1e-12));
    CHECK(a.predicted_wrong_rate() ==
          doctest::Approx((1.0 - a.p1 + a.p2) / 2.0).epsilon(1e-12));
    CHECK_THROWS_AS(evaluate(params, params, world, {}, rewards), ArgumentError);
}

TEST_CASE("a uniform policy scores the world mean") {
    const World world = World::build(WorldConfig{});
    const auto eval_set = build_eval_set(world, EvalConfig{}, 5);
    const PolicyParams zeros = PolicyParams::zeros(PolicyShape{});
    const EvalReport ev = evaluate(zeros, zeros, world, eval_set, RewardConfig{});
    CHECK(ev.generation_accuracy ==
          doctest::Approx(world.uniform_policy_success_mean()).epsilon(1e-12));
}

TEST_CASE("metric fallbacks at the judgment extremes") {
    const World world = World::build(WorldConfig{});
    const auto eval_set = build_eval_set(world, EvalConfig{}, 5);
    PolicyParams always_yes = PolicyParams::zeros(PolicyShape{});
    always_yes.judge_head().back() = 50.0;  // bias drives every judgment to "correct"
    EvalReport ev = evaluate(always_yes, always_yes, world, eval_set, RewardConfig{});
    CHECK(ev.p1 == 1.0);
    CHECK(ev.p2 == 0.0);
    CHECK(ev.precision_correct == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(ev.recall_correct == 1.0);

    PolicyParams always_no = PolicyParams::zeros(PolicyShape{});
    always_no.judge_head().back() = -50.0;
    ev = evaluate(always_no, always_no, world, eval_set, RewardConfig{});
    CHECK(ev.p1 == 0.0);
    CHECK(ev.p2 == 1.0);
    CHECK(ev.precision_correct == 0.0);  // no positive predictions to score
    CHECK(ev.recall_correct == 0.0);
}

TEST_CASE("run worlds are remixed per seed but shared across configs") {
    RunConfig config = tiny_config();
    const World a = build_run_world(config, 1);
    const World b = build_run_world(config, 2);
    CHECK(a.config().seed != b.config().seed);
    RunConfig other = tiny_config();
    other.mode = TrainMode::c_rl;
    other.rewards.variant = RewardVariant::skew;
    const World c = build_run_world(other, 1);
    CHECK(a.config().seed == c.config().seed);
    CHECK(a.question(0).features == c.question(0).features);
}

TEST_CASE("a small run replays byte for byte") {
    const RunConfig config = tiny_config();
    const std::string path_a = temp_path("gencrit_run_a.csv");
    const std::string path_b = temp_path("gencrit_run_b.csv");
    RunOptions options;
    options.metrics_path = path_a;
    const RunResult a = run_training(config, options);
    options.metrics_path = path_b;
    const RunResult b = run_training(config, options);

    CHECK(a.steps_completed == 5);
    CHECK(!a.aborted_starvation);
    std::ifstream fa(path_a, std::ios::binary);
    std::ifstream fb(path_b, std::ios::binary);
    const std::string bytes_a((std::istreambuf_iterator<char>(fa)),
                              std::istreambuf_iterator<char>());
    const std::string bytes_b((std::istreambuf_iterator<char>(fb)),
                              std::istreambuf_iterator<char>());
    CHECK(!bytes_a.empty());
    CHECK(bytes_a == bytes_b);
    CHECK(same_params(a.final_params, b.final_params));
    std::filesystem::remove(path_a);
    std::filesystem::remove(path_b);

    // Eval cadence: step 0, every eval_every, and the final step.
    std::vector<int> steps;
    for (const MetricsRow& row : a.metrics) steps.push_back(row.step);
    CHECK(steps == std::vector<int>{0, 2, 4, 5});
    for (const MetricsRow& row : a.metrics) {
        CHECK(row.mode == "gc_rl");
        CHECK(row.crit_acc == doctest::Approx((row.p1 + row.p2) / 2.0).epsilon(1e-12));
    }
}

TEST_CASE("the metrics csv round trips through the reader") {
    const RunConfig config = tiny_config();
    const std::string path = temp_path("gencrit_roundtrip.csv");
    RunOptions options;
    options.metrics_path = path;
    const RunResult result = run_training(config, options);
    const auto rows = report::read_metrics_csv(path);
    REQUIRE(rows.size() == result.metrics.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].step == result.metrics[i].step);
        CHECK(rows[i].gen_acc == result.metrics[i].gen_acc);
        CHECK(rows[i].p1 == result.metrics[i].p1);
        CHECK(rows[i].ema_E_Rr == result.metrics[i].ema_E_Rr);
        CHECK(rows[i].reward_variant == result.metrics[i].reward_variant);
    }
    std::filesystem::remove(path);
}

TEST_CASE("the jsonl log brackets the run and parses per line") {
    RunConfig config = tiny_config();
    config.steps = 2;
    const std::string path = temp_path("gencrit_log.jsonl");
    RunOptions options;
    options.log_path = path;
    run_training(config, options);
    std::ifstream in(path);
    REQUIRE(in.is_open());
    std::vector<nlohmann::json> events;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) events.push_back(nlohmann::json::parse(line));
    }
    in.close();
    std::filesystem::remove(path);
    REQUIRE(events.size() > 3);
    CHECK(events.front().at("event") == "run_start");
    CHECK(events.front().contains("world_seed"));
    CHECK(events.back().at("event") == "run_end");
    int step_events = 0;
    for (const auto& e : events)
        if (e.at("event") == "step") ++step_events;
    CHECK(step_events == 2);
}

TEST_CASE("frozen generation holds generation accuracy fixed") {
    RunConfig config = tiny_config();
    config.mode = TrainMode::c_rl;
    config.data_mode = DataMode::dynamic_random;
    config.freeze_generation = true;
    const RunResult result = run_training(config);
    REQUIRE(result.metrics.size() > 1);
    for (const MetricsRow& row : result.metrics)
        CHECK(row.gen_acc == result.metrics.front().gen_acc);
}

TEST_CASE("static data for g_rl is rejected") {
    RunConfig config = tiny_config();
    config.mode = TrainMode::g_rl;
    config.data_mode = DataMode::static_set;
    CHECK_THROWS_AS(run_training(config), ConfigError);
}

TEST_CASE("persistent starvation aborts the run") {
    RunConfig config = tiny_config();
    config.mode = TrainMode::c_rl;
    config.data_mode = DataMode::dynamic_filtered;
    // A draw request of one can never return a balanced pair, so the cache
    // starves every step no matter what the rollout produces.
    config.rollout.questions_per_step = 1;
    config.rollout.n = 4;
    config.rollout.mini_batch = 4;
    config.starvation_limit = 5;
    config.steps = 50;
    const RunResult result = run_training(config);
    CHECK(result.aborted_starvation);
    CHECK(result.steps_completed == 5);
    CHECK(result.starved_steps == 6);
    CHECK(result.metrics.back().step == 5);
}

TEST_CASE("config text round trips exactly") {
    RunConfig config = tiny_config();
    config.mode = TrainMode::c_rl;
    config.data_mode = DataMode::static_set;
    config.rewards.variant = RewardVariant::skew;
    config.rewards.skew_correct = 0.8;
    config.rewards.skew_wrong = 0.6;
    config.optimizer.grouping = AdvantageGrouping::combined;
    config.seeds = {4, 5, 6};
    config.freeze_generation = true;
    const std::string text = config.to_config_text();
    const RunConfig parsed = RunConfig::from_string(text);
    CHECK(parsed.to_config_text() == text);
    CHECK(parsed.mode == TrainMode::c_rl);
    CHECK(parsed.rewards.skew_correct == 0.8);
    CHECK(parsed.seeds == std::vector<std::uint64_t>{4, 5, 6});
    CHECK(parsed.optimizer.grouping == AdvantageGrouping::combined);
}

TEST_CASE("config parsing flags typos duplicates and bad combinations") {
    CHECK_THROWS_WITH_AS(RunConfig::from_string("[world]\nnum_quesions = 8\n"),
                         doctest::Contains("unknown config key"), ConfigError);
    CHECK_THROWS_WITH_AS(RunConfig::from_string("[run]\nsteps = 5\nsteps = 6\n"),
                         doctest::Contains("duplicate key"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_string("[rollout]\nquestions_per_step = 2\nn = 2\n"
                                           "mini_batch = 100\n"),
                    ConfigError);
    CHECK_THROWS_AS(RunConfig::from_file(temp_path("gencrit_missing.conf")), ConfigError);

    RunConfig hacky;
    hacky.mode = TrainMode::c_rl;
    hacky.data_mode = DataMode::dynamic_random;
    bool mentions_hacking = false;
    for (const std::string& w : hacky.warnings())
        if (w.find("hacking") != std::string::npos) mentions_hacking = true;
    CHECK(mentions_hacking);
    CHECK(RunConfig{}.warnings().empty());
}

TEST_CASE("derived config accessors") {
    RunConfig config = tiny_config();
    CHECK(config.effective_seeds() == std::vector<std::uint64_t>{3});
    config.seeds = {7, 8};
    CHECK(config.effective_seeds() == std::vector<std::uint64_t>{7, 8});
    CHECK(config.cache_mode() == CacheMode::filtered);
    config.data_mode = DataMode::dynamic_random;
    CHECK(config.cache_mode() == CacheMode::random_sampling);
    config.data_mode = DataMode::static_set;
    CHECK(config.cache_mode() == CacheMode::static_set);
    const PolicyShape shape = config.policy_shape();
    CHECK(shape.feature_dim == config.world.feature_dim);
    CHECK(shape.num_strategies == config.world.num_strategies);
    CHECK(shape.embed_dim == config.policy.embed_dim);
}

TEST_CASE("mode names round trip") {
    for (TrainMode m : {TrainMode::g_rl, TrainMode::c_rl, TrainMode::gc_rl})
        CHECK(train_mode_from_string(to_string(m)) == m);
    for (DataMode m :
         {DataMode::dynamic_filtered, DataMode::dynamic_random, DataMode::static_set})
        CHECK(data_mode_from_string(to_string(m)) == m);
    CHECK_THROWS_AS(train_mode_from_string("grpo"), ConfigError);
    CHECK_THROWS_AS(data_mode_from_string("dynamic"), ConfigError);
}

TEST_CASE("snapshots round trip worlds policies and checkpoints") {
    const RunConfig config = tiny_config();
    const World world = build_run_world(config, 3);
    const std::string world_path = temp_path("gencrit_world.json");
    snapshot::save_world(world, world_path);
    const World loaded_world = snapshot::load_world(world_path);
    CHECK(loaded_world.config().seed == world.config().seed);
    REQUIRE(loaded_world.num_questions() == world.num_questions());
    for (int q = 0; q < world.num_questions(); ++q) {
        CHECK(loaded_world.question(q).features == world.question(q).features);
        CHECK(loaded_world.question(q).success_probs == world.question(q).success_probs);
    }
    std::filesystem::remove(world_path);

    const RunResult result = run_training(config);
    const std::string policy_path = temp_path("gencrit_policy.json");
    snapshot::save_policy(result.final_params, policy_path);
    CHECK(same_params(snapshot::load_policy(policy_path), result.final_params));
    std::filesystem::remove(policy_path);

    Checkpoint checkpoint;
    checkpoint.step = result.steps_completed;
    checkpoint.params = result.final_params;
    checkpoint.cache = result.final_cache;
    checkpoint.stats = result.stats;
    checkpoint.starved_steps = result.starved_steps;
    const std::string ckpt_path = temp_path("gencrit_ckpt.json");
    snapshot::save_checkpoint(checkpoint, ckpt_path);
    const Checkpoint loaded = snapshot::load_checkpoint(ckpt_path);
    std::filesystem::remove(ckpt_path);
    CHECK(loaded.step == checkpoint.step);
    CHECK(same_params(loaded.params, checkpoint.params));
    CHECK(loaded.cache.size() == checkpoint.cache.size());
    CHECK(loaded.cache.mode() == checkpoint.cache.mode());
    CHECK(loaded.stats.ema_response_reward == checkpoint.stats.ema_response_reward);
    CHECK(loaded.starved_steps == checkpoint.starved_steps);

    auto ita = loaded.cache.entries().begin();
    auto itb = checkpoint.cache.entries().begin();
    for (; ita != loaded.cache.entries().end(); ++ita, ++itb) {
        CHECK(ita->response.uid == itb->response.uid);
        CHECK(ita->response.evidence == itb->response.evidence);
        CHECK(ita->correct == itb->correct);
    }
}

TEST_CASE("snapshot loading rejects the wrong kind") {
    const std::string path = temp_path("gencrit_wrong_kind.json");
    Rng rng(1);
    snapshot::save_policy(PolicyParams::random_init(PolicyShape{}, 0.1, rng), path);
    CHECK_THROWS_AS(snapshot::load_world(path), DataError);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(snapshot::load_policy(temp_path("gencrit_nope.json")), DataError);
}
