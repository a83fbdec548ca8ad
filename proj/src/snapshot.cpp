#include "gencrit/snapshot.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "gencrit/errors.hpp"

namespace gencrit {
namespace snapshot {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json load_json(const std::string& path, const char* kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(std::string("cannot open ") + kind + " snapshot: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& err) {
        throw DataError(std::string(kind) + " snapshot is not valid JSON: " + path + " (" +
                        err.what() + ")");
    }
    if (doc.value("kind", "") != kind)
        throw DataError(std::string("snapshot at ") + path + " is not a " + kind + " snapshot");
    if (doc.value("format_version", -1) != kFormatVersion)
        throw DataError(std::string("unsupported ") + kind + " snapshot version in " + path);
    return doc;
}

void write_json(const json& doc, const std::string& path, const char* kind) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(std::string("cannot write ") + kind + " snapshot: " + path);
    out << doc.dump() << '\n';
    if (!out) throw DataError(std::string("failed writing ") + kind + " snapshot: " + path);
}

json world_config_to_json(const WorldConfig& config) {
    return json{{"num_questions", config.num_questions},
                {"num_strategies", config.num_strategies},
                {"feature_dim", config.feature_dim},
                {"evidence_noise", config.evidence_noise},
                {"success_mean", config.success_mean},
                {"success_concentration", config.success_concentration},
                {"refinement_base", config.refinement_base},
                {"refinement_boost", config.refinement_boost},
                {"seed", config.seed}};
}

WorldConfig world_config_from_json(const json& doc) {
    WorldConfig config;
    config.num_questions = doc.at("num_questions").get<int>();
    config.num_strategies = doc.at("num_strategies").get<int>();
    config.feature_dim = doc.at("feature_dim").get<int>();
    config.evidence_noise = doc.at("evidence_noise").get<double>();
    config.success_mean = doc.at("success_mean").get<double>();
    config.success_concentration = doc.at("success_concentration").get<double>();
    config.refinement_base = doc.at("refinement_base").get<double>();
    config.refinement_boost = doc.at("refinement_boost").get<double>();
    config.seed = doc.at("seed").get<std::uint64_t>();
    return config;
}

json policy_to_json(const PolicyParams& params) {
    const PolicyShape& shape = params.shape();
    return json{{"shape",
                 {{"feature_dim", shape.feature_dim},
                  {"embed_dim", shape.embed_dim},
                  {"num_strategies", shape.num_strategies}}},
                {"data", std::vector<double>(params.data().begin(), params.data().end())}};
}

PolicyParams policy_from_json(const json& doc) {
    PolicyShape shape;
    const json& shape_doc = doc.at("shape");
    shape.feature_dim = shape_doc.at("feature_dim").get<int>();
    shape.embed_dim = shape_doc.at("embed_dim").get<int>();
    shape.num_strategies = shape_doc.at("num_strategies").get<int>();
    if (shape.feature_dim < 1 || shape.embed_dim < 1 || shape.num_strategies < 1)
        throw DataError("policy snapshot: invalid shape");
    const std::vector<double> data = doc.at("data").get<std::vector<double>>();
    if (data.size() != static_cast<std::size_t>(shape.num_params()))
        throw DataError("policy snapshot: data length does not match shape");
    PolicyParams params(shape);
    std::copy(data.begin(), data.end(), params.data().begin());
    return params;
}

json response_to_json(const ResponseRecord& response) {
    return json{{"question_id", response.question_id},
                {"strategy", response.strategy},
                {"correct", response.correct},
                {"evidence", response.evidence},
                {"behavior_logprob", response.behavior_logprob},
                {"noise", response.noise},
                {"uid", response.uid}};
}

ResponseRecord response_from_json(const json& doc) {
    ResponseRecord response;
    response.question_id = doc.at("question_id").get<int>();
    response.strategy = doc.at("strategy").get<int>();
    response.correct = doc.at("correct").get<bool>();
    response.evidence = doc.at("evidence").get<std::vector<double>>();
    response.behavior_logprob = doc.at("behavior_logprob").get<double>();
    response.noise = doc.at("noise").get<double>();
    response.uid = doc.at("uid").get<std::uint64_t>();
    return response;
}

json cache_entry_to_json(const CacheEntry& entry) {
    return json{{"question_id", entry.question_id},
                {"correct", entry.correct},
                {"inserted_step", entry.inserted_step},
                {"response", response_to_json(entry.response)}};
}

CacheEntry cache_entry_from_json(const json& doc) {
    CacheEntry entry;
    entry.question_id = doc.at("question_id").get<int>();
    entry.correct = doc.at("correct").get<bool>();
    entry.inserted_step = doc.at("inserted_step").get<int>();
    entry.response = response_from_json(doc.at("response"));
    return entry;
}

}  // namespace

void save_world(const World& world, const std::string& path) {
    json questions = json::array();
    for (const Question& q : world.questions()) {
        questions.push_back(
            json{{"id", q.id}, {"features", q.features}, {"success_probs", q.success_probs}});
    }
    const json doc{{"kind", "world"},
                   {"format_version", kFormatVersion},
                   {"config", world_config_to_json(world.config())},
                   {"questions", std::move(questions)}};
    write_json(doc, path, "world");
}

World load_world(const std::string& path) {
    const json doc = load_json(path, "world");
    const WorldConfig config = world_config_from_json(doc.at("config"));
    std::vector<Question> questions;
    for (const json& q : doc.at("questions")) {
        Question question;
        question.id = q.at("id").get<int>();
        question.features = q.at("features").get<std::vector<double>>();
        question.success_probs = q.at("success_probs").get<std::vector<double>>();
        questions.push_back(std::move(question));
    }
    return World::restore(config, std::move(questions));
}

void save_policy(const PolicyParams& params, const std::string& path) {
    if (!params.all_finite()) throw NumericError("refusing to snapshot non-finite policy");
    json doc = policy_to_json(params);
    doc["kind"] = "policy";
    doc["format_version"] = kFormatVersion;
    write_json(doc, path, "policy");
}

PolicyParams load_policy(const std::string& path) {
    return policy_from_json(load_json(path, "policy"));
}

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
    if (!checkpoint.params.all_finite())
        throw NumericError("refusing to checkpoint non-finite policy");
    json entries = json::array();
    for (const CacheEntry& entry : checkpoint.cache.entries())
        entries.push_back(cache_entry_to_json(entry));
    const json doc{
        {"kind", "checkpoint"},
        {"format_version", kFormatVersion},
        {"step", checkpoint.step},
        {"policy", policy_to_json(checkpoint.params)},
        {"stats",
         {{"ema_response_reward", checkpoint.stats.ema_response_reward},
          {"decay", checkpoint.stats.decay},
          {"weighted_guard_hits", checkpoint.stats.weighted_guard_hits}}},
        {"starved_steps", checkpoint.starved_steps},
        {"cache",
         {{"mode", to_string(checkpoint.cache.mode())},
          {"capacity", checkpoint.cache.capacity()},
          {"consume_on_sample", checkpoint.cache.consume_on_sample()},
          {"entries", std::move(entries)}}}};
    write_json(doc, path, "checkpoint");
}

Checkpoint load_checkpoint(const std::string& path) {
    const json doc = load_json(path, "checkpoint");
    Checkpoint checkpoint;
    checkpoint.step = doc.at("step").get<int>();
    checkpoint.params = policy_from_json(doc.at("policy"));
    const json& stats = doc.at("stats");
    checkpoint.stats.ema_response_reward = stats.at("ema_response_reward").get<double>();
    checkpoint.stats.decay = stats.at("decay").get<double>();
    checkpoint.stats.weighted_guard_hits = stats.at("weighted_guard_hits").get<std::uint64_t>();
    checkpoint.starved_steps = doc.at("starved_steps").get<std::uint64_t>();
    const json& cache_doc = doc.at("cache");
    std::vector<CacheEntry> entries;
    for (const json& entry : cache_doc.at("entries"))
        entries.push_back(cache_entry_from_json(entry));
    checkpoint.cache = QuestionResponseCache::restore(
        cache_doc.at("capacity").get<std::size_t>(),
        cache_mode_from_string(cache_doc.at("mode").get<std::string>()),
        cache_doc.at("consume_on_sample").get<bool>(), std::move(entries));
    return checkpoint;
}

void dump_cache_jsonl(const QuestionResponseCache& cache, std::ostream& out) {
    for (const CacheEntry& entry : cache.entries()) out << cache_entry_to_json(entry).dump() << '\n';
}

}  // namespace snapshot

}  // namespace gencrit
