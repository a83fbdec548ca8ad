#include "gencrit/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "gencrit/errors.hpp"
#include "gencrit/report.hpp"

namespace gencrit {

std::string to_string(TrainMode mode) {
    switch (mode) {
        case TrainMode::g_rl: return "g_rl";
        case TrainMode::c_rl: return "c_rl";
        case TrainMode::gc_rl: return "gc_rl";
    }
    throw ArgumentError("unknown train mode");
}

std::string to_string(DataMode mode) {
    switch (mode) {
        case DataMode::dynamic_filtered: return "dynamic_filtered";
        case DataMode::dynamic_random: return "dynamic_random";
        case DataMode::static_set: return "static";
    }
    throw ArgumentError("unknown data mode");
}

TrainMode train_mode_from_string(const std::string& name) {
    if (name == "g_rl") return TrainMode::g_rl;
    if (name == "c_rl") return TrainMode::c_rl;
    if (name == "gc_rl") return TrainMode::gc_rl;
    throw ConfigError("run.mode must be g_rl, c_rl or gc_rl, got '" + name + "'");
}

DataMode data_mode_from_string(const std::string& name) {
    if (name == "dynamic_filtered") return DataMode::dynamic_filtered;
    if (name == "dynamic_random") return DataMode::dynamic_random;
    if (name == "static") return DataMode::static_set;
    throw ConfigError("run.data_mode must be dynamic_filtered, dynamic_random or static, got '" +
                      name + "'");
}

void PolicyConfig::validate() const {
    if (embed_dim < 1) throw ConfigError("policy.embed_dim must be >= 1");
    if (init_scale < 0.0) throw ConfigError("policy.init_scale must be >= 0");
}

void EvalConfig::validate() const {
    if (per_question < 2) throw ConfigError("eval.per_question must be >= 2");
    if (probe_gammas.empty()) throw ConfigError("eval.probe_gammas must not be empty");
    for (double g : probe_gammas)
        if (g < 0.0) throw ConfigError("eval.probe_gammas entries must be >= 0");
}

void CacheConfig::validate() const {
    if (capacity < 2) throw ConfigError("cache.capacity must be >= 2");
    if (static_per_question < 2) throw ConfigError("cache.static_per_question must be >= 2");
}

namespace {

std::string trim(const std::string& text) {
    const auto begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = text.find_last_not_of(" \t\r\n");
    return text.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::string item;
    std::istringstream stream(text);
    while (std::getline(stream, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

template <typename T>
T parse_number(const std::string& text, const std::string& where) {
    T value{};
    const auto* begin = text.data();
    const auto* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw ConfigError(where + ": cannot parse '" + text + "'");
    return value;
}

}  // namespace

ConfigMap ConfigMap::parse_string(const std::string& text) {
    ConfigMap map;
    std::istringstream stream(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.erase(comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("config line " + std::to_string(line_no) + ": empty section");
            map.sections_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        if (section.empty())
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": key outside any [section]");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        auto& keys = map.sections_[section];
        if (keys.count(key))
            throw ConfigError("config: duplicate key " + section + "." + key);
        keys[key] = value;
    }
    return map;
}

ConfigMap ConfigMap::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_string(buffer.str());
}

bool ConfigMap::has(const std::string& section, const std::string& key) const {
    const auto sit = sections_.find(section);
    return sit != sections_.end() && sit->second.count(key) > 0;
}

std::string ConfigMap::get_string(const std::string& section, const std::string& key,
                                  const std::string& fallback) const {
    const auto sit = sections_.find(section);
    if (sit == sections_.end()) return fallback;
    const auto kit = sit->second.find(key);
    if (kit == sit->second.end()) return fallback;
    read_.insert(section + "." + key);
    return kit->second;
}

double ConfigMap::get_double(const std::string& section, const std::string& key,
                             double fallback) const {
    if (!has(section, key)) return fallback;
    return parse_number<double>(get_string(section, key, ""), section + "." + key);
}

int ConfigMap::get_int(const std::string& section, const std::string& key, int fallback) const {
    if (!has(section, key)) return fallback;
    return parse_number<int>(get_string(section, key, ""), section + "." + key);
}

std::uint64_t ConfigMap::get_u64(const std::string& section, const std::string& key,
                                 std::uint64_t fallback) const {
    if (!has(section, key)) return fallback;
    return parse_number<std::uint64_t>(get_string(section, key, ""), section + "." + key);
}

bool ConfigMap::get_bool(const std::string& section, const std::string& key,
                         bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string value = get_string(section, key, "");
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ConfigError(section + "." + key + ": cannot parse '" + value + "' as boolean");
}

std::vector<double> ConfigMap::get_double_list(const std::string& section, const std::string& key,
                                               const std::vector<double>& fallback) const {
    if (!has(section, key)) return fallback;
    const std::string where = section + "." + key;
    std::vector<double> values;
    for (const std::string& item : split_list(get_string(section, key, "")))
        values.push_back(parse_number<double>(item, where));
    return values;
}

std::vector<std::uint64_t> ConfigMap::get_u64_list(
    const std::string& section, const std::string& key,
    const std::vector<std::uint64_t>& fallback) const {
    if (!has(section, key)) return fallback;
    const std::string where = section + "." + key;
    std::vector<std::uint64_t> values;
    for (const std::string& item : split_list(get_string(section, key, "")))
        values.push_back(parse_number<std::uint64_t>(item, where));
    return values;
}

std::vector<std::string> ConfigMap::unread_keys() const {
    std::vector<std::string> unread;
    for (const auto& [section, keys] : sections_)
        for (const auto& [key, value] : keys)
            if (!read_.count(section + "." + key)) unread.push_back(section + "." + key);
    return unread;
}

RunConfig RunConfig::from_string(const std::string& text) {
    const ConfigMap map = ConfigMap::parse_string(text);
    RunConfig cfg;

    cfg.world.num_questions = map.get_int("world", "num_questions", cfg.world.num_questions);
    cfg.world.num_strategies = map.get_int("world", "num_strategies", cfg.world.num_strategies);
    cfg.world.feature_dim = map.get_int("world", "feature_dim", cfg.world.feature_dim);
    cfg.world.evidence_noise = map.get_double("world", "evidence_noise", cfg.world.evidence_noise);
    cfg.world.success_mean = map.get_double("world", "success_mean", cfg.world.success_mean);
    cfg.world.success_concentration =
        map.get_double("world", "success_concentration", cfg.world.success_concentration);
    cfg.world.refinement_base =
        map.get_double("world", "refinement_base", cfg.world.refinement_base);
    cfg.world.refinement_boost =
        map.get_double("world", "refinement_boost", cfg.world.refinement_boost);
    cfg.world.seed = map.get_u64("world", "seed", cfg.world.seed);

    cfg.policy.embed_dim = map.get_int("policy", "embed_dim", cfg.policy.embed_dim);
    cfg.policy.init_scale = map.get_double("policy", "init_scale", cfg.policy.init_scale);

    cfg.rollout.n = map.get_int("rollout", "n", cfg.rollout.n);
    cfg.rollout.questions_per_step =
        map.get_int("rollout", "questions_per_step", cfg.rollout.questions_per_step);
    cfg.rollout.mini_batch = map.get_int("rollout", "mini_batch", cfg.rollout.mini_batch);
    cfg.rollout.refinement_attempts =
        map.get_int("rollout", "refinement_attempts", cfg.rollout.refinement_attempts);

    cfg.optimizer.grouping = advantage_grouping_from_string(
        map.get_string("optimizer", "grouping", to_string(cfg.optimizer.grouping)));
    cfg.optimizer.std_epsilon =
        map.get_double("optimizer", "std_epsilon", cfg.optimizer.std_epsilon);
    cfg.optimizer.clip_ratio = map.get_double("optimizer", "clip_ratio", cfg.optimizer.clip_ratio);
    cfg.optimizer.kl_coef = map.get_double("optimizer", "kl_coef", cfg.optimizer.kl_coef);
    cfg.optimizer.learning_rate =
        map.get_double("optimizer", "learning_rate", cfg.optimizer.learning_rate);

    cfg.rewards.variant = reward_variant_from_string(
        map.get_string("rewards", "variant", to_string(cfg.rewards.variant)));
    cfg.rewards.critique_base =
        map.get_double("rewards", "critique_base", cfg.rewards.critique_base);
    cfg.rewards.weighted_numerator =
        map.get_double("rewards", "weighted_numerator", cfg.rewards.weighted_numerator);
    cfg.rewards.skew_correct = map.get_double("rewards", "skew_correct", cfg.rewards.skew_correct);
    cfg.rewards.skew_wrong = map.get_double("rewards", "skew_wrong", cfg.rewards.skew_wrong);
    cfg.rewards.denoise_correct_scale =
        map.get_double("rewards", "denoise_correct_scale", cfg.rewards.denoise_correct_scale);
    cfg.rewards.denoise_wrong_scale =
        map.get_double("rewards", "denoise_wrong_scale", cfg.rewards.denoise_wrong_scale);
    cfg.rewards.ema_decay = map.get_double("rewards", "ema_decay", cfg.rewards.ema_decay);

    cfg.cache.capacity = static_cast<std::size_t>(
        map.get_u64("cache", "capacity", static_cast<std::uint64_t>(cfg.cache.capacity)));
    cfg.cache.consume_on_sample =
        map.get_bool("cache", "consume_on_sample", cfg.cache.consume_on_sample);
    cfg.cache.static_per_question =
        map.get_int("cache", "static_per_question", cfg.cache.static_per_question);

    cfg.eval.per_question = map.get_int("eval", "per_question", cfg.eval.per_question);
    cfg.eval.probe_gammas = map.get_double_list("eval", "probe_gammas", cfg.eval.probe_gammas);

    cfg.mode = train_mode_from_string(map.get_string("run", "mode", to_string(cfg.mode)));
    cfg.data_mode =
        data_mode_from_string(map.get_string("run", "data_mode", to_string(cfg.data_mode)));
    cfg.steps = map.get_int("run", "steps", cfg.steps);
    cfg.eval_every = map.get_int("run", "eval_every", cfg.eval_every);
    cfg.seed = map.get_u64("run", "seed", cfg.seed);
    cfg.seeds = map.get_u64_list("run", "seeds", cfg.seeds);
    cfg.output_dir = map.get_string("run", "output_dir", cfg.output_dir);
    cfg.freeze_generation = map.get_bool("run", "freeze_generation", cfg.freeze_generation);
    cfg.starvation_limit = map.get_int("run", "starvation_limit", cfg.starvation_limit);

    const std::vector<std::string> unread = map.unread_keys();
    if (!unread.empty()) {
        std::string joined;
        for (const std::string& key : unread) {
            if (!joined.empty()) joined += ", ";
            joined += key;
        }
        throw ConfigError("unknown config key(s): " + joined);
    }
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_string(buffer.str());
}

PolicyShape RunConfig::policy_shape() const {
    PolicyShape shape;
    shape.feature_dim = world.feature_dim;
    shape.embed_dim = policy.embed_dim;
    shape.num_strategies = world.num_strategies;
    return shape;
}

CacheMode RunConfig::cache_mode() const {
    switch (data_mode) {
        case DataMode::dynamic_filtered: return CacheMode::filtered;
        case DataMode::dynamic_random: return CacheMode::random_sampling;
        case DataMode::static_set: return CacheMode::static_set;
    }
    throw ArgumentError("unknown data mode");
}

std::vector<std::uint64_t> RunConfig::effective_seeds() const {
    if (!seeds.empty()) return seeds;
    return {seed};
}

void RunConfig::validate() const {
    world.validate();
    policy.validate();
    rollout.validate();
    optimizer.validate();
    rewards.validate();
    cache.validate();
    eval.validate();
    if (steps < 1) throw ConfigError("run.steps must be >= 1");
    if (eval_every < 1) throw ConfigError("run.eval_every must be >= 1");
    if (starvation_limit < 1) throw ConfigError("run.starvation_limit must be >= 1");
    if (output_dir.empty()) throw ConfigError("run.output_dir must not be empty");
    if (rollout.mini_batch > rollout.questions_per_step * rollout.n)
        throw ConfigError("rollout.mini_batch must not exceed samples per step");
}

std::vector<std::string> RunConfig::warnings() const {
    std::vector<std::string> notes;
    if (mode == TrainMode::c_rl && data_mode != DataMode::static_set)
        notes.push_back("c_rl on dynamic data trains the critic on its own shifting generator; "
                        "this is the reward-hacking regime");
    if (freeze_generation && mode == TrainMode::g_rl)
        notes.push_back("freeze_generation with mode g_rl leaves nothing to train");
    return notes;
}

std::string RunConfig::to_config_text() const {
    using report::format_double;
    std::ostringstream out;
    out << "[world]\n";
    out << "num_questions = " << world.num_questions << '\n';
    out << "num_strategies = " << world.num_strategies << '\n';
    out << "feature_dim = " << world.feature_dim << '\n';
    out << "evidence_noise = " << format_double(world.evidence_noise) << '\n';
    out << "success_mean = " << format_double(world.success_mean) << '\n';
    out << "success_concentration = " << format_double(world.success_concentration) << '\n';
    out << "refinement_base = " << format_double(world.refinement_base) << '\n';
    out << "refinement_boost = " << format_double(world.refinement_boost) << '\n';
    out << "seed = " << world.seed << '\n';
    out << "\n[policy]\n";
    out << "embed_dim = " << policy.embed_dim << '\n';
    out << "init_scale = " << format_double(policy.init_scale) << '\n';
    out << "\n[rollout]\n";
    out << "n = " << rollout.n << '\n';
    out << "questions_per_step = " << rollout.questions_per_step << '\n';
    out << "mini_batch = " << rollout.mini_batch << '\n';
    out << "refinement_attempts = " << rollout.refinement_attempts << '\n';
    out << "\n[optimizer]\n";
    out << "grouping = " << to_string(optimizer.grouping) << '\n';
    out << "std_epsilon = " << format_double(optimizer.std_epsilon) << '\n';
    out << "clip_ratio = " << format_double(optimizer.clip_ratio) << '\n';
    out << "kl_coef = " << format_double(optimizer.kl_coef) << '\n';
    out << "learning_rate = " << format_double(optimizer.learning_rate) << '\n';
    out << "\n[rewards]\n";
    out << "variant = " << to_string(rewards.variant) << '\n';
    out << "critique_base = " << format_double(rewards.critique_base) << '\n';
    out << "weighted_numerator = " << format_double(rewards.weighted_numerator) << '\n';
    out << "skew_correct = " << format_double(rewards.skew_correct) << '\n';
    out << "skew_wrong = " << format_double(rewards.skew_wrong) << '\n';
    out << "denoise_correct_scale = " << format_double(rewards.denoise_correct_scale) << '\n';
    out << "denoise_wrong_scale = " << format_double(rewards.denoise_wrong_scale) << '\n';
    out << "ema_decay = " << format_double(rewards.ema_decay) << '\n';
    out << "\n[cache]\n";
    out << "capacity = " << cache.capacity << '\n';
    out << "consume_on_sample = " << (cache.consume_on_sample ? "true" : "false") << '\n';
    out << "static_per_question = " << cache.static_per_question << '\n';
    out << "\n[eval]\n";
    out << "per_question = " << eval.per_question << '\n';
    out << "probe_gammas = ";
    for (std::size_t i = 0; i < eval.probe_gammas.size(); ++i) {
        if (i > 0) out << ',';
        out << format_double(eval.probe_gammas[i]);
    }
    out << '\n';
    out << "\n[run]\n";
    out << "mode = " << to_string(mode) << '\n';
    out << "data_mode = " << to_string(data_mode) << '\n';
    out << "steps = " << steps << '\n';
    out << "eval_every = " << eval_every << '\n';
    out << "seed = " << seed << '\n';
    if (!seeds.empty()) {
        out << "seeds = ";
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            if (i > 0) out << ',';
            out << seeds[i];
        }
        out << '\n';
    }
    out << "output_dir = " << output_dir << '\n';
    out << "freeze_generation = " << (freeze_generation ? "true" : "false") << '\n';
    out << "starvation_limit = " << starvation_limit << '\n';
    return out.str();
}

}  // namespace gencrit
