#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gencrit/cache.hpp"
#include "gencrit/optimizer.hpp"
#include "gencrit/policy.hpp"
#include "gencrit/rewards.hpp"
#include "gencrit/rollout.hpp"
#include "gencrit/world.hpp"

namespace gencrit {

enum class TrainMode { g_rl, c_rl, gc_rl };
enum class DataMode { dynamic_filtered, dynamic_random, static_set };

std::string to_string(TrainMode mode);
std::string to_string(DataMode mode);
TrainMode train_mode_from_string(const std::string& name);
DataMode data_mode_from_string(const std::string& name);

struct PolicyConfig {
    int embed_dim = 8;
    double init_scale = 0.1;

    void validate() const;
};

struct EvalConfig {
    int per_question = 10;
    std::vector<double> probe_gammas = {0.0, 3.0, 8.0};  // probe skill tiers

    void validate() const;
};

struct CacheConfig {
    std::size_t capacity = 8192;
    bool consume_on_sample = true;
    int static_per_question = 10;  // pre-sampled responses per question in static mode

    void validate() const;
};

/// Everything one training run needs; mirrors the sections of the config
/// file. Defaults reproduce the reference setup.
struct RunConfig {
    TrainMode mode = TrainMode::gc_rl;
    DataMode data_mode = DataMode::dynamic_filtered;
    WorldConfig world;
    PolicyConfig policy;
    RolloutConfig rollout;
    OptimizerConfig optimizer;
    RewardConfig rewards;
    CacheConfig cache;
    EvalConfig eval;

    int steps = 2000;
    int eval_every = 100;
    std::uint64_t seed = 1;
    std::vector<std::uint64_t> seeds;  // preset runs; empty means {seed}
    std::string output_dir = "out";
    bool freeze_generation = false;
    int starvation_limit = 50;

    static RunConfig from_string(const std::string& text);
    static RunConfig from_file(const std::string& path);

    PolicyShape policy_shape() const;
    CacheMode cache_mode() const;
    std::vector<std::uint64_t> effective_seeds() const;

    void validate() const;
    /// Permitted-but-flagged combinations (e.g. c_rl on dynamic data).
    std::vector<std::string> warnings() const;
    /// Serialize back to config-file text; parsing the result reproduces
    /// this config exactly.
    std::string to_config_text() const;
};

/// Parsed key/value config file: `[section]` headers, `key = value` lines,
/// `#` or `;` comments. Parsing keeps strings; typed access converts on
/// demand and names the offending section.key on failure.
class ConfigMap {
  public:
    static ConfigMap parse_string(const std::string& text);
    static ConfigMap parse_file(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& section, const std::string& key,
                          std::uint64_t fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<double> get_double_list(const std::string& section, const std::string& key,
                                        const std::vector<double>& fallback) const;
    std::vector<std::uint64_t> get_u64_list(const std::string& section, const std::string& key,
                                            const std::vector<std::uint64_t>& fallback) const;

    /// Keys present in the file but never read; non-empty means a typo.
    std::vector<std::string> unread_keys() const;

  private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
    mutable std::set<std::string> read_;
};

}  // namespace gencrit
