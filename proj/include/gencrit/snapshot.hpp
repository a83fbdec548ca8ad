#pragma once

#include <ostream>
#include <string>

#include "gencrit/cache.hpp"
#include "gencrit/policy.hpp"
#include "gencrit/rewards.hpp"
#include "gencrit/world.hpp"

namespace gencrit {

/// Mid-run state sufficient for exact resume: RNG streams are derived from
/// (seed, step), so no generator state needs saving.
struct Checkpoint {
    int step = 0;
    PolicyParams params;
    QuestionResponseCache cache;
    RunningStats stats;
    std::uint64_t starved_steps = 0;
};

namespace snapshot {

/// All files are versioned JSON; loading rejects unknown kinds and versions.
/// Double fields round-trip bit-exactly.
void save_world(const World& world, const std::string& path);
World load_world(const std::string& path);

void save_policy(const PolicyParams& params, const std::string& path);
PolicyParams load_policy(const std::string& path);

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// One JSON object per cache entry, oldest first.
void dump_cache_jsonl(const QuestionResponseCache& cache, std::ostream& out);

}  // namespace snapshot

}  // namespace gencrit
